//! One discrete-KKT solve of the stiff tracking benchmark with stage-error
//! reporting against the exact solution.
//!
//! Run with: cargo run --release --example solve_kkt

use peer_triplets::grid::alternating;
use peer_triplets::kkt::{newton_solve, solution_errors, NewtonConfig};
use peer_triplets::load_builtin;
use peer_triplets::problems::problem_tracking;

fn main() {
    let triplet = load_builtin("AP4o43vs").unwrap();
    let grid = alternating(80, 1.3, 0.5).unwrap();
    let problem = problem_tracking(-50.0, 1.0).unwrap();
    let sol = newton_solve(&triplet, &grid, &problem, &NewtonConfig::default()).unwrap();
    println!(
        "converged in {} Newton iterations, residual {:.2e}",
        sol.iterations, sol.residual_norm
    );
    println!("residual history: {:?}", sol.residual_history);
    println!("terminal state  {:?}", sol.y_terminal);
    println!("terminal adjoint {:?}", sol.p_terminal);
    for component in 0..3 {
        let (es, ea) = solution_errors(&sol, &problem, &grid, component).unwrap();
        println!(
            "component {}: max state error {:.3e}, max adjoint error {:.3e}",
            component + 1,
            es,
            ea
        );
    }
}
