//! Convergence study on the stiff tracking benchmark: alternating
//! stepsize ratios, CSV output plus fitted observed orders.
//!
//! Run with: cargo run --release --example convergence_study

use peer_triplets::study::{run_convergence_study, GridFamily, ProblemSpec, StudySpec};

fn main() {
    for name in ["AP4o33vg", "AP4o43vs"] {
        let spec = StudySpec {
            triplet: name.to_string(),
            problem: ProblemSpec::Tracking {
                lambda: -50.0,
                alpha: 1.0,
            },
            grid: GridFamily::Alternating { sigma: 1.3 },
            component: 0,
            n_list: vec![40, 80, 160, 320],
            tolerance: 1e-12,
        };
        let record = run_convergence_study(&spec).unwrap();
        print!("{}", record.to_csv());
        println!(
            "# {} terminal orders: state {:.2}, adjoint {:.2}\n",
            name,
            record.terminal_order_state().unwrap(),
            record.terminal_order_adjoint().unwrap()
        );
    }
}
