//! Order-condition residuals of all built-in triplets over a sweep of
//! stepsize ratios.
//!
//! Run with: cargo run --release --example order_conditions

use peer_triplets::verify::{order_residual, Direction};
use peer_triplets::{load_builtin, Step, BUILTIN_NAMES};

fn main() {
    println!(
        "{:<10} {:>7} {:>12} {:>12} {:>12} {:>12}",
        "triplet", "sigma", "fwd r=3", "adj q=3", "start fwd", "end adj"
    );
    for name in BUILTIN_NAMES {
        let t = load_builtin(name).unwrap();
        for sigma in [0.6, 1.0, 1.5, 1.9] {
            let fwd = order_residual(&t, Step::Standard, Direction::Forward, 3, sigma).unwrap();
            let adj = order_residual(&t, Step::Standard, Direction::Adjoint, 3, sigma).unwrap();
            let start = order_residual(&t, Step::Start, Direction::Forward, 3, sigma).unwrap();
            let end = order_residual(&t, Step::End, Direction::Adjoint, 3, sigma).unwrap();
            println!(
                "{:<10} {:>7.2} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
                name, sigma, fwd, adj, start, end
            );
        }
    }
    // The fourth-order conditions of AP4o43vs hold at sigma = 1 only.
    let t = load_builtin("AP4o43vs").unwrap();
    println!("\nAP4o43vs forward order 4:");
    for sigma in [1.0, 1.2, 1.5] {
        let r = order_residual(&t, Step::Standard, Direction::Forward, 4, sigma).unwrap();
        println!("  sigma = {:<4} residual = {:.3e}", sigma, r);
    }
}
