//! Stability certificates: A(alpha) ray scans, damping factors and the
//! empirically certified zero-stability intervals.
//!
//! Run with: cargo run --release --example stability_scan

use peer_triplets::verify::{
    builtin_reference, certified_sigma_interval, default_scan_radii, lambda2, stability_angle_scan,
    zero_stability_norms,
};
use peer_triplets::{load_builtin, BUILTIN_NAMES};

fn main() {
    let radii = default_scan_radii();
    for name in BUILTIN_NAMES {
        let t = load_builtin(name).unwrap();
        let r = builtin_reference(name).unwrap();
        let l2 = lambda2(&t).unwrap();
        let pass = stability_angle_scan(&t, (r.alpha_deg - 1.0).min(90.0), &radii);
        let fail = if r.alpha_deg + 2.0 <= 90.0 {
            !stability_angle_scan(&t, r.alpha_deg + 2.0, &radii)
        } else {
            true
        };
        let emp = certified_sigma_interval(&t).unwrap();
        let (nf, na) = zero_stability_norms(&t, 1.0).unwrap();
        println!("{}:", name);
        println!("  |lambda2(A^-1 B(1))| = {:.4}", l2);
        println!(
            "  A({:.2} deg) scan: pass at -1 deg = {}, fail at +2 deg = {}",
            r.alpha_deg, pass, fail
        );
        println!("  weighted norms at sigma = 1: ({:.12}, {:.12})", nf, na);
        println!(
            "  zero-stability interval (0.001 grid): [{:.3}, {:.3}], declared [{}, {}]",
            emp.0, emp.1, t.sigma_interval.0, t.sigma_interval.1
        );
    }
}
