//! Error-equidistributed meshes for the two benchmark problems, with the
//! stepsize-ratio statistics of the published experiments.
//!
//! Run with: cargo run --release --example mesh_equidistribution

use peer_triplets::grid::{density_catenary, density_tracking, equidistribute};

fn main() {
    for (label, t_end, density) in [
        ("tracking  r=3", 0.5, density_tracking(3, -50.0)),
        ("tracking  r=4", 0.5, density_tracking(4, -50.0)),
        ("catenary  r=3", 2.0, density_catenary(3, 10.0, -10.0)),
        ("catenary  r=4", 2.0, density_catenary(4, 10.0, -10.0)),
    ] {
        print!("{}:", label);
        for steps in [40usize, 80, 160, 320] {
            let g = equidistribute(&density, steps - 1, t_end).unwrap();
            print!(
                "  N+1={}: sigma in [{:.2}, {:.2}], max|eta| {:.2}",
                steps,
                g.sigma_min(),
                g.sigma_max(),
                g.eta_max()
            );
        }
        println!();
    }
}
