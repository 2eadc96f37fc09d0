//! Variable-stepsize implicit Peer two-step triplets for ODE-constrained
//! optimal control in a first-discretize-then-optimize setting.
//!
//! The crate bundles four things:
//!
//! - the coefficient data of the four published 4-stage triplets
//!   (`AP4o33vg`, `AP4o33vs`, `AP4o43vs`, `AP4o33va`) together with the
//!   reconstruction of the stepsize-ratio dependent matrix B(sigma),
//! - a verification layer that certifies order conditions,
//!   super-convergence identities, error constants, spectra, weighted
//!   zero-stability norms and stability-angle scans for any triplet,
//! - stepsize-sequence generators (uniform, alternating, smoothly varying,
//!   and error-equidistributed meshes from a density function), and
//! - a damped Newton solver for the coupled discrete KKT boundary value
//!   problem of a reduced optimal control problem, with a block-tridiagonal
//!   direct linear solver, plus a convergence-study harness.
//!
//! Entry points: [`builtin::load_builtin`] for coefficients,
//! [`verify::verify_triplet`] for a full certification report,
//! [`kkt::newton_solve`] for a single solve and
//! [`study::run_convergence_study`] for the benchmark harness.
//! The `examples/` directory contains one runnable example per capability;
//! the thin `peer-triplets` binary exposes the same functionality as the
//! subcommands `verify`, `converge`, `mesh` and `solve`.
//!
//! ```
//! use peer_triplets::{load_builtin, Step};
//! use peer_triplets::verify::{lambda2, order_residual, Direction};
//!
//! let t = load_builtin("AP4o33vg").unwrap();
//! // The pulcherrima triplet carries the 3/8-rule weights and damping 0.31.
//! assert_eq!(t.k[(1, 1)], 3.0 / 8.0);
//! assert!((lambda2(&t).unwrap() - 0.306).abs() < 1e-3);
//! // Third-order conditions hold for every stepsize ratio.
//! let r = order_residual(&t, Step::Standard, Direction::Forward, 3, 1.37).unwrap();
//! assert!(r < 1e-11);
//! ```

pub mod builtin;
pub mod coeff_file;
pub mod grid;
pub mod kkt;
pub mod linalg;
pub mod problems;
pub mod study;
pub mod verify;

mod cli;
pub use cli::run_cli;

pub mod triplet;

pub use builtin::{load_builtin, BUILTIN_NAMES};
pub use triplet::{BHat, Laurent, Orders, PeerTriplet, Step, StructuralMatrices, TripletError};
