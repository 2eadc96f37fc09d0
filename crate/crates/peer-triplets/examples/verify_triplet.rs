//! Full structural verification of a Peer triplet.
//!
//! Run with: cargo run --release --example verify_triplet [TRIPLET]

use peer_triplets::verify::verify_triplet;
use peer_triplets::{load_builtin, BUILTIN_NAMES};

fn main() {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "AP4o33vg".to_string());
    if !BUILTIN_NAMES.contains(&name.as_str()) {
        eprintln!("unknown triplet '{}'; available: {:?}", name, BUILTIN_NAMES);
        std::process::exit(3);
    }
    let triplet = load_builtin(&name).unwrap();
    let report = verify_triplet(&triplet).unwrap();
    print!("{}", report.render_table());
    std::process::exit(if report.all_pass() { 0 } else { 1 });
}
