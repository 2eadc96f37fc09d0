//! Export a triplet's coefficients to the text format and read them back.
//!
//! Run with: cargo run --release --example coefficient_io

use peer_triplets::coeff_file::{export_coefficients, import_coefficients};
use peer_triplets::load_builtin;

fn main() {
    let triplet = load_builtin("AP4o33vg").unwrap();
    let text = export_coefficients(&triplet);
    println!("{}", text);
    let back = import_coefficients(&text).unwrap();
    assert_eq!(triplet, back);
    println!("# round trip bit-identical: true");
}
