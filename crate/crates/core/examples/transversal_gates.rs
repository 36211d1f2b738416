//! Transversal H and S on a color patch, checked against textbook
//! eigenvalues.
//!
//! Usage: cargo run --example transversal_gates [d]

use colorsurg::surgery::phase_gate_kind;
use colorsurg::verify::{verify_hadamard, verify_memory, verify_phase};

fn main() -> colorsurg::Result<()> {
    let d: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    println!("physical phase gate at d={d}: {:?}", phase_gate_kind(d));
    println!("{}", verify_hadamard(d, 8)?);
    println!("{}", verify_phase(d, 8)?);
    println!("{}", verify_memory(d, 8)?);
    Ok(())
}
