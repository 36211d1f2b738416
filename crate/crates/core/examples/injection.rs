//! State injection: noiseless readouts, step-2 fault detection and the
//! Bell-pair waiting time.
//!
//! Usage: cargo run --release --example injection [d]

use colorsurg::montecarlo::bell_wait;
use colorsurg::surgery::InjectionInput;
use colorsurg::verify::{injection_detection, verify_injection};

fn main() -> colorsurg::Result<()> {
    let d: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for input in [
        InjectionInput::Zero,
        InjectionInput::Plus,
        InjectionInput::SPlus,
        InjectionInput::SymbolicT,
    ] {
        println!("{}", verify_injection(d, input, 4)?);
    }
    let r = injection_detection(d, d <= 5)?;
    println!(
        "step-2 single faults: {} tried, {} on the injected qubit, {} aliased, {} undetected",
        r.faults, r.excluded, r.aliased, r.undetected
    );
    if let (Some(a), Some(u)) = (r.aliased_pairs, r.undetected_pairs) {
        println!("step-2 fault pairs: {a} aliased, {u} undetected");
    }
    let w = bell_wait(d, 0.01, 1_000_000, 1)?;
    println!(
        "Bell wait at p=0.01: {:.5} +/- {:.5} attempts (expected {:.5})",
        w.mean, w.stderr, w.expected
    );
    Ok(())
}
