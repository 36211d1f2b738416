//! Lattice-surgery CNOT: oracle checks, stage distances and byproducts for
//! every mode.
//!
//! Usage: cargo run --example cnot [d]

use colorsurg::sim::run;
use colorsurg::surgery::{logical_cnot, CnotMode, Extraction};
use colorsurg::verify::{stage_distances, verify_cnot};

fn main() -> colorsurg::Result<()> {
    let d: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    for mode in [CnotMode::Accelerated, CnotMode::SevenStep, CnotMode::Horsman] {
        println!("{}", verify_cnot(d, mode, 8)?);
        let c = logical_cnot(d, mode, Extraction::default())?;
        for (label, w) in stage_distances(&c)? {
            println!(
                "    stage {label}: min logical weight {}",
                w.map_or(format!("> {d}"), |w| w.to_string())
            );
        }
        let bits = run(&c.schedule.circuit, 7)?.bits;
        let o = c.outcome(&bits);
        println!(
            "    seed 7: outcomes a={} b={} c={}, frame {:?}",
            o.a as u8, o.b as u8, o.c as u8, o.frame_update
        );
    }
    Ok(())
}
