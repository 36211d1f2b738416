//! Build color and surface patches, report their sizes and brute-force distances.
//!
//! Usage: cargo run --example lattice [d]

use colorsurg::geometry::{build_color_patch, build_surface_patch};
use colorsurg::pauli::code_distance;

fn main() -> colorsurg::Result<()> {
    let d: i64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for (name, p) in [("color 4.8.8", build_color_patch(d)?), ("surface", build_surface_patch(d)?)] {
        let cs = p.checkset();
        println!(
            "{name:12} d={d}: {} data qubits, {} faces, {} checks, {} logical qubit(s), distance {}",
            p.n(),
            p.faces.len(),
            cs.len(),
            cs.logical_qubits(),
            code_distance(&cs, &p.logical_pair())?
        );
    }
    let p = build_color_patch(d)?;
    println!("logical X support: {:?}", p.logical_x);
    println!(
        "{}",
        serde_json::to_string(&p.to_json())
            .unwrap_or_default()
            .chars()
            .take(200)
            .collect::<String>()
            + " ..."
    );
    Ok(())
}
