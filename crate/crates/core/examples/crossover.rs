//! Error rate below which a color code needs fewer qubits than a surface
//! code of equal logical failure rate, for both threshold scenarios.
//!
//! Usage: cargo run --example crossover

use colorsurg::resources::{crossover_csv, overhead_ratio, ResourceModel};

fn main() -> colorsurg::Result<()> {
    let color = ResourceModel::best_for_color();
    let surface = ResourceModel::best_for_surface();
    print!(
        "{}",
        crossover_csv(&[("best_for_color", &color), ("best_for_surface", &surface)], &[5, 11, 21, 51])?
    );
    for p in [1e-4, 1e-6, 1e-8] {
        println!(
            "d_s=11, p={p:e}: color/surface qubit ratio {:.3} and {:.3}",
            overhead_ratio(&color, 11.0, p)?,
            overhead_ratio(&surface, 11.0, p)?
        );
    }
    Ok(())
}
