//! Joint XX and ZZ measurement by merging two color patches: the product of
//! lighter-face checks against a direct joint measurement.
//!
//! Usage: cargo run --example merge [d] [seeds]

use colorsurg::geometry::Basis;
use colorsurg::verify::{merge_identity, verify_merge};

fn main() -> colorsurg::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().ok());
    let d = args.next().flatten().unwrap_or(3) as usize;
    let seeds = args.next().flatten().unwrap_or(200);
    for b in [Basis::X, Basis::Z] {
        let (bad, counts) = merge_identity(d, b, seeds)?;
        println!(
            "M_{b:?}{b:?} d={d}: {bad} mismatches over {seeds} seeds, outcomes +1: {}, -1: {}",
            counts[0], counts[1]
        );
    }
    println!("{}", verify_merge(d, 8)?);
    Ok(())
}
