//! Circuit-level lookup decoder for a distance-3 memory: build, serialize,
//! reload, and check it against every single fault.
//!
//! Usage: cargo run --release --example lookup_decoder [order]

use colorsurg::decoding::{single_fault_failures, LookupTable};
use colorsurg::geometry::build_color_patch;
use colorsurg::surgery::{logical_identity, Extraction};

fn main() -> colorsurg::Result<()> {
    let order: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let s = logical_identity(&build_color_patch(3)?, 3, Extraction::default())?;
    let t = std::time::Instant::now();
    let lt = s.lookup(order)?;
    println!(
        "order {order}: {} detectors, {} entries, {} conflicts, built in {:.2?}",
        lt.n_detectors,
        lt.len(),
        lt.conflicts,
        t.elapsed()
    );
    let bytes = lt.to_bytes();
    let back = LookupTable::from_bytes(&bytes)?;
    println!(
        "serialized {} bytes, round trip {}",
        bytes.len(),
        if back.entries == lt.entries { "ok" } else { "MISMATCH" }
    );
    let (fails, tried) = single_fault_failures(&s.circuit, &lt, &s.analysis.detectors, &s.observable_parities());
    println!("single faults decoded wrongly: {fails}/{tried}");
    Ok(())
}
