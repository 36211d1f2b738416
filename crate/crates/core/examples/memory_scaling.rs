//! Logical failure rate of a distance-3 memory versus p, with a power-law fit.
//!
//! Usage: cargo run --release --example memory_scaling [trials]

use colorsurg::montecarlo::{fit_scaling, results_csv, Campaign, Prepared, Protocol};

fn main() -> colorsurg::Result<()> {
    let trials: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let d = 3;
    let prep = Prepared::new(Protocol::Memory, d, Some(3), 1)?;
    let mut results = Vec::new();
    for p in [1e-3, 3e-3, 1e-2] {
        let c = Campaign {
            rounds: Some(3),
            ..Campaign::new(Protocol::Memory, d, p, trials, 2024)
        };
        results.push(prep.run(&c)?);
    }
    let pts: Vec<_> = results.iter().map(|r| (r.campaign.p, r.p_fail)).collect();
    let fit = fit_scaling(&pts).ok();
    print!("{}", results_csv(&results, fit.as_ref()));
    Ok(())
}
