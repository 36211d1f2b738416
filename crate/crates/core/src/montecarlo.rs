//! Seeded Monte-Carlo estimation of logical failure rates.
//!
//! A trial samples circuit-level faults for the whole noisy schedule,
//! propagates them as Pauli frames (64 trials per machine word), decodes the
//! detector events with the schedule's lookup table and compares the
//! predicted observable flips with the actual ones. Trial `t` always draws
//! its faults from `trial_rng(base_seed, t)`, so counts do not depend on how
//! trials are split across threads.

use crate::circuit::{sample_faults, trial_rng, Fault, NoiseModel};
use crate::decoding::LookupTable;
use crate::geometry::{build_color_patch, Basis, SideLabel};
use crate::sim::{FrameSim, Parity};
use crate::surgery::{
    expected_bell_attempts, inject_state, logical_cnot, logical_identity, measure_logical_destructive, merged_measurement, prepare_logical,
    sample_bell_attempts, transversal_hadamard, transversal_phase, CnotMode, Extraction, InjectionInput, LogicalInput, SurgerySchedule,
};
use crate::{check_distance, Bits, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Protocols that can be sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Protocol {
    /// Bell-paired patch held for `rounds` extraction rounds.
    Memory,
    Prepare(Basis),
    /// Destructive readout of an encoded eigenstate of `basis`.
    Measure(Basis),
    Hadamard,
    Phase,
    /// `XX` merge across the right side or `ZZ` across the bottom.
    Merge(Basis),
    Cnot(CnotMode),
    Inject(InjectionInput),
}

impl Protocol {
    pub const ALL: [Protocol; 16] = [
        Protocol::Memory,
        Protocol::Prepare(Basis::Z),
        Protocol::Prepare(Basis::X),
        Protocol::Measure(Basis::Z),
        Protocol::Measure(Basis::X),
        Protocol::Hadamard,
        Protocol::Phase,
        Protocol::Merge(Basis::X),
        Protocol::Merge(Basis::Z),
        Protocol::Cnot(CnotMode::Accelerated),
        Protocol::Cnot(CnotMode::SevenStep),
        Protocol::Cnot(CnotMode::Horsman),
        Protocol::Inject(InjectionInput::Zero),
        Protocol::Inject(InjectionInput::Plus),
        Protocol::Inject(InjectionInput::SPlus),
        Protocol::Inject(InjectionInput::SymbolicT),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Memory => "memory",
            Protocol::Prepare(Basis::Z) => "prepare_zero",
            Protocol::Prepare(Basis::X) => "prepare_plus",
            Protocol::Measure(Basis::Z) => "measure_z",
            Protocol::Measure(Basis::X) => "measure_x",
            Protocol::Hadamard => "hadamard",
            Protocol::Phase => "phase",
            Protocol::Merge(Basis::X) => "merge_xx",
            Protocol::Merge(Basis::Z) => "merge_zz",
            Protocol::Cnot(m) => m.name(),
            Protocol::Inject(InjectionInput::Zero) => "inject_zero",
            Protocol::Inject(InjectionInput::Plus) => "inject_plus",
            Protocol::Inject(InjectionInput::SPlus) => "inject_s_plus",
            Protocol::Inject(InjectionInput::SymbolicT) => "inject_t",
        }
    }

    /// Whether `rounds` changes the schedule.
    pub fn takes_rounds(self) -> bool {
        matches!(self, Protocol::Memory | Protocol::Merge(_))
    }

    /// Noisy schedule at distance `d`; `rounds` defaults to `d`.
    pub fn schedule(self, d: usize, rounds: Option<usize>, ext: Extraction) -> Result<SurgerySchedule> {
        check_distance(d as i64)?;
        let rounds = rounds.unwrap_or(d);
        let patch = || build_color_patch(d as i64);
        Ok(match self {
            Protocol::Memory => logical_identity(&patch()?, rounds, ext)?,
            Protocol::Prepare(b) => prepare_logical(&patch()?, b, ext)?,
            Protocol::Measure(b) => {
                let input = if b == Basis::Z { LogicalInput::Zero } else { LogicalInput::Plus };
                measure_logical_destructive(&patch()?, b, input, ext)?.schedule
            }
            Protocol::Hadamard => transversal_hadamard(&patch()?, LogicalInput::Bell, ext)?,
            Protocol::Phase => transversal_phase(&patch()?, LogicalInput::Bell, ext)?,
            Protocol::Merge(b) => {
                let side = if b == Basis::X { SideLabel::Right } else { SideLabel::Bottom };
                merged_measurement(&patch()?, side, b, rounds, ext)?.schedule
            }
            Protocol::Cnot(m) => logical_cnot(d, m, ext)?.schedule,
            Protocol::Inject(i) => inject_state(d, i, ext)?.schedule,
        })
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        if key == "cnot" {
            return Ok(Protocol::Cnot(CnotMode::Accelerated));
        }
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown protocol {s:?}")))
    }
}

impl From<Protocol> for String {
    fn from(p: Protocol) -> String {
        p.name().to_string()
    }
}

impl TryFrom<String> for Protocol {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// One estimation point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub protocol: Protocol,
    pub d: usize,
    pub p: f64,
    /// Extraction rounds for protocols that take them; `None` means `d`.
    pub rounds: Option<usize>,
    pub trials: u64,
    pub base_seed: u64,
    /// Lookup decoder order (1 or 2).
    #[serde(default = "default_order")]
    pub decoder_order: usize,
    /// Discard every trial with a nonzero detector event.
    #[serde(default)]
    pub postselect: bool,
}

fn default_order() -> usize {
    1
}

impl Campaign {
    pub fn new(protocol: Protocol, d: usize, p: f64, trials: u64, base_seed: u64) -> Self {
        Campaign {
            protocol,
            d,
            p,
            rounds: None,
            trials,
            base_seed,
            decoder_order: 1,
            postselect: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_distance(self.d as i64)?;
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p) || self.p.is_nan() {
            return Err(Error::Probability(self.p));
        }
        if !(1..=2).contains(&self.decoder_order) {
            return Err(Error::Invalid(format!("decoder order must be 1 or 2, got {}", self.decoder_order)));
        }
        Ok(())
    }

    /// Rounds column of the CSV: the requested rounds, or the schedule depth
    /// for protocols with a fixed length.
    fn rounds_label(&self, s: &SurgerySchedule) -> usize {
        if self.protocol.takes_rounds() {
            self.rounds.unwrap_or(self.d)
        } else {
            s.total_depth
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignResult {
    pub campaign: Campaign,
    pub rounds: usize,
    /// Trials kept (all of them unless post-selecting).
    pub accepted: u64,
    pub failures: u64,
    pub p_fail: f64,
    pub ci: (f64, f64),
}

pub const CSV_HEADER: &str = "protocol,d,p,rounds,trials,failures,p_fail,ci_lo,ci_hi,seed";

impl CampaignResult {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.campaign.trials as f64
    }

    /// CSV row; `trials` counts accepted trials.
    pub fn csv_row(&self) -> String {
        let c = &self.campaign;
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{}",
            c.protocol, c.d, c.p, self.rounds, self.accepted, self.failures, self.p_fail, self.ci.0, self.ci.1, c.base_seed
        )
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let ph = failures as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = Z * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// A schedule with its decoder, reusable across error rates.
pub struct Prepared {
    pub protocol: Protocol,
    pub d: usize,
    pub rounds: Option<usize>,
    pub schedule: SurgerySchedule,
    pub table: LookupTable,
    observables: Vec<Parity>,
}

impl Prepared {
    pub fn new(protocol: Protocol, d: usize, rounds: Option<usize>, decoder_order: usize) -> Result<Prepared> {
        let schedule = protocol.schedule(d, rounds, Extraction::default())?;
        let table = schedule.lookup(decoder_order)?;
        let observables = schedule.observable_parities();
        Ok(Prepared {
            protocol,
            d,
            rounds,
            schedule,
            table,
            observables,
        })
    }

    pub fn run(&self, c: &Campaign) -> Result<CampaignResult> {
        c.validate()?;
        if c.protocol != self.protocol || c.d != self.d || c.rounds != self.rounds || c.decoder_order != self.table.built_order as usize {
            return Err(Error::Invalid("campaign does not match the prepared schedule".into()));
        }
        let sim = FrameSim::new(&self.schedule.circuit);
        let n_batches = c.trials.div_ceil(64);
        let (failures, accepted) = (0..n_batches)
            .into_par_iter()
            .map(|b| {
                let start = b * 64;
                let lanes = (c.trials - start).min(64) as usize;
                self.batch(&sim, c, start, lanes)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let p_fail = if accepted == 0 { 0.0 } else { failures as f64 / accepted as f64 };
        Ok(CampaignResult {
            campaign: c.clone(),
            rounds: c.rounds_label(&self.schedule),
            accepted,
            failures,
            p_fail,
            ci: wilson_interval(failures, accepted),
        })
    }

    /// Trials `start..start + lanes`; returns (failures, accepted).
    fn batch(&self, sim: &FrameSim, c: &Campaign, start: u64, lanes: usize) -> (u64, u64) {
        let mut events: Vec<(Fault, usize)> = Vec::new();
        let mut buf = Vec::new();
        let mut active = 0u64;
        for lane in 0..lanes {
            let mut rng = trial_rng(c.base_seed, start + lane as u64);
            sample_faults(sim.locations(), c.p, &mut rng, &mut buf);
            if !buf.is_empty() {
                active |= 1 << lane;
            }
            events.extend(buf.drain(..).map(|f| (f, lane)));
        }
        if active == 0 {
            return (0, lanes as u64);
        }
        events.sort_by_key(|(f, lane)| (f.loc, *lane));
        let out = sim.run(&events);
        let word = |p: &Parity| p.meas.iter().fold(0u64, |w, &m| w ^ out.flips[m]);
        let det: Vec<u64> = self.schedule.analysis.detectors.iter().map(word).collect();
        let obs: Vec<u64> = self.observables.iter().map(word).collect();
        let (mut failures, mut accepted) = (0u64, lanes as u64);
        for lane in 0..lanes {
            if (active >> lane) & 1 == 0 {
                continue;
            }
            let lane_bits = |ws: &[u64]| Bits::from_bools(&ws.iter().map(|w| (w >> lane) & 1 == 1).collect::<Vec<_>>());
            let sig = lane_bits(&det);
            if c.postselect && !sig.is_zero() {
                accepted -= 1;
                continue;
            }
            if self.table.decode(&sig).observables != lane_bits(&obs) {
                failures += 1;
            }
        }
        (failures, accepted)
    }
}

/// Build the schedule and decoder, then sample.
pub fn run_campaign(c: &Campaign) -> Result<CampaignResult> {
    c.validate()?;
    Prepared::new(c.protocol, c.d, c.rounds, c.decoder_order)?.run(c)
}

/// Least-squares fit of `p_fail = A p^k` in log-log space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Points used in the fit.
    pub points: Vec<(f64, f64)>,
    /// Zero-failure points left out.
    pub excluded: Vec<(f64, f64)>,
    pub exponent: f64,
    /// Standard error of the exponent (zero for exactly collinear points).
    pub exponent_stderr: f64,
    pub prefactor: f64,
    /// `ln p_fail − (ln A + k ln p)` per used point.
    pub residuals: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ScalingFit {
    /// Leading-order exponent for distance `d`.
    pub fn expected_exponent(d: usize) -> f64 {
        (d as f64 + 1.0) / 2.0
    }

    pub fn matches_distance(&self, d: usize, tolerance: f64) -> bool {
        (self.exponent - Self::expected_exponent(d)).abs() <= tolerance
    }
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    let mut warnings = Vec::new();
    for &(p, pf) in points {
        if !(p > 0.0) {
            return Err(Error::Invalid(format!("scaling fit needs p > 0, got {p}")));
        }
        if pf > 0.0 {
            used.push((p, pf));
        } else {
            warnings.push(format!("excluded zero-failure point p = {p}"));
            excluded.push((p, pf));
        }
    }
    if used.len() < 3 {
        return Err(Error::Invalid(format!(
            "scaling fit needs at least 3 points with failures, got {}",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|(p, _)| p.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|(_, f)| f.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("scaling fit needs distinct p values".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let k = sxy / sxx;
    let ln_a = my - k * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (ln_a + k * x)).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let stderr = if used.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(ScalingFit {
        points: used,
        excluded,
        exponent: k,
        exponent_stderr: stderr,
        prefactor: ln_a.exp(),
        residuals,
        warnings,
    })
}

/// CSV for a list of results, with the fit (if any) as `#` footer lines.
pub fn results_csv(results: &[CampaignResult], fit: Option<&ScalingFit>) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in results {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    for r in results.iter().filter(|r| r.campaign.postselect) {
        s.push_str(&format!(
            "# postselected {} d={} p={}: accepted {} of {} ({:.6})\n",
            r.campaign.protocol,
            r.campaign.d,
            r.campaign.p,
            r.accepted,
            r.campaign.trials,
            r.acceptance_rate()
        ));
    }
    if let Some(f) = fit {
        s.push_str(&format!(
            "# fit p_fail = A p^k: k = {:.4} +/- {:.4}, A = {:.6e}\n",
            f.exponent, f.exponent_stderr, f.prefactor
        ));
        for w in &f.warnings {
            s.push_str(&format!("# warning: {w}\n"));
        }
    }
    s
}

/// Sample mean and standard error of the Bell-pair waiting time (attempts
/// until every heralding location succeeds).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellWait {
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub expected: f64,
}

impl BellWait {
    /// Distance of the sample mean from the expectation, in standard errors.
    pub fn sigmas(&self) -> f64 {
        (self.mean - self.expected).abs() / self.stderr
    }
}

pub fn bell_wait(d: usize, p: f64, trials: u64, base_seed: u64) -> Result<BellWait> {
    NoiseModel::new(p)?;
    if trials < 2 {
        return Err(Error::Invalid("bell_wait needs at least 2 trials".into()));
    }
    const BLOCK: u64 = 4096;
    let (sum, sq) = (0..trials.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = trial_rng(base_seed, b);
            let n = BLOCK.min(trials - b * BLOCK);
            (0..n).fold((0u64, 0u64), |(s, q), _| {
                let k = sample_bell_attempts(d, p, &mut rng);
                (s + k, q + k * k)
            })
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = (sq as f64 - n * mean * mean) / (n - 1.0);
    Ok(BellWait {
        trials,
        mean,
        stderr: (var / n).sqrt(),
        expected: expected_bell_attempts(d, p),
    })
}
