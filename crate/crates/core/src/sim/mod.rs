//! Stabilizer simulation of circuits.

pub mod analysis;
pub mod frame;
pub mod tableau;

pub use analysis::{Analysis, Parity};
pub use frame::{FrameOutput, FrameSim, PauliFrame};
pub use tableau::{Form, Outcome, Sign, Tableau};

use crate::circuit::{noise_locations, pauli_code_bits, Circuit, CircuitOp, Fault, LocKind, OpKind};
use crate::pauli::{LogicalPair, Pauli, PauliOp};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// Apply one op; returns the outcome for measurements.
pub(crate) fn apply_op<S: Sign>(t: &mut Tableau<S>, c: &Circuit, op: &CircuitOp, random: &mut dyn FnMut() -> S) -> Result<Option<S>> {
    let [a, b] = op.targets;
    let n = t.n();
    match op.kind {
        OpKind::PrepZ => t.prep_z(a)?,
        OpKind::PrepX => t.prep_x(a)?,
        OpKind::MeasZ => return Ok(Some(t.measure(&PauliOp::single(n, a, Pauli::Z), random)?.bit)),
        OpKind::MeasX => return Ok(Some(t.measure(&PauliOp::single(n, a, Pauli::X), random)?.bit)),
        OpKind::MeasPauli => {
            let p = c
                .paulis
                .get(op.pauli)
                .ok_or_else(|| Error::Invalid(format!("missing Pauli operand {}", op.pauli)))?;
            return Ok(Some(t.measure(p, random)?.bit));
        }
        OpKind::Cnot => t.cnot(a, b)?,
        OpKind::H => t.h(a)?,
        OpKind::S => t.s(a)?,
        OpKind::SDagger => t.s_dagger(a)?,
        OpKind::Idle => {}
    }
    Ok(None)
}

/// Time-ordered measurement outcomes (`true` = eigenvalue −1).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MeasurementRecord {
    pub time_steps: Vec<usize>,
    pub op_indices: Vec<usize>,
    pub bits: Vec<bool>,
}

const RECORD_MAGIC: &[u8; 4] = b"CSMR";

impl MeasurementRecord {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn push(&mut self, time: usize, op: usize, bit: bool) {
        self.time_steps.push(time);
        self.op_indices.push(op);
        self.bits.push(bit);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time_step,op_index,bit\n");
        for i in 0..self.len() {
            let _ = writeln!(s, "{},{},{}", self.time_steps[i], self.op_indices[i], self.bits[i] as u8);
        }
        s
    }

    /// Magic, little-endian `u64` count, then `(u32 time, u32 op, u8 bit)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 9 * self.len());
        out.extend_from_slice(RECORD_MAGIC);
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for i in 0..self.len() {
            out.extend_from_slice(&(self.time_steps[i] as u32).to_le_bytes());
            out.extend_from_slice(&(self.op_indices[i] as u32).to_le_bytes());
            out.push(self.bits[i] as u8);
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let bad = || Error::Parse("malformed measurement record".into());
        if b.len() < 12 || &b[..4] != RECORD_MAGIC {
            return Err(bad());
        }
        let n = u64::from_le_bytes(b[4..12].try_into().unwrap()) as usize;
        if b.len() != 12 + 9 * n {
            return Err(bad());
        }
        let mut r = MeasurementRecord::default();
        for i in 0..n {
            let e = &b[12 + 9 * i..21 + 9 * i];
            let t = u32::from_le_bytes(e[0..4].try_into().unwrap()) as usize;
            let o = u32::from_le_bytes(e[4..8].try_into().unwrap()) as usize;
            if e[8] > 1 {
                return Err(bad());
            }
            r.push(t, o, e[8] == 1);
        }
        Ok(r)
    }
}

/// Noiseless run.
pub fn run(c: &Circuit, seed: u64) -> Result<MeasurementRecord> {
    run_with_faults(c, seed, &[]).map(|(r, _)| r)
}

/// Run with the given faults inserted (sorted by location, as produced by
/// sampling). Returns the record and the final tableau.
pub fn run_with_faults(c: &Circuit, seed: u64, faults: &[Fault]) -> Result<(MeasurementRecord, Tableau)> {
    run_with_feedback(c, seed, faults, usize::MAX, |_| None)
}

/// Like [`run_with_faults`], but just before the first op at time step
/// `at` the record so far is shown to `feedback`, and any Pauli it returns
/// is applied to the state. Coin draws are unaffected, so a run with a
/// physical correction can be compared seed for seed with a frame-tracked one.
pub fn run_with_feedback(
    c: &Circuit,
    seed: u64,
    faults: &[Fault],
    at: usize,
    mut feedback: impl FnMut(&[bool]) -> Option<PauliOp>,
) -> Result<(MeasurementRecord, Tableau)> {
    c.validate()?;
    let locs = if faults.is_empty() { Vec::new() } else { noise_locations(c) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t: Tableau = Tableau::new(c.n_qubits);
    let mut rec = MeasurementRecord::default();
    let mut fi = 0;
    let mut fed = false;
    for (i, op) in c.ops.iter().enumerate() {
        if !fed && op.time_step >= at {
            fed = true;
            if let Some(p) = feedback(&rec.bits) {
                t.apply_pauli(&p)?;
            }
        }
        let mut coin = || rng.gen::<bool>();
        if let Some(bit) = apply_op(&mut t, c, op, &mut coin)? {
            rec.push(op.time_step, i, bit);
        }
        while fi < faults.len() && locs.get(faults[fi].loc).is_some_and(|l| l.op == i) {
            let f = faults[fi];
            let n = c.n_qubits;
            let mut p = PauliOp::identity(n);
            match locs[f.loc].kind {
                LocKind::One(q) => {
                    let (x, z) = pauli_code_bits(f.pauli);
                    p.set(q, Pauli::from_bits(x, z));
                }
                LocKind::Two(q0, q1) => {
                    let (x, z) = pauli_code_bits(f.pauli & 3);
                    p.set(q0, Pauli::from_bits(x, z));
                    let (x, z) = pauli_code_bits(f.pauli >> 2);
                    p.set(q1, Pauli::from_bits(x, z));
                }
                LocKind::Flip(m) => rec.bits[m] ^= true,
            }
            t.apply_pauli(&p)?;
            fi += 1;
        }
    }
    if fi != faults.len() {
        return Err(Error::Invalid("faults not sorted by location or out of range".into()));
    }
    Ok((rec, t))
}

/// Measure `p` on `t`, drawing a random outcome from `rng` when undetermined.
pub fn measure_joint<R: Rng + ?Sized>(t: &mut Tableau, p: &PauliOp, rng: &mut R) -> Result<bool> {
    let mut coin = || rng.gen::<bool>();
    Ok(t.measure(p, &mut coin)?.bit)
}

/// Deterministic logical eigenvalues (`Some(false)` = +1); `None` where the
/// logical operator is not fixed by the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogicalReadout {
    pub z: Option<bool>,
    pub x: Option<bool>,
}

/// Logical operators on fewer qubits than the tableau act on its leading qubits.
pub fn logical_state_readout(t: &Tableau, lp: &LogicalPair) -> LogicalReadout {
    let fit = |p: &PauliOp| -> Option<PauliOp> {
        match p.n().cmp(&t.n()) {
            std::cmp::Ordering::Equal => Some(p.clone()),
            std::cmp::Ordering::Less => Some(p.remap(t.n(), |q| q)),
            std::cmp::Ordering::Greater => None,
        }
    };
    LogicalReadout {
        z: fit(&lp.logical_z).and_then(|p| t.expectation(&p)),
        x: fit(&lp.logical_x).and_then(|p| t.expectation(&p)),
    }
}
