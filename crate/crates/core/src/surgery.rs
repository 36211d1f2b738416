//! Logical-gate protocols as circuits over patches.
//!
//! Every protocol circuit has three parts: an ideal preamble that encodes the
//! logical inputs (optionally Bell-paired with noiseless reference qubits),
//! the noisy schedule proper, and an ideal postamble that measures every
//! final check once and then the requested logical operators. Observables
//! are those final logical measurements, completed by whichever earlier
//! outcomes (merge results, destructive readouts, random check signs) make
//! them deterministic in the noiseless circuit; that completion is exactly
//! the Pauli-frame reinterpretation of the byproducts.

use crate::circuit::{emit_round_with, plan_round, Allocation, Circuit, CircuitBuilder, Interleaving, OpKind, QubitRole, RoundPlan};
use crate::decoding::{build_lookup, LookupTable, SyndromeHistory};
use crate::geometry::{
    cnot_layout, injection_layout, Basis, Check, CnotLayout, CodeFamily, InjectionLayout, MergeGeometry, Patch, PatchRole, Point,
};
use crate::pauli::{Pauli, PauliOp};
use crate::sim::{Analysis, Parity};
use crate::{Bits, Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::HashMap;

/// How syndrome extraction circuits are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub allocation: Allocation,
    pub interleaving: Interleaving,
}

impl Default for Extraction {
    fn default() -> Self {
        Extraction {
            allocation: Allocation::OnePerCheck,
            interleaving: Interleaving::DEFAULT,
        }
    }
}

impl Extraction {
    pub fn one_per_face() -> Self {
        Extraction {
            allocation: Allocation::OnePerFace,
            interleaving: Interleaving::DEFAULT,
        }
    }
}

/// Logical input of one patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LogicalInput {
    Zero,
    One,
    Plus,
    Minus,
    /// Maximally entangled with a noiseless reference qubit.
    Bell,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub label: String,
    pub rounds: usize,
    pub decode: bool,
    /// Time steps `[start, end)` in the full circuit.
    pub start: usize,
    pub end: usize,
    #[serde(skip)]
    pub checks: Vec<Check>,
    /// Measurement index of every check, per round.
    #[serde(skip)]
    pub round_meas: Vec<Vec<usize>>,
}

/// A named logical observable: the ideal final measurement of `pauli`
/// and the parity set that makes it deterministic.
#[derive(Clone, Debug)]
pub struct Observable {
    pub label: String,
    pub pauli: PauliOp,
    pub meas: usize,
    pub parity: Parity,
}

#[derive(Clone, Debug)]
pub struct SurgerySchedule {
    pub name: String,
    pub d: usize,
    pub stages: Vec<Stage>,
    /// Extraction rounds plus data preparation/measurement rounds.
    pub total_depth: usize,
    pub circuit: Circuit,
    pub analysis: Analysis,
    pub observables: Vec<Observable>,
    /// Reference qubit per Bell input, in register order.
    pub references: Vec<usize>,
    /// Time step at which the noisy part starts and ends.
    pub noisy_start: usize,
    pub noisy_end: usize,
    /// Ideal closing check round, in the order of the final checks.
    pub final_meas: Vec<usize>,
}

impl SurgerySchedule {
    pub fn observable(&self, label: &str) -> Option<&Observable> {
        self.observables.iter().find(|o| o.label == label)
    }

    /// Observable values (`true` = differs from the noiseless value) for a
    /// measurement record.
    pub fn observable_errors(&self, bits: &[bool]) -> Vec<bool> {
        self.observables
            .iter()
            .map(|o| o.parity.meas.iter().fold(o.parity.expected, |a, &m| a ^ bits[m]))
            .collect()
    }

    /// Logical eigenvalue bits (`true` = −1) read through the frame.
    pub fn observable_values(&self, bits: &[bool]) -> Vec<bool> {
        self.observables
            .iter()
            .map(|o| o.parity.meas.iter().fold(false, |a, &m| a ^ bits[m]))
            .collect()
    }

    /// Sub-circuit of one stage (ops within its time window).
    pub fn stage_circuit(&self, i: usize) -> Circuit {
        let st = &self.stages[i];
        let mut c = Circuit {
            n_qubits: self.circuit.n_qubits,
            roles: self.circuit.roles.clone(),
            paulis: self.circuit.paulis.clone(),
            ..Circuit::default()
        };
        c.ops = self
            .circuit
            .ops
            .iter()
            .filter(|o| (st.start..st.end).contains(&o.time_step))
            .copied()
            .collect();
        c.n_measurements = c.ops.iter().filter(|o| o.kind.is_measurement()).count();
        c.round_boundaries = self
            .circuit
            .round_boundaries
            .iter()
            .copied()
            .filter(|t| (st.start..st.end).contains(t))
            .collect();
        c
    }

    pub fn observable_parities(&self) -> Vec<Parity> {
        self.observables.iter().map(|o| o.parity.clone()).collect()
    }

    /// Circuit-level lookup decoder over this schedule's detectors and
    /// observables. Detectors closing a round of the first extraction stage
    /// (or of the ideal closing round, when it repeats that stage's checks)
    /// carry their history position.
    pub fn lookup(&self, order: usize) -> Result<LookupTable> {
        let mut lt = build_lookup(&self.circuit, order, &self.analysis.detectors, &self.observable_parities())?;
        lt.history_layout = self.history_layout();
        Ok(lt)
    }

    fn history_stage(&self) -> Option<&Stage> {
        self.stages.iter().find(|s| !s.round_meas.is_empty())
    }

    fn history_rows(&self) -> Vec<Vec<usize>> {
        let Some(st) = self.history_stage() else {
            return Vec::new();
        };
        let mut rows = st.round_meas.clone();
        if self.final_meas.len() == st.checks.len() {
            rows.push(self.final_meas.clone());
        }
        rows
    }

    pub fn history_layout(&self) -> Vec<Option<(usize, usize)>> {
        let mut at = HashMap::new();
        for (r, row) in self.history_rows().iter().enumerate() {
            for (k, &m) in row.iter().enumerate() {
                at.insert(m, (r, k));
            }
        }
        self.analysis
            .detectors
            .iter()
            .map(|d| d.meas.last().and_then(|m| at.get(m).copied()))
            .collect()
    }

    /// Check outcomes of the history stage, offset so that round 0 reads
    /// zero in the absence of faults and later rounds differ from their
    /// predecessor exactly where a detector fires.
    pub fn syndrome_history(&self, bits: &[bool]) -> SyndromeHistory {
        let rows = self.history_rows();
        let layout = self.history_layout();
        let width = rows.first().map_or(0, |r| r.len());
        let mut offset = vec![None; width];
        for (d, l) in self.analysis.detectors.iter().zip(&layout) {
            if let Some((0, k)) = *l {
                let last = *d.meas.last().unwrap();
                offset[k] = Some(d.meas.iter().filter(|&&m| m != last).fold(d.expected, |a, &m| a ^ bits[m]));
            }
        }
        let first = rows.first().cloned().unwrap_or_default();
        SyndromeHistory {
            rounds: rows
                .iter()
                .map(|row| {
                    let v: Vec<bool> = row
                        .iter()
                        .enumerate()
                        .map(|(k, &m)| bits[m] ^ offset[k].unwrap_or(bits[first[k]]))
                        .collect();
                    Bits::from_bools(&v)
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "protocol": self.name,
            "d": self.d,
            "total_depth": self.total_depth,
            "stages": self.stages.iter().map(|s| json!({
                "label": s.label,
                "rounds": s.rounds,
                "decode": s.decode,
                "start": s.start,
                "end": s.end,
                "checks": s.checks.len(),
            })).collect::<Vec<_>>(),
            "observables": self.observables.iter().map(|o| json!({
                "label": o.label,
                "measurements": o.parity.meas,
                "expected": o.parity.expected,
            })).collect::<Vec<_>>(),
            "qubits": self.circuit.n_qubits,
            "measurements": self.circuit.n_measurements,
        })
    }
}

/// Data qubits of one logical patch in global indexing.
#[derive(Clone, Debug)]
pub(crate) struct Register {
    pub offset: usize,
    pub patch: Patch,
}

impl Register {
    fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.patch.n()).map(move |q| q + self.offset)
    }

    fn checks(&self) -> Vec<Check> {
        self.patch
            .checks()
            .into_iter()
            .map(|c| Check {
                support: c.support.iter().map(|v| v + self.offset).collect(),
                ..c
            })
            .collect()
    }

    fn logical(&self, b: Basis, n: usize) -> PauliOp {
        let supp: &[usize] = match b {
            Basis::X => &self.patch.logical_x,
            Basis::Z => &self.patch.logical_z,
        };
        b.op(n, supp.iter().map(|v| v + self.offset))
    }
}

pub(crate) struct ProtocolBuilder {
    pub b: CircuitBuilder,
    pub ext: Extraction,
    pub positions: Vec<Point>,
    pub stages: Vec<Stage>,
    pub references: Vec<usize>,
    pub depth: usize,
    noisy_start: usize,
    logicals: Vec<(String, PauliOp)>,
    // latest measurement of each check operator, for round-difference detectors
    last: HashMap<(Basis, Vec<usize>), usize>,
    hints: HashMap<usize, usize>,
}

impl ProtocolBuilder {
    pub fn new(positions: Vec<Point>, ext: Extraction) -> Self {
        ProtocolBuilder {
            b: CircuitBuilder::new(positions.len()),
            ext,
            positions,
            stages: Vec::new(),
            references: Vec::new(),
            depth: 0,
            noisy_start: 0,
            logicals: Vec::new(),
            last: HashMap::new(),
            hints: HashMap::new(),
        }
    }

    fn note_check(&mut self, c: &Check, m: usize) {
        let mut supp = c.support.clone();
        supp.sort_unstable();
        if let Some(prev) = self.last.insert((c.basis, supp), m) {
            self.hints.insert(m, prev);
        }
    }

    fn measure_check(&mut self, c: &Check) -> usize {
        let n = self.n();
        let m = self.measure_ideal(&c.op(n));
        self.note_check(c, m);
        m
    }

    fn n(&self) -> usize {
        self.b.circuit().n_qubits
    }

    fn ideal_each(&mut self, kind: OpKind, qs: impl IntoIterator<Item = usize>) {
        let ops: Vec<_> = qs.into_iter().map(|q| (kind, q, 0)).collect();
        if !ops.is_empty() {
            self.b.ideal_layer(&ops);
        }
    }

    fn measure_ideal(&mut self, p: &PauliOp) -> usize {
        self.b.measure_pauli(p)
    }

    /// Ideal encoding of one register. Returns the reference qubit for `Bell`.
    pub fn encode(&mut self, reg: &Register, input: LogicalInput) -> Option<usize> {
        let checks = reg.checks();
        let plus = matches!(input, LogicalInput::Plus | LogicalInput::Minus);
        if plus {
            self.ideal_each(OpKind::PrepX, reg.qubits());
        }
        let fix = if plus { Basis::Z } else { Basis::X };
        for c in checks.iter().filter(|c| c.basis == fix) {
            self.measure_check(c);
        }
        match input {
            LogicalInput::One => {
                // X = H S S H
                let supp: Vec<usize> = reg.patch.logical_x.iter().map(|v| v + reg.offset).collect();
                for k in [OpKind::H, OpKind::S, OpKind::S, OpKind::H] {
                    self.ideal_each(k, supp.iter().copied());
                }
                None
            }
            LogicalInput::Minus => {
                let supp: Vec<usize> = reg.patch.logical_z.iter().map(|v| v + reg.offset).collect();
                self.ideal_each(OpKind::S, supp.iter().copied());
                self.ideal_each(OpKind::S, supp);
                None
            }
            LogicalInput::Bell => {
                let r = self.b.add_qubit(QubitRole::Reference);
                let n = self.n();
                let mut p = reg.logical(Basis::X, n);
                p.set(r, Pauli::X);
                self.measure_ideal(&p);
                self.references.push(r);
                Some(r)
            }
            _ => None,
        }
    }

    pub fn start_noisy(&mut self) {
        self.noisy_start = self.b.time();
    }

    fn plan(&self, checks: &[Check]) -> RoundPlan {
        plan_round(checks, &self.positions, self.ext.allocation, &self.ext.interleaving)
    }

    /// `rounds` extraction rounds of `checks`; `first` shares the first
    /// round's opening time step. Returns the measurements of `first`.
    pub fn stage(&mut self, label: &str, checks: Vec<Check>, rounds: usize, first: &[(OpKind, usize, usize)]) -> Vec<usize> {
        let plan = self.plan(&checks);
        let start = self.b.time();
        let mut round_meas = Vec::new();
        let mut extra_meas = Vec::new();
        for r in 0..rounds {
            let extra = if r == 0 { first } else { &[] };
            let (m, e) = emit_round_with(&mut self.b, &plan, extra);
            for (c, &mi) in checks.iter().zip(&m) {
                self.note_check(c, mi);
            }
            round_meas.push(m);
            if r == 0 {
                extra_meas = e;
            }
        }
        if rounds == 0 && !first.is_empty() {
            extra_meas = self.b.layer(first);
        }
        self.depth += rounds;
        self.stages.push(Stage {
            label: label.to_string(),
            rounds,
            decode: rounds > 0,
            start,
            end: self.b.time(),
            checks,
            round_meas,
        });
        extra_meas
    }

    /// A single-step stage (data preparation, destructive measurement or a
    /// transversal layer) counted as `depth` rounds.
    pub fn layer_stage(&mut self, label: &str, ops: &[(OpKind, usize, usize)], depth: usize) -> Vec<usize> {
        let start = self.b.time();
        let m = self.b.layer(ops);
        self.depth += depth;
        self.stages.push(Stage {
            label: label.to_string(),
            rounds: depth,
            decode: false,
            start,
            end: self.b.time(),
            checks: Vec::new(),
            round_meas: Vec::new(),
        });
        m
    }

    pub fn add_logical(&mut self, label: &str, p: PauliOp) {
        self.logicals.push((label.to_string(), p));
    }

    /// Ideal final check round, then the logical measurements.
    pub fn finish(mut self, name: &str, d: usize, final_checks: &[Check]) -> Result<SurgerySchedule> {
        let noisy_end = self.b.time();
        self.stages.push(Stage {
            label: "decode".into(),
            rounds: 0,
            decode: true,
            start: noisy_end,
            end: noisy_end,
            checks: Vec::new(),
            round_meas: Vec::new(),
        });
        let final_meas: Vec<usize> = final_checks.iter().map(|c| self.measure_check(c)).collect();
        let mut pending = Vec::new();
        for (label, p) in std::mem::take(&mut self.logicals) {
            let n = self.n();
            let p = p.remap(n, |q| q);
            let m = self.measure_ideal(&p);
            pending.push((label, p, m));
        }
        let circuit = self.b.finish();
        let mut analysis = Analysis::with_hints(&circuit, &self.hints)?;
        // logical readouts are observables, never syndrome
        let logical_meas: Vec<usize> = pending.iter().map(|(_, _, m)| *m).collect();
        analysis.detectors.retain(|d| !d.meas.iter().any(|m| logical_meas.contains(m)));
        let mut observables = Vec::new();
        for (label, pauli, meas) in pending {
            if analysis.is_random(meas) {
                return Err(Error::Invalid(format!("{name}: logical {label} is not determined by the protocol")));
            }
            let parity = analysis.deterministic_set(&[meas])?;
            observables.push(Observable {
                label,
                pauli,
                meas,
                parity,
            });
        }
        Ok(SurgerySchedule {
            name: name.to_string(),
            d,
            stages: self.stages,
            total_depth: self.depth,
            circuit,
            analysis,
            observables,
            references: self.references,
            noisy_start: self.noisy_start,
            noisy_end,
            final_meas,
        })
    }
}

fn with_ref(mut p: PauliOp, r: usize, b: Basis, n: usize) -> PauliOp {
    p = p.remap(n, |q| q);
    p.set(
        r,
        match b {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        },
    );
    p
}

fn single_register(patch: &Patch) -> Register {
    Register {
        offset: 0,
        patch: patch.clone(),
    }
}

/// Logicals read out for a single-patch input: both Bell correlators, or the
/// input's own basis.
fn readout_for(pb: &mut ProtocolBuilder, reg: &Register, input: LogicalInput, r: Option<usize>, map: impl Fn(Basis) -> Basis) {
    let n = pb.n();
    match (input, r) {
        (LogicalInput::Bell, Some(r)) => {
            for b in [Basis::X, Basis::Z] {
                let p = with_ref(reg.logical(map(b), n), r, b, n);
                pb.add_logical(if b == Basis::X { "X" } else { "Z" }, p);
            }
        }
        _ => {
            let b = map(if matches!(input, LogicalInput::Zero | LogicalInput::One) {
                Basis::Z
            } else {
                Basis::X
            });
            pb.add_logical(if b == Basis::X { "X" } else { "Z" }, reg.logical(b, n));
        }
    }
}

/// `rounds` rounds of syndrome extraction on an encoded patch.
pub fn logical_identity(patch: &Patch, rounds: usize, ext: Extraction) -> Result<SurgerySchedule> {
    logical_identity_with(patch, rounds, ext, LogicalInput::Bell)
}

pub fn logical_identity_with(patch: &Patch, rounds: usize, ext: Extraction, input: LogicalInput) -> Result<SurgerySchedule> {
    let reg = single_register(patch);
    let mut pb = ProtocolBuilder::new(patch.positions(), ext);
    let r = pb.encode(&reg, input);
    pb.start_noisy();
    pb.stage("memory", reg.checks(), rounds, &[]);
    readout_for(&mut pb, &reg, input, r, |b| b);
    pb.finish("identity", patch.distance, &reg.checks())
}

/// Physical preparation of every data qubit (in the first round's opening
/// step) followed by `d` extraction rounds.
pub fn prepare_logical(patch: &Patch, basis: Basis, ext: Extraction) -> Result<SurgerySchedule> {
    let reg = single_register(patch);
    let mut pb = ProtocolBuilder::new(patch.positions(), ext);
    pb.start_noisy();
    let kind = match basis {
        Basis::Z => OpKind::PrepZ,
        Basis::X => OpKind::PrepX,
    };
    let prep: Vec<_> = reg.qubits().map(|q| (kind, q, 0)).collect();
    pb.stage("prepare", reg.checks(), patch.distance, &prep);
    let n = pb.n();
    pb.add_logical(if basis == Basis::X { "X" } else { "Z" }, reg.logical(basis, n));
    pb.finish(
        if basis == Basis::X { "prepare_plus" } else { "prepare_zero" },
        patch.distance,
        &reg.checks(),
    )
}

/// Destructive single-round measurement of every data qubit.
#[derive(Clone, Debug)]
pub struct DestructiveMeasurement {
    pub schedule: SurgerySchedule,
    pub basis: Basis,
    /// Data measurement index per qubit.
    pub data_meas: Vec<usize>,
    pub patch: Patch,
}

/// Classical post-processing of a destructive readout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    /// Raw logical parity (`true` = −1).
    pub raw: bool,
    /// Syndrome of the checks of the measured basis, from the data bits.
    pub syndrome: Bits,
    /// Correction chosen by the minimum-weight decoder.
    pub correction: PauliOp,
    pub corrected: bool,
}

impl DestructiveMeasurement {
    /// Decode the data bits of a record: syndrome of the same-basis checks,
    /// minimum-weight correction, corrected logical parity.
    pub fn transcript(&self, bits: &[bool]) -> Result<Transcript> {
        let n = self.patch.n();
        let data: Vec<bool> = self.data_meas.iter().map(|&m| bits[m]).collect();
        let checks: Vec<Check> = self.patch.checks().into_iter().filter(|c| c.basis == self.basis).collect();
        let syndrome = Bits::from_bools(
            &checks
                .iter()
                .map(|c| c.support.iter().fold(false, |a, &q| a ^ data[q]))
                .collect::<Vec<_>>(),
        );
        let supp = match self.basis {
            Basis::X => &self.patch.logical_x,
            Basis::Z => &self.patch.logical_z,
        };
        let raw = supp.iter().fold(false, |a, &q| a ^ data[q]);
        // errors that flip these outcomes are of the other type
        let ops: Vec<PauliOp> = checks.iter().map(|c| c.op(n)).collect();
        let correction = crate::decoding::decode_minweight(&crate::pauli::CheckSet::new(n, ops), &syndrome)?;
        let logical = self.basis.op(n, supp.iter().copied());
        let corrected = raw ^ !correction.commutes(&logical);
        Ok(Transcript {
            raw,
            syndrome,
            correction,
            corrected,
        })
    }
}

/// Encode `input`, then measure every data qubit in `basis` in one noisy step.
pub fn measure_logical_destructive(patch: &Patch, basis: Basis, input: LogicalInput, ext: Extraction) -> Result<DestructiveMeasurement> {
    let reg = single_register(patch);
    let mut pb = ProtocolBuilder::new(patch.positions(), ext);
    let r = pb.encode(&reg, input);
    pb.start_noisy();
    let kind = match basis {
        Basis::Z => OpKind::MeasZ,
        Basis::X => OpKind::MeasX,
    };
    let ops: Vec<_> = reg.qubits().map(|q| (kind, q, 0)).collect();
    let data_meas = pb.layer_stage("measure", &ops, 1);
    // the logical readout is the data parity on the logical support, times
    // the reference if there is one
    let logical = r.map(|r| {
        pb.b.ideal_layer(&[(if basis == Basis::X { OpKind::MeasX } else { OpKind::MeasZ }, r, 0)])[0]
    });
    let mut sched = pb.finish(if basis == Basis::X { "measure_x" } else { "measure_z" }, patch.distance, &[])?;
    if let Some(m) = logical {
        sched.analysis.detectors.retain(|d| !d.meas.contains(&m));
    }
    let supp = match basis {
        Basis::X => &patch.logical_x,
        Basis::Z => &patch.logical_z,
    };
    let mut set: Vec<usize> = supp.iter().map(|&q| data_meas[q]).collect();
    set.extend(logical);
    let parity = sched.analysis.deterministic_set(&set)?;
    sched.observables.push(Observable {
        label: if basis == Basis::X { "X".into() } else { "Z".into() },
        pauli: basis.op(sched.circuit.n_qubits, supp.iter().copied()),
        meas: *set.last().unwrap(),
        parity,
    });
    Ok(DestructiveMeasurement {
        schedule: sched,
        basis,
        data_meas,
        patch: patch.clone(),
    })
}

/// Transversal single-qubit layer on a color patch; no extraction rounds.
fn transversal(patch: &Patch, kind: OpKind, name: &str, input: LogicalInput, ext: Extraction) -> Result<SurgerySchedule> {
    if patch.family != CodeFamily::Color488 {
        return Err(Error::Invalid(format!("transversal {name} is only simulated on color patches")));
    }
    let reg = single_register(patch);
    let mut pb = ProtocolBuilder::new(patch.positions(), ext);
    let r = pb.encode(&reg, input);
    pb.start_noisy();
    let ops: Vec<_> = reg.qubits().map(|q| (kind, q, 0)).collect();
    pb.layer_stage(name, &ops, 0);
    let n = pb.n();
    match kind {
        OpKind::H => readout_for(&mut pb, &reg, input, r, |b| b.other()),
        _ => {
            // S: X ↦ ±Y, Z ↦ Z
            match (input, r) {
                (LogicalInput::Bell, Some(r)) => {
                    let y = PauliOp::y_on(n, reg.patch.logical_x.iter().copied());
                    pb.add_logical("X", with_ref(y, r, Basis::X, n));
                    pb.add_logical("Z", with_ref(reg.logical(Basis::Z, n), r, Basis::Z, n));
                }
                (LogicalInput::Plus | LogicalInput::Minus, _) => pb.add_logical("Y", PauliOp::y_on(n, reg.patch.logical_x.iter().copied())),
                _ => pb.add_logical("Z", reg.logical(Basis::Z, n)),
            }
        }
    }
    pb.finish(name, patch.distance, &reg.checks())
}

pub fn transversal_hadamard(patch: &Patch, input: LogicalInput, ext: Extraction) -> Result<SurgerySchedule> {
    transversal(patch, OpKind::H, "hadamard", input, ext)
}

/// S on every qubit when d ≡ 1 (mod 4), S† when d ≡ 3 (mod 4).
pub fn phase_gate_kind(d: usize) -> OpKind {
    if d % 4 == 1 {
        OpKind::S
    } else {
        OpKind::SDagger
    }
}

pub fn transversal_phase(patch: &Patch, input: LogicalInput, ext: Extraction) -> Result<SurgerySchedule> {
    transversal(patch, phase_gate_kind(patch.distance), "phase", input, ext)
}

/// Lattice-surgery measurement of `P_A P_B` between a patch and its mirror
/// image across `side`.
#[derive(Clone, Debug)]
pub struct MergedMeasurement {
    pub schedule: SurgerySchedule,
    pub geometry: MergeGeometry,
    /// Per merged round: the measurements whose XOR is the joint outcome
    /// (lighter faces and reference checks).
    pub outcome_sets: Vec<Vec<usize>>,
}

impl MergedMeasurement {
    /// Joint outcome of every merged round (`true` = −1).
    pub fn round_outcomes(&self, bits: &[bool]) -> Vec<bool> {
        self.outcome_sets
            .iter()
            .map(|s| s.iter().fold(false, |a, &m| a ^ bits[m]))
            .collect()
    }

    /// Majority over rounds; ties go to the last round.
    pub fn outcome(&self, bits: &[bool]) -> bool {
        let r = self.round_outcomes(bits);
        let ones = r.iter().filter(|&&b| b).count();
        match (2 * ones).cmp(&r.len()) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => *r.last().unwrap_or(&false),
        }
    }
}

/// Measurement indices of a subset of checks in one round.
fn pick(round: &[usize], offset: usize, idx: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = idx.iter().map(|&i| round[offset + i]).collect();
    v.sort_unstable();
    v
}

fn concat_positions(patches: &[&Patch]) -> Vec<Point> {
    patches.iter().flat_map(|p| p.positions()).collect()
}

/// Merge `patch` with its mirror image across `side`, measuring the joint
/// logical in `basis` for `rounds` rounds, then split for `rounds` rounds.
pub fn merged_measurement(
    patch: &Patch,
    side: crate::geometry::SideLabel,
    basis: Basis,
    rounds: usize,
    ext: Extraction,
) -> Result<MergedMeasurement> {
    let other = patch.mirrored(side)?;
    let g = crate::geometry::merge_geometry(patch, &other, side, side, basis)?;
    let ra = Register {
        offset: 0,
        patch: g.patch_a.clone(),
    };
    let rb = Register {
        offset: g.offset_b(),
        patch: g.patch_b.clone(),
    };
    let mut pb = ProtocolBuilder::new(concat_positions(&[&g.patch_a, &g.patch_b]), ext);
    let r_a = pb.encode(&ra, LogicalInput::Bell).unwrap();
    let r_b = pb.encode(&rb, LogicalInput::Bell).unwrap();
    pb.start_noisy();
    let merged = g.merged_checks();
    pb.stage("merge", merged, rounds, &[]);
    let idx: Vec<usize> = g.lighter_check_indices().into_iter().chain(g.reference_checks()).collect();
    let outcome_sets = pb.stages.last().unwrap().round_meas.iter().map(|r| pick(r, 0, &idx)).collect();
    let mut split = ra.checks();
    split.extend(rb.checks());
    pb.stage("split", split.clone(), rounds, &[]);
    let n = pb.n();
    let joint = ra.logical(basis, n).mul_unsigned(&rb.logical(basis, n));
    let o = basis.other();
    let mut corr = ra.logical(o, n).mul_unsigned(&rb.logical(o, n));
    corr.set(r_a, if o == Basis::X { Pauli::X } else { Pauli::Z });
    corr.set(r_b, if o == Basis::X { Pauli::X } else { Pauli::Z });
    let (jl, cl) = if basis == Basis::X { ("XX", "ZZ") } else { ("ZZ", "XX") };
    pb.add_logical(jl, joint);
    pb.add_logical(cl, corr);
    let name = if basis == Basis::X { "merge_xx" } else { "merge_zz" };
    let schedule = pb.finish(name, patch.distance, &split)?;
    Ok(MergedMeasurement {
        schedule,
        geometry: g,
        outcome_sets,
    })
}

/// Schedule variants of the lattice-surgery CNOT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CnotMode {
    /// Prepare, idle, merge, idle, merge, idle, measure: `5d + 2`.
    SevenStep,
    /// Merges overlap with the idle rounds: `3d`.
    Accelerated,
    /// Ancilla in |+>, ZZ merge first, Z readout of the ancilla: `3d`.
    Horsman,
}

impl CnotMode {
    pub const ALL: [CnotMode; 3] = [CnotMode::SevenStep, CnotMode::Accelerated, CnotMode::Horsman];

    pub fn name(self) -> &'static str {
        match self {
            CnotMode::SevenStep => "cnot_seven_step",
            CnotMode::Accelerated => "cnot_accelerated",
            CnotMode::Horsman => "cnot_horsman",
        }
    }

    pub fn depth(self, d: usize) -> usize {
        match self {
            CnotMode::SevenStep => 5 * d + 2,
            CnotMode::Accelerated | CnotMode::Horsman => 3 * d,
        }
    }
}

impl std::str::FromStr for CnotMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "seven_step" | "cnot_seven_step" => Ok(CnotMode::SevenStep),
            "accelerated" | "cnot_accelerated" | "cnot" => Ok(CnotMode::Accelerated),
            "horsman" | "cnot_horsman" => Ok(CnotMode::Horsman),
            _ => Err(Error::Parse(format!("unknown CNOT mode {s:?}"))),
        }
    }
}

/// Pauli corrections owed after a CNOT, on the logical level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CnotFrame {
    pub z_control: bool,
    pub x_target: bool,
}

/// Measurement results of one CNOT run: the first merge, the second merge
/// and the ancilla readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LogicalOutcome {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub frame_update: CnotFrame,
}

#[derive(Clone, Debug)]
pub struct LogicalCnot {
    pub schedule: SurgerySchedule,
    pub layout: CnotLayout,
    pub mode: CnotMode,
    /// Joint-outcome measurement sets of the last round of each merge.
    pub first_merge: Vec<usize>,
    pub second_merge: Vec<usize>,
    /// Ancilla data readout on its logical support.
    pub ancilla_readout: Vec<usize>,
    /// Ideal Bell-encoding measurement of (control, target) with their references.
    pub bell_meas: [usize; 2],
}

impl LogicalCnot {
    /// Raw (a, b, c) from a record and the corrections they imply:
    /// `Z_C^(a⊕c) X_T^b` for the merge-first-XX schedules, `X_T^(a⊕c) Z_C^b`
    /// for the Horsman ordering.
    pub fn outcome(&self, bits: &[bool]) -> LogicalOutcome {
        let par = |s: &[usize]| s.iter().fold(false, |a, &m| a ^ bits[m]);
        let (a, b, c) = (par(&self.first_merge), par(&self.second_merge), par(&self.ancilla_readout));
        let frame_update = match self.mode {
            CnotMode::Horsman => CnotFrame {
                z_control: b,
                x_target: a ^ c,
            },
            _ => CnotFrame {
                z_control: a ^ c,
                x_target: b,
            },
        };
        LogicalOutcome { a, b, c, frame_update }
    }
}

impl LogicalCnot {
    /// The byproduct of a record as a physical Pauli on the patches.
    pub fn correction(&self, bits: &[bool]) -> PauliOp {
        let n = self.schedule.circuit.n_qubits;
        let f = self.outcome(bits).frame_update;
        let mut p = PauliOp::identity(n);
        if f.z_control {
            p = p.mul_unsigned(&role_register(&self.layout, PatchRole::Control).logical(Basis::Z, n));
        }
        if f.x_target {
            p = p.mul_unsigned(&role_register(&self.layout, PatchRole::Target).logical(Basis::X, n));
        }
        p
    }
}

fn role_register(l: &CnotLayout, role: PatchRole) -> Register {
    let (patch, offset) = match role {
        PatchRole::Control => (&l.control, l.offset_control()),
        PatchRole::Ancilla => (&l.ancilla, l.offset_ancilla()),
        PatchRole::Target => (&l.target, l.offset_target()),
    };
    Register {
        offset,
        patch: patch.clone(),
    }
}

/// Lattice-surgery CNOT between Bell-encoded control and target patches.
/// The four readouts are the Bell correlators after the gate:
/// `X_RC X_C X_T`, `Z_RC Z_C`, `X_RT X_T` and `Z_RT Z_C Z_T`.
pub fn logical_cnot(d: usize, mode: CnotMode, ext: Extraction) -> Result<LogicalCnot> {
    logical_cnot_with(d, mode, ext, [LogicalInput::Bell, LogicalInput::Bell])
}

pub fn logical_cnot_with(d: usize, mode: CnotMode, ext: Extraction, inputs: [LogicalInput; 2]) -> Result<LogicalCnot> {
    let l = cnot_layout(d as i64)?;
    let (rc, ra, rt) = (
        role_register(&l, PatchRole::Control),
        role_register(&l, PatchRole::Ancilla),
        role_register(&l, PatchRole::Target),
    );
    let mut pb = ProtocolBuilder::new(concat_positions(&[&l.control, &l.ancilla, &l.target]), ext);
    let ref_c = pb.encode(&rc, inputs[0]);
    let bell_c = pb.b.n_measurements() - 1;
    let ref_t = pb.encode(&rt, inputs[1]);
    let bell_t = pb.b.n_measurements() - 1;
    pb.start_noisy();
    let c_checks = rc.checks();
    let a_checks = ra.checks();
    let t_checks = rt.checks();
    let cat = |parts: &[&[Check]]| parts.iter().flat_map(|p| p.iter().cloned()).collect::<Vec<_>>();
    let xx = l.xx_checks();
    let zz = l.zz_checks();
    let xx_idx: Vec<usize> = l.xx.lighter_check_indices().into_iter().chain(l.xx.reference_checks()).collect();
    let zz_idx: Vec<usize> = l.zz.lighter_check_indices().into_iter().chain(l.zz.reference_checks()).collect();
    let a_qubits: Vec<usize> = ra.qubits().collect();
    let a_logical: Vec<usize> = l.logical_support(PatchRole::Ancilla);
    let each = |k: OpKind| a_qubits.iter().map(|&q| (k, q, 0)).collect::<Vec<_>>();
    let last_round = |pb: &ProtocolBuilder| pb.stages.last().unwrap().round_meas.last().cloned().unwrap_or_default();
    let (first_merge, second_merge, readout_meas);
    match mode {
        CnotMode::Accelerated => {
            pb.stage("step1+3/merge_xx", cat(&[&c_checks, &xx]), d, &each(OpKind::PrepZ));
            first_merge = pick(&last_round(&pb), c_checks.len(), &xx_idx);
            pb.stage("step4+5/merge_zz", cat(&[&zz, &t_checks]), d, &[]);
            second_merge = pick(&last_round(&pb), 0, &zz_idx);
            readout_meas = pb.stage("step6+7/measure", cat(&[&c_checks, &t_checks]), d, &each(OpKind::MeasX));
        }
        CnotMode::SevenStep => {
            pb.layer_stage("step1/prepare", &each(OpKind::PrepZ), 1);
            pb.stage("step2/idle", cat(&[&c_checks, &a_checks, &t_checks]), d, &[]);
            pb.stage("step3/merge_xx", cat(&[&c_checks, &xx]), d, &[]);
            first_merge = pick(&last_round(&pb), c_checks.len(), &xx_idx);
            pb.stage("step4/split_xx", cat(&[&c_checks, &a_checks, &t_checks]), d, &[]);
            pb.stage("step5/merge_zz", cat(&[&zz, &t_checks]), d, &[]);
            second_merge = pick(&last_round(&pb), 0, &zz_idx);
            pb.stage("step6/split_zz", cat(&[&c_checks, &a_checks, &t_checks]), d, &[]);
            readout_meas = pb.layer_stage("step7/measure", &each(OpKind::MeasX), 1);
        }
        CnotMode::Horsman => {
            pb.stage("step1+5/merge_zz", cat(&[&zz, &t_checks]), d, &each(OpKind::PrepX));
            first_merge = pick(&last_round(&pb), 0, &zz_idx);
            pb.stage("step3+6/merge_xx", cat(&[&c_checks, &xx]), d, &[]);
            second_merge = pick(&last_round(&pb), c_checks.len(), &xx_idx);
            readout_meas = pb.stage("step4+7/measure", cat(&[&c_checks, &t_checks]), d, &each(OpKind::MeasZ));
        }
    }
    // readout ops are listed in ancilla-qubit order
    let ancilla_readout: Vec<usize> = a_logical.iter().map(|&q| readout_meas[q - l.offset_ancilla()]).collect();
    let n = pb.n();
    let (xc, zc, xt, zt) = (
        rc.logical(Basis::X, n),
        rc.logical(Basis::Z, n),
        rt.logical(Basis::X, n),
        rt.logical(Basis::Z, n),
    );
    match (ref_c, ref_t) {
        (Some(r1), Some(r2)) => {
            pb.add_logical("XC", with_ref(xc.mul_unsigned(&xt), r1, Basis::X, n));
            pb.add_logical("ZC", with_ref(zc.clone(), r1, Basis::Z, n));
            pb.add_logical("XT", with_ref(xt, r2, Basis::X, n));
            pb.add_logical("ZT", with_ref(zc.mul_unsigned(&zt), r2, Basis::Z, n));
        }
        _ => {
            // product inputs: read whatever the gate maps them to
            let map = |inp: LogicalInput, x: PauliOp, z: PauliOp| {
                if matches!(inp, LogicalInput::Zero | LogicalInput::One) {
                    ("Z", z)
                } else {
                    ("X", x)
                }
            };
            let (lc, pc) = map(inputs[0], xc.mul_unsigned(&xt), zc.clone());
            let (lt, pt) = map(inputs[1], xt.clone(), zc.mul_unsigned(&zt));
            pb.add_logical(&format!("{lc}C"), pc);
            pb.add_logical(&format!("{lt}T"), pt);
        }
    }
    let schedule = pb.finish(mode.name(), d, &cat(&[&c_checks, &t_checks]))?;
    Ok(LogicalCnot {
        schedule,
        layout: l,
        mode,
        first_merge,
        second_merge,
        ancilla_readout,
        bell_meas: [bell_c, bell_t],
    })
}

/// State placed on the injected qubit before the patch grows around it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InjectionInput {
    Zero,
    Plus,
    SPlus,
    /// Stand-in for a magic state: the injected qubit is Bell-paired with a
    /// noiseless reference, which any single-qubit state can be teleported into.
    SymbolicT,
}

impl std::str::FromStr for InjectionInput {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "ZERO" | "0" => Ok(InjectionInput::Zero),
            "PLUS" | "+" => Ok(InjectionInput::Plus),
            "S_PLUS" => Ok(InjectionInput::SPlus),
            "SYMBOLIC_T" | "T" => Ok(InjectionInput::SymbolicT),
            _ => Err(Error::Parse(format!("unknown injection input {s:?}"))),
        }
    }
}

/// Extraction rounds of each injection step.
pub const INJECTION_STEP_ROUNDS: usize = 3;

#[derive(Clone, Debug)]
pub struct Injection {
    pub schedule: SurgerySchedule,
    pub layout: InjectionLayout,
    pub input: InjectionInput,
}

/// Two-step state injection: the patch minus `q*` settles into the step-1
/// stabilizer state while `q*` holds the input, then the full patch is
/// measured.
pub fn inject_state(d: usize, input: InjectionInput, ext: Extraction) -> Result<Injection> {
    let l = injection_layout(d as i64)?;
    let reg = single_register(&l.patch);
    let q = l.injected;
    let mut pb = ProtocolBuilder::new(l.patch.positions(), ext);
    let reference = (input == InjectionInput::SymbolicT).then(|| {
        let r = pb.b.add_qubit(QubitRole::Reference);
        pb.references.push(r);
        r
    });
    pb.start_noisy();
    let star = match input {
        InjectionInput::Zero | InjectionInput::SymbolicT => OpKind::PrepZ,
        InjectionInput::Plus | InjectionInput::SPlus => OpKind::PrepX,
    };
    let prep: Vec<_> = reg.qubits().map(|v| (if v == q { star } else { OpKind::PrepZ }, v, 0)).collect();
    pb.layer_stage("prepare", &prep, 0);
    if let Some(r) = reference {
        let n = pb.n();
        let mut p = PauliOp::identity(n);
        p.set(r, Pauli::X);
        p.set(q, Pauli::X);
        pb.measure_ideal(&p);
        let mut p = PauliOp::identity(n);
        p.set(r, Pauli::Z);
        p.set(q, Pauli::Z);
        pb.measure_ideal(&p);
    }
    let first: Vec<_> = if input == InjectionInput::SPlus {
        vec![(OpKind::S, q, 0)]
    } else {
        vec![]
    };
    pb.stage("step1", l.step1_checks(), INJECTION_STEP_ROUNDS, &first);
    pb.stage("step2", l.step2_checks(), INJECTION_STEP_ROUNDS, &[]);
    let n = pb.n();
    match (input, reference) {
        (InjectionInput::Zero, _) => pb.add_logical("Z", reg.logical(Basis::Z, n)),
        (InjectionInput::Plus, _) => pb.add_logical("X", reg.logical(Basis::X, n)),
        (InjectionInput::SPlus, _) => pb.add_logical("Y", PauliOp::y_on(n, l.patch.logical_x.iter().copied())),
        (InjectionInput::SymbolicT, Some(r)) => {
            pb.add_logical("X", with_ref(reg.logical(Basis::X, n), r, Basis::X, n));
            pb.add_logical("Z", with_ref(reg.logical(Basis::Z, n), r, Basis::Z, n));
        }
        _ => unreachable!(),
    }
    let name = match input {
        InjectionInput::Zero => "inject_zero",
        InjectionInput::Plus => "inject_plus",
        InjectionInput::SPlus => "inject_s_plus",
        InjectionInput::SymbolicT => "inject_t",
    };
    let schedule = pb.finish(name, d, &l.step2_checks())?;
    Ok(Injection {
        schedule,
        layout: l,
        input,
    })
}

/// Noisy locations that must all succeed for one heralded Bell pair.
pub fn bell_pair_locations(d: usize) -> u32 {
    if d == 3 {
        6
    } else {
        4
    }
}

/// Expected number of attempts until every location succeeds.
pub fn expected_bell_attempts(d: usize, p: f64) -> f64 {
    (1.0 - p).powi(-(bell_pair_locations(d) as i32))
}

/// Attempts until success, drawn from the geometric distribution.
pub fn sample_bell_attempts<R: rand::Rng>(d: usize, p: f64, rng: &mut R) -> u64 {
    let s = (1.0 - p).powi(bell_pair_locations(d) as i32);
    let mut k = 1;
    while !rng.gen_bool(s.clamp(0.0, 1.0)) {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_color_patch, SideLabel};
    use crate::sim::run;

    fn bits(c: &Circuit, seed: u64) -> Vec<bool> {
        run(c, seed).unwrap().bits
    }

    fn meas_ops(c: &Circuit) -> Vec<usize> {
        c.ops
            .iter()
            .enumerate()
            .filter(|(_, o)| o.kind.is_measurement())
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn noiseless_history_is_all_zero() {
        let p = build_color_patch(3).unwrap();
        let s = logical_identity(&p, 3, Extraction::default()).unwrap();
        let lt = s.lookup(1).unwrap();
        assert!(
            lt.history_layout.iter().all(|l| l.is_some()),
            "every memory detector is a round difference"
        );
        for seed in 0..8 {
            let sh = s.syndrome_history(&bits(&s.circuit, seed));
            assert_eq!(sh.rounds.len(), 4);
            assert!(sh.is_zero());
            let fu = crate::decoding::decode_history(&lt, &sh);
            assert!(fu.correction.is_identity() && fu.observables.is_zero());
        }
    }

    #[test]
    fn history_decoding_replays_single_faults() {
        use crate::circuit::{noise_locations, Fault, LocKind};
        use crate::sim::run_with_faults;
        let p = build_color_patch(3).unwrap();
        let s = logical_identity(&p, 3, Extraction::default()).unwrap();
        let lt = s.lookup(1).unwrap();
        let locs = noise_locations(&s.circuit);
        let mops = meas_ops(&s.circuit);
        let st = &s.stages[0];
        let after_round0 = mops[*st.round_meas[0].last().unwrap()];
        let before_round1 = mops[st.round_meas[1][0]];
        // data X between rounds 0 and 1: the frame carries X on that qubit
        let mut tried = 0;
        for q in 0..p.n() {
            let Some(loc) = locs
                .iter()
                .position(|l| l.kind == LocKind::One(q) && l.op >= after_round0 && l.op < before_round1)
            else {
                continue;
            };
            let f = Fault { loc, pauli: 1 };
            let (rec, _) = run_with_faults(&s.circuit, 11, &[f]).unwrap();
            let sh = s.syndrome_history(&rec.bits);
            assert!(!sh.is_zero());
            let fu = crate::decoding::decode_history(&lt, &sh);
            assert_eq!(fu.correction, PauliOp::single(p.n(), q, Pauli::X), "qubit {q}");
            assert_eq!(fu.observables, Bits::from_bools(&s.observable_errors(&rec.bits)));
            tried += 1;
        }
        assert!(tried > 0);
        // a flipped check outcome shows up in exactly two adjacent difference rounds
        for (loc, l) in locs.iter().enumerate() {
            let LocKind::Flip(m) = l.kind else { continue };
            if !st.round_meas[1].contains(&m) {
                continue;
            }
            let (rec, _) = run_with_faults(&s.circuit, 3, &[Fault { loc, pauli: 1 }]).unwrap();
            let sh = s.syndrome_history(&rec.bits);
            let fired: Vec<usize> = sh
                .differences()
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.is_zero())
                .map(|(i, _)| i)
                .collect();
            assert_eq!(fired, vec![1, 2]);
            let fu = crate::decoding::decode_history(&lt, &sh);
            assert!(fu.correction.is_identity() && fu.observables.is_zero());
        }
    }

    #[test]
    fn memory_observables_hold_for_every_seed() {
        let p = build_color_patch(3).unwrap();
        for input in [
            LogicalInput::Zero,
            LogicalInput::One,
            LogicalInput::Plus,
            LogicalInput::Minus,
            LogicalInput::Bell,
        ] {
            let s = logical_identity_with(&p, 2, Extraction::default(), input).unwrap();
            for seed in 0..8 {
                let b = bits(&s.circuit, seed);
                assert!(s.observable_errors(&b).iter().all(|e| !e), "{input:?}");
                for det in &s.analysis.detectors {
                    assert_eq!(det.meas.iter().fold(det.expected, |a, &m| a ^ b[m]), false);
                }
            }
        }
    }

    #[test]
    fn memory_detectors_are_round_differences() {
        let p = build_color_patch(3).unwrap();
        let s = logical_identity(&p, 3, Extraction::default()).unwrap();
        let st = &s.stages[0];
        for r in 1..st.rounds {
            for (k, &m) in st.round_meas[r].iter().enumerate() {
                let det = s.analysis.detectors.iter().find(|d| d.meas.last() == Some(&m)).unwrap();
                assert_eq!(det.meas, vec![st.round_meas[r - 1][k], m]);
            }
        }
    }

    #[test]
    fn one_input_reads_minus_one() {
        let p = build_color_patch(3).unwrap();
        let s = logical_identity_with(&p, 1, Extraction::default(), LogicalInput::One).unwrap();
        let b = bits(&s.circuit, 3);
        assert_eq!(s.observable_values(&b), vec![true]);
    }

    #[test]
    fn transversal_gates_map_correlators() {
        for d in [3, 5] {
            let p = build_color_patch(d).unwrap();
            for s in [
                transversal_hadamard(&p, LogicalInput::Bell, Extraction::default()).unwrap(),
                transversal_phase(&p, LogicalInput::Bell, Extraction::default()).unwrap(),
            ] {
                for seed in 0..4 {
                    assert!(s.observable_errors(&bits(&s.circuit, seed)).iter().all(|e| !e));
                }
            }
        }
        // the wrong phase direction flips the Y correlator sign
        assert_eq!(phase_gate_kind(3), OpKind::SDagger);
        assert_eq!(phase_gate_kind(5), OpKind::S);
    }

    #[test]
    fn destructive_readout_decodes_single_errors() {
        let p = build_color_patch(3).unwrap();
        let m = measure_logical_destructive(&p, Basis::Z, LogicalInput::One, Extraction::default()).unwrap();
        let mut b = bits(&m.schedule.circuit, 1);
        let clean = m.transcript(&b).unwrap();
        assert!(clean.corrected && clean.syndrome.is_zero());
        for q in 0..p.n() {
            b[m.data_meas[q]] ^= true;
            let t = m.transcript(&b).unwrap();
            assert!(t.corrected, "flip on {q}");
            b[m.data_meas[q]] ^= true;
        }
    }

    #[test]
    fn merge_outcome_matches_joint_logical() {
        let p = build_color_patch(3).unwrap();
        for (side, basis) in [(SideLabel::Right, Basis::X), (SideLabel::Bottom, Basis::Z)] {
            let m = merged_measurement(&p, side, basis, 2, Extraction::default()).unwrap();
            let s = &m.schedule;
            let mut seen = [false; 2];
            for seed in 0..16 {
                let b = bits(&s.circuit, seed);
                assert!(s.observable_errors(&b).iter().all(|e| !e));
                let r = m.round_outcomes(&b);
                assert!(r.iter().all(|&x| x == r[0]));
                // the ideal final joint readout agrees with the merge outcome
                let joint = s.observables[0].meas;
                assert_eq!(b[joint], m.outcome(&b));
                seen[m.outcome(&b) as usize] = true;
            }
            assert!(seen[0] && seen[1], "both outcomes occur");
        }
    }

    /// Independent check of the byproduct rule: raw final correlators, the
    /// Bell-encoding signs and the explicit frame must agree on every seed.
    fn check_cnot_frame(c: &LogicalCnot, seeds: u64) {
        let s = &c.schedule;
        let labels = ["XC", "ZC", "XT", "ZT"];
        for seed in 0..seeds {
            let b = bits(&s.circuit, seed);
            assert!(s.observable_errors(&b).iter().all(|e| !e));
            let out = c.outcome(&b);
            let f = out.frame_update;
            let (bc, bt) = (b[c.bell_meas[0]], b[c.bell_meas[1]]);
            for l in labels {
                let o = s.observable(l).unwrap();
                let raw = b[o.meas];
                // Z_C anticommutes with X_C, X_T with Z_T
                let flip = match l {
                    "XC" => f.z_control,
                    "ZT" => f.x_target,
                    _ => false,
                };
                let z_bell = false;
                let expected = match l {
                    "XC" => bc,
                    "XT" => bt,
                    _ => z_bell,
                };
                assert_eq!(raw ^ flip, expected, "{:?} {l} seed {seed}", c.mode);
            }
        }
    }

    #[test]
    fn cnot_frame_update_matches_simulation() {
        for mode in CnotMode::ALL {
            let c = logical_cnot(3, mode, Extraction::default()).unwrap();
            assert_eq!(c.schedule.total_depth, mode.depth(3));
            check_cnot_frame(&c, 24);
        }
    }

    #[test]
    fn physical_byproducts_match_the_frame() {
        use crate::sim::run_with_feedback;
        for mode in CnotMode::ALL {
            let c = logical_cnot(3, mode, Extraction::default()).unwrap();
            let s = &c.schedule;
            let flips = |b: &[bool]| {
                let f = c.outcome(b).frame_update;
                ["XC", "ZC", "XT", "ZT"].map(|l| match l {
                    "XC" => f.z_control,
                    "ZT" => f.x_target,
                    _ => false,
                })
            };
            let mut corrected_any = false;
            for seed in 0..12 {
                let framed = bits(&s.circuit, seed);
                let (phys, _) = run_with_feedback(&s.circuit, seed, &[], s.noisy_end, |b| Some(c.correction(b))).unwrap();
                let fl = flips(&framed);
                corrected_any |= fl.iter().any(|&x| x);
                for (k, o) in s.observables.iter().enumerate() {
                    assert_eq!(phys.bits[o.meas], framed[o.meas] ^ fl[k], "{mode:?} {} seed {seed}", o.label);
                }
            }
            assert!(corrected_any, "{mode:?}: some seed needs a byproduct");
        }
    }

    #[test]
    fn physical_decoder_corrections_match_the_frame() {
        use crate::circuit::fault_enumeration;
        use crate::sim::{run_with_faults, run_with_feedback};
        let p = build_color_patch(3).unwrap();
        let s = logical_identity(&p, 3, Extraction::default()).unwrap();
        let lt = s.lookup(1).unwrap();
        let data: Vec<usize> = (0..s.circuit.n_qubits).filter(|&q| s.circuit.roles[q] == QubitRole::Data).collect();
        let n = s.circuit.n_qubits;
        for e in fault_enumeration(&s.circuit, 1).unwrap().iter().step_by(7) {
            let (rec, _) = run_with_faults(&s.circuit, 5, &e.faults).unwrap();
            let sig = s.analysis.detector_events(&e.flips);
            let fu = lt.decode(&sig);
            let framed: Vec<bool> = s
                .observable_errors(&rec.bits)
                .iter()
                .enumerate()
                .map(|(i, a)| a ^ fu.observables.get(i))
                .collect();
            let corr = fu.correction.remap(n, |k| data[k]);
            let (phys, _) = run_with_feedback(&s.circuit, 5, &e.faults, s.noisy_end, |_| Some(corr.clone())).unwrap();
            assert_eq!(s.observable_errors(&phys.bits), framed, "{:?}", e.faults);
            assert!(framed.iter().all(|x| !x));
        }
    }

    #[test]
    fn cnot_truth_table_on_basis_states() {
        use LogicalInput::*;
        for (ci, ti, want) in [
            (Zero, Zero, [false, false]),
            (One, Zero, [true, true]),
            (Zero, One, [false, true]),
            (One, One, [true, false]),
        ] {
            let c = logical_cnot_with(3, CnotMode::Accelerated, Extraction::default(), [ci, ti]).unwrap();
            let b = bits(&c.schedule.circuit, 11);
            let s = &c.schedule;
            // Z_C and Z_C Z_T readouts, then corrected by the frame
            let zc = b[s.observable("ZC").unwrap().meas];
            let zt = b[s.observable("ZT").unwrap().meas] ^ c.outcome(&b).frame_update.x_target;
            assert_eq!([zc, zt ^ zc], want, "{ci:?} {ti:?}");
        }
    }

    #[test]
    fn injection_reads_its_input() {
        for d in [3, 5] {
            for input in [
                InjectionInput::Zero,
                InjectionInput::Plus,
                InjectionInput::SPlus,
                InjectionInput::SymbolicT,
            ] {
                let inj = inject_state(d, input, Extraction::default()).unwrap();
                let s = &inj.schedule;
                assert_eq!(s.total_depth, 2 * INJECTION_STEP_ROUNDS);
                for seed in 0..6 {
                    assert!(s.observable_errors(&bits(&s.circuit, seed)).iter().all(|e| !e), "{d} {input:?}");
                }
            }
        }
    }

    #[test]
    fn bell_wait_mean() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let p = 0.05;
        let n = 20000;
        let mean = (0..n).map(|_| sample_bell_attempts(5, p, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - expected_bell_attempts(5, p)).abs() < 0.02, "{mean}");
    }
}
