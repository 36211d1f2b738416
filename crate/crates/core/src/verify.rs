//! Noiseless oracle suite behind `colorsurg verify`.
//!
//! Each check runs a protocol circuit on the stabilizer simulator and
//! compares frame-corrected logical readouts against values computed
//! independently (a 4-qubit logical tableau for the CNOT, textbook
//! eigenvalues for the single-patch protocols).

use crate::geometry::{build_color_patch, Basis, SideLabel};
use crate::pauli::{min_logical_weight, CheckSet, PauliOp, SearchBudget};
use crate::sim::{run, Tableau};
use crate::surgery::{
    inject_state, logical_cnot, logical_cnot_with, logical_identity_with, merged_measurement, transversal_hadamard, transversal_phase,
    CnotMode, Extraction, InjectionInput, LogicalCnot, LogicalInput, SurgerySchedule,
};
use crate::Result;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(title: String) -> Self {
        Report { title, checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn n_passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(
            f,
            "{} {}: {}/{} checks",
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.n_passed(),
            self.checks.len()
        )
    }
}

fn bits(s: &SurgerySchedule, seed: u64) -> Result<Vec<bool>> {
    Ok(run(&s.circuit, seed)?.bits)
}

fn sign(v: bool) -> &'static str {
    if v {
        "-1"
    } else {
        "+1"
    }
}

const CORRELATORS: [&str; 4] = ["XC", "ZC", "XT", "ZT"];

/// Frame-corrected correlator values (`true` = −1), in [`CORRELATORS`] order.
pub fn corrected_correlators(c: &LogicalCnot, b: &[bool]) -> Result<[bool; 4]> {
    let f = c.outcome(b).frame_update;
    let mut out = [false; 4];
    for (k, l) in CORRELATORS.iter().enumerate() {
        let o = c
            .schedule
            .observable(l)
            .ok_or_else(|| crate::Error::Invalid(format!("CNOT schedule lacks correlator {l}")))?;
        let flip = match *l {
            "XC" => f.z_control,
            "ZT" => f.x_target,
            _ => false,
        };
        out[k] = b[o.meas] ^ flip;
    }
    Ok(out)
}

/// Correlators on the logical qubits (RC, C, RT, T).
fn logical_correlators() -> [PauliOp; 4] {
    ["XXIX", "ZZII", "IIXX", "IZZZ"].map(|s| PauliOp::parse(s).unwrap())
}

/// The ideal gate on Bell pairs whose X correlators carry the given signs.
fn oracle_state(bell: [bool; 2]) -> Result<Tableau> {
    let mut t: Tableau = Tableau::new(4);
    for (r, q) in [(0, 1), (2, 3)] {
        t.h(r)?;
        t.cnot(r, q)?;
    }
    for (k, &b) in bell.iter().enumerate() {
        if b {
            t.apply_pauli(&PauliOp::parse(if k == 0 { "ZIII" } else { "IIZI" }).unwrap())?;
        }
    }
    t.cnot(1, 3)?;
    Ok(t)
}

/// The 16 products of the correlators, each labelled by the two-qubit Pauli
/// it propagates (`P⊗Q -> image`). Passing means every seed's corrected
/// readouts agree with the ideal gate's eigenvalue.
pub fn cnot_propagations(c: &LogicalCnot, seeds: u64) -> Result<Vec<(String, bool)>> {
    let gens = logical_correlators();
    let mut out = Vec::new();
    let records: Vec<Vec<bool>> = (0..seeds).map(|s| bits(&c.schedule, s)).collect::<Result<_>>()?;
    for mask in 0..16u32 {
        let mut m = PauliOp::identity(4);
        for (k, g) in gens.iter().enumerate() {
            if mask >> k & 1 == 1 {
                m = m.checked_mul(g).expect("correlators commute");
            }
        }
        let label = format!(
            "{}{} -> {}{}",
            m.get(0).symbol(),
            m.get(2).symbol(),
            m.get(1).symbol(),
            m.get(3).symbol()
        );
        let mut ok = true;
        for b in &records {
            let v = corrected_correlators(c, b)?;
            let proto = (0..4).filter(|k| mask >> k & 1 == 1).fold(false, |a, k| a ^ v[k]);
            let t = oracle_state([b[c.bell_meas[0]], b[c.bell_meas[1]]])?;
            ok &= t.expectation(&m) == Some(proto);
        }
        out.push((label, ok));
    }
    Ok(out)
}

/// Corrected Z readouts for the four computational-basis inputs.
pub fn cnot_truth_table(d: usize, mode: CnotMode, seed: u64) -> Result<Vec<((bool, bool), (bool, bool))>> {
    use LogicalInput::{One, Zero};
    let mut out = Vec::new();
    for (ci, ti) in [(false, false), (false, true), (true, false), (true, true)] {
        let inp = |b: bool| if b { One } else { Zero };
        let c = logical_cnot_with(d, mode, Extraction::default(), [inp(ci), inp(ti)])?;
        let s = &c.schedule;
        let b = bits(s, seed)?;
        let zc = b[s.observable("ZC").unwrap().meas];
        // the target readout is Z_C Z_T
        let zt = b[s.observable("ZT").unwrap().meas] ^ c.outcome(&b).frame_update.x_target ^ zc;
        out.push(((ci, ti), (zc, zt)));
    }
    Ok(out)
}

/// Seeds on which two modes give different corrected readouts, for Bell
/// inputs and for each computational-basis input.
pub fn cnot_mode_disagreements(d: usize, a: CnotMode, b: CnotMode, seeds: u64) -> Result<usize> {
    let ca = logical_cnot(d, a, Extraction::default())?;
    let cb = logical_cnot(d, b, Extraction::default())?;
    let mut bad = 0;
    for s in 0..seeds {
        if corrected_correlators(&ca, &bits(&ca.schedule, s)?)? != corrected_correlators(&cb, &bits(&cb.schedule, s)?)? {
            bad += 1;
        }
        if cnot_truth_table(d, a, s)? != cnot_truth_table(d, b, s)? {
            bad += 1;
        }
    }
    Ok(bad)
}

pub fn verify_cnot(d: usize, mode: CnotMode, seeds: u64) -> Result<Report> {
    let mut r = Report::new(format!("{} d={d}", mode.name()));
    let c = logical_cnot(d, mode, Extraction::default())?;
    r.push(
        "depth",
        c.schedule.total_depth == mode.depth(d),
        format!("{} rounds", c.schedule.total_depth),
    );
    let props = cnot_propagations(&c, seeds)?;
    let n_ok = props.iter().filter(|p| p.1).count();
    let failed: Vec<&str> = props.iter().filter(|p| !p.1).map(|p| p.0.as_str()).collect();
    r.push(
        "pauli propagation",
        n_ok == 16,
        if failed.is_empty() {
            format!("16/16 Pauli propagations over {seeds} seeds")
        } else {
            format!("{n_ok}/16, wrong: {}", failed.join(", "))
        },
    );
    let tt = cnot_truth_table(d, mode, 0)?;
    let good = tt.iter().filter(|((c, t), out)| *out == (*c, c ^ t)).count();
    r.push("truth table", good == 4, format!("{good}/4 Z-basis inputs"));
    for other in CnotMode::ALL.into_iter().filter(|&m| m != mode) {
        let bad = cnot_mode_disagreements(d, mode, other, seeds.min(8))?;
        r.push(
            format!("agrees with {}", other.name()),
            bad == 0,
            format!("{bad} disagreeing trials"),
        );
    }
    Ok(r)
}

/// `Y` on an odd-weight logical support is `(-1)^((w-1)/2)` times `i X_L Z_L`.
fn y_support_sign(w: usize) -> bool {
    (w - 1) / 2 % 2 == 1
}

fn readout_detail(s: &SurgerySchedule, b: &[bool]) -> String {
    s.observables
        .iter()
        .zip(s.observable_values(b))
        .map(|(o, v)| format!("{}:{}", o.label, sign(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Frame-corrected readouts must equal `want` (label, value) on every seed.
fn expect_readouts(r: &mut Report, name: &str, s: &SurgerySchedule, want: &[(&str, bool)], seeds: u64) -> Result<()> {
    let mut ok = true;
    let mut detail = String::new();
    for seed in 0..seeds {
        let b = bits(s, seed)?;
        let vals = s.observable_values(&b);
        for &(l, v) in want {
            let k = s.observables.iter().position(|o| o.label == l);
            ok &= k.is_some_and(|k| vals[k] == v);
        }
        if seed == 0 {
            detail = readout_detail(s, &b);
        }
    }
    r.push(name, ok, detail);
    Ok(())
}

pub fn verify_injection(d: usize, input: InjectionInput, seeds: u64) -> Result<Report> {
    let inj = inject_state(d, input, Extraction::default())?;
    let s = &inj.schedule;
    let mut r = Report::new(format!("inject {input:?} d={d}"));
    r.push("depth", s.total_depth == 6, format!("{} rounds", s.total_depth));
    let w = inj.layout.patch.logical_x.len();
    let want: Vec<(&str, bool)> = match input {
        InjectionInput::Zero => vec![("Z", false)],
        InjectionInput::Plus => vec![("X", false)],
        InjectionInput::SPlus => vec![("Y", y_support_sign(w))],
        InjectionInput::SymbolicT => vec![("X", false), ("Z", false)],
    };
    expect_readouts(&mut r, "readout", s, &want, seeds)?;
    Ok(r)
}

pub fn verify_hadamard(d: usize, seeds: u64) -> Result<Report> {
    let p = build_color_patch(d as i64)?;
    let mut r = Report::new(format!("hadamard d={d}"));
    for (input, want, name) in [
        (LogicalInput::Zero, ("X", false), "|0> -> |+>"),
        (LogicalInput::Plus, ("Z", false), "|+> -> |0>"),
    ] {
        let s = transversal_hadamard(&p, input, Extraction::default())?;
        expect_readouts(&mut r, name, &s, &[want], seeds)?;
    }
    let s = transversal_hadamard(&p, LogicalInput::Bell, Extraction::default())?;
    expect_readouts(&mut r, "Bell correlators", &s, &[("X", false), ("Z", false)], seeds)?;
    Ok(r)
}

/// Logical S fixes |0> and takes |+> to the +1 eigenstate of `Y_L`.
pub fn verify_phase(d: usize, seeds: u64) -> Result<Report> {
    let p = build_color_patch(d as i64)?;
    let mut r = Report::new(format!("phase d={d} ({:?})", crate::surgery::phase_gate_kind(d)));
    let s = transversal_phase(&p, LogicalInput::Zero, Extraction::default())?;
    expect_readouts(&mut r, "|0> fixed", &s, &[("Z", false)], seeds)?;
    let s = transversal_phase(&p, LogicalInput::Plus, Extraction::default())?;
    expect_readouts(&mut r, "|+> -> |+i>", &s, &[("Y", y_support_sign(p.logical_x.len()))], seeds)?;
    Ok(r)
}

pub fn verify_memory(d: usize, seeds: u64) -> Result<Report> {
    let p = build_color_patch(d as i64)?;
    let mut r = Report::new(format!("memory d={d}"));
    for (input, want) in [
        (LogicalInput::Zero, ("Z", false)),
        (LogicalInput::One, ("Z", true)),
        (LogicalInput::Plus, ("X", false)),
        (LogicalInput::Minus, ("X", true)),
    ] {
        let s = logical_identity_with(&p, d, Extraction::default(), input)?;
        r.push("depth", s.total_depth == d, format!("{} rounds", s.total_depth));
        expect_readouts(&mut r, &format!("{input:?}"), &s, &[want], seeds)?;
    }
    Ok(r)
}

/// Seeds on which the lighter-face product of some merge round differs
/// from the direct joint logical measurement, plus how often each outcome
/// occurred.
pub fn merge_identity(d: usize, basis: Basis, seeds: u64) -> Result<(usize, [usize; 2])> {
    let p = build_color_patch(d as i64)?;
    let side = if basis == Basis::X { SideLabel::Right } else { SideLabel::Bottom };
    let m = merged_measurement(&p, side, basis, d, Extraction::default())?;
    let joint = m.schedule.observables[0].meas;
    let mut bad = 0;
    let mut seen = [0; 2];
    for seed in 0..seeds {
        let b = bits(&m.schedule, seed)?;
        if m.round_outcomes(&b).iter().any(|&o| o != b[joint]) {
            bad += 1;
        }
        seen[m.outcome(&b) as usize] += 1;
    }
    Ok((bad, seen))
}

pub fn verify_merge(d: usize, seeds: u64) -> Result<Report> {
    let mut r = Report::new(format!("merge d={d}"));
    for basis in [Basis::X, Basis::Z] {
        let (bad, seen) = merge_identity(d, basis, seeds)?;
        r.push(
            format!("{basis:?}{basis:?} outcome = joint logical"),
            bad == 0,
            format!("{bad} mismatches over {seeds} seeds; outcomes +1: {}, -1: {}", seen[0], seen[1]),
        );
    }
    Ok(r)
}

/// Minimum weight of a nontrivial logical for the check set measured in
/// each extraction stage, searched up to `d` (`None` = heavier than `d`).
/// Only qubits touched by the stage's checks belong to the instantaneous
/// code.
pub fn stage_distances(c: &LogicalCnot) -> Result<Vec<(String, Option<usize>)>> {
    let d = c.schedule.d;
    let mut out = Vec::new();
    for st in c.schedule.stages.iter().filter(|s| !s.checks.is_empty()) {
        let mut qubits: Vec<usize> = st.checks.iter().flat_map(|k| k.support.iter().copied()).collect();
        qubits.sort_unstable();
        qubits.dedup();
        let n = qubits.len();
        let ops: Vec<PauliOp> = st
            .checks
            .iter()
            .map(|k| {
                let mut k = k.clone();
                k.support = k.support.iter().map(|q| qubits.binary_search(q).unwrap()).collect();
                check_op(n, &k)
            })
            .collect();
        let cs = CheckSet::new(n, ops);
        out.push((st.label.clone(), min_logical_weight(&cs, d, SearchBudget::default())?));
    }
    Ok(out)
}

/// Outcome of exhaustive fault injection into the second injection step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InjectionDetection {
    /// Single faults in step 2 that avoid the injected qubit.
    pub faults: usize,
    /// Faults on the injected qubit, left out.
    pub excluded: usize,
    /// Silent logical faults whose effect is identical to a fault on the
    /// injected qubit (hook errors through a check that is new in step 2).
    pub aliased: usize,
    /// Single faults that flip a logical without firing any detector and
    /// are not aliased.
    pub undetected: usize,
    /// Same for pairs of faults at distinct locations (only when requested).
    pub aliased_pairs: Option<u64>,
    pub undetected_pairs: Option<u64>,
}

/// Every fault during step 2 of a `SymbolicT` injection, except those on the
/// injected qubit or indistinguishable from one, either fires a detector or
/// leaves both tracked logicals untouched. A silent fault is aliased when its
/// data residual is a single-qubit Pauli on the injected qubit up to the
/// final stabilizers. With `pairs`, fault pairs at distinct locations are
/// checked the same way, using linearity of the frame.
pub fn injection_detection(d: usize, pairs: bool) -> Result<InjectionDetection> {
    use crate::circuit::LocKind;
    use crate::pauli::Pauli;
    use crate::sim::analysis::parity_of;
    use crate::sim::FrameSim;
    use std::collections::HashMap;
    let inj = inject_state(d, InjectionInput::SymbolicT, Extraction::default())?;
    let s = &inj.schedule;
    let q = inj.layout.injected;
    let st = s.stages.iter().find(|st| st.label == "step2").expect("step2 stage");
    let sim = FrameSim::new(&s.circuit);
    let nd = sim.data_qubits().len();
    let stabs = CheckSet::new(nd, inj.layout.step2_checks().iter().map(|k| check_op(nd, k)).collect());
    let aliased = |r: &PauliOp| {
        [Pauli::X, Pauli::Y, Pauli::Z]
            .iter()
            .any(|&p| stabs.contains(&r.mul_unsigned(&PauliOp::single(nd, q, p))))
    };
    let locs = sim.locations().to_vec();
    let mut out = InjectionDetection::default();
    let mut kept = Vec::new();
    for e in sim.single_fault_effects() {
        let l = locs[e.faults[0].loc];
        if !(st.start..st.end).contains(&s.circuit.ops[l.op].time_step) {
            continue;
        }
        if matches!(l.kind, LocKind::One(a) if a == q) || matches!(l.kind, LocKind::Two(a, b) if a == q || b == q) {
            out.excluded += 1;
            continue;
        }
        let det: Vec<bool> = s.analysis.detectors.iter().map(|p| parity_of(p, &e.flips)).collect();
        let obs: Vec<bool> = s.observables.iter().map(|o| parity_of(&o.parity, &e.flips)).collect();
        if det.iter().all(|&b| !b) && obs.iter().any(|&b| b) {
            if aliased(&e.residual) {
                out.aliased += 1;
            } else {
                out.undetected += 1;
            }
        }
        kept.push((e.faults[0].loc, det, obs, e.residual));
    }
    out.faults = kept.len();
    if pairs {
        let mut groups: HashMap<&[bool], Vec<usize>> = HashMap::new();
        for (i, k) in kept.iter().enumerate() {
            groups.entry(&k.1).or_default().push(i);
        }
        let (mut silent, mut bad) = (0u64, 0u64);
        for g in groups.values() {
            for (x, &i) in g.iter().enumerate() {
                for &j in &g[x + 1..] {
                    let (a, b) = (&kept[i], &kept[j]);
                    if a.0 == b.0 || a.2 == b.2 {
                        continue;
                    }
                    silent += 1;
                    if !aliased(&a.3.mul_unsigned(&b.3)) {
                        bad += 1;
                    }
                }
            }
        }
        out.aliased_pairs = Some(silent - bad);
        out.undetected_pairs = Some(bad);
    }
    Ok(out)
}

fn check_op(n: usize, k: &crate::geometry::Check) -> PauliOp {
    match k.basis {
        Basis::X => PauliOp::x_on(n, k.support.iter().copied()),
        Basis::Z => PauliOp::z_on(n, k.support.iter().copied()),
    }
}
