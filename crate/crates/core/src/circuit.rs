//! Timed circuits of primitive operations, syndrome-extraction rounds built
//! from check lists, and the circuit-level depolarizing noise model.
//!
//! Ops flagged `ideal` never receive noise. Protocols use them for the
//! noiseless encoding preamble and the final readout, including the
//! multi-qubit `MEAS_PAULI` measurement that has no physical counterpart.

use crate::geometry::tiling::{self, Tile};
use crate::geometry::{Basis, Check, FaceColor, Point};
use crate::pauli::PauliOp;
use crate::sim::frame::FrameSim;
use crate::{Bits, Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpKind {
    PrepZ,
    PrepX,
    MeasZ,
    MeasX,
    Cnot,
    H,
    S,
    SDagger,
    Idle,
    /// Ideal multi-qubit Pauli measurement (operand in `Circuit::paulis`).
    MeasPauli,
}

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Cnot => 2,
            OpKind::MeasPauli => 0,
            _ => 1,
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, OpKind::MeasZ | OpKind::MeasX | OpKind::MeasPauli)
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::PrepZ => "PREP_Z",
            OpKind::PrepX => "PREP_X",
            OpKind::MeasZ => "MEAS_Z",
            OpKind::MeasX => "MEAS_X",
            OpKind::Cnot => "CNOT",
            OpKind::H => "H",
            OpKind::S => "S",
            OpKind::SDagger => "S_DAGGER",
            OpKind::Idle => "IDLE",
            OpKind::MeasPauli => "MEAS_PAULI",
        }
    }

    pub fn from_name(s: &str) -> Option<OpKind> {
        use OpKind::*;
        [PrepZ, PrepX, MeasZ, MeasX, Cnot, H, S, SDagger, Idle, MeasPauli]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircuitOp {
    pub kind: OpKind,
    /// `[control, target]` for CNOT; only `targets[0]` is used by one-qubit ops.
    pub targets: [usize; 2],
    pub time_step: usize,
    pub ideal: bool,
    /// Index into `Circuit::paulis` for `MEAS_PAULI`.
    pub pauli: usize,
}

impl CircuitOp {
    pub fn qubits(&self) -> &[usize] {
        &self.targets[..self.kind.arity()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QubitRole {
    Data,
    Syndrome,
    /// Noiseless bookkeeping qubit, touched by ideal ops only.
    Reference,
}

#[derive(Clone, Debug, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub roles: Vec<QubitRole>,
    pub ops: Vec<CircuitOp>,
    /// Time steps at which extraction rounds start.
    pub round_boundaries: Vec<usize>,
    pub paulis: Vec<PauliOp>,
    pub n_measurements: usize,
}

impl Circuit {
    pub fn new(n_data: usize) -> Circuit {
        Circuit {
            n_qubits: n_data,
            roles: vec![QubitRole::Data; n_data],
            ..Circuit::default()
        }
    }

    pub fn depth(&self) -> usize {
        self.ops.last().map_or(0, |o| o.time_step + 1)
    }

    pub fn n_data(&self) -> usize {
        self.roles.iter().filter(|r| **r == QubitRole::Data).count()
    }

    /// Op index of every measurement, in record order.
    pub fn measurement_ops(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, o)| o.kind.is_measurement())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn count(&self, kind: OpKind) -> usize {
        self.ops.iter().filter(|o| o.kind == kind).count()
    }

    /// Structural checks: qubit ranges, distinct CNOT operands, one op per
    /// qubit per time step, and syndrome qubits prepared before use and
    /// measured before the next round starts.
    pub fn validate(&self) -> Result<()> {
        let mut last_t = 0;
        let mut busy: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, op) in self.ops.iter().enumerate() {
            if op.time_step < last_t {
                return Err(Error::Invalid(format!("op {i} goes back in time")));
            }
            last_t = op.time_step;
            let qs: Vec<usize> = if op.kind == OpKind::MeasPauli {
                let p = self
                    .paulis
                    .get(op.pauli)
                    .ok_or_else(|| Error::Invalid(format!("op {i}: missing Pauli operand")))?;
                if p.n() != self.n_qubits {
                    return Err(Error::SizeMismatch(p.n(), self.n_qubits));
                }
                p.support().ones().collect()
            } else {
                op.qubits().to_vec()
            };
            for &q in &qs {
                if q >= self.n_qubits {
                    return Err(Error::QubitRange(q));
                }
                if let Some(j) = busy.insert((op.time_step, q), i) {
                    return Err(Error::Invalid(format!("qubit {q} used by ops {j} and {i} at t={}", op.time_step)));
                }
            }
            if !op.ideal && qs.iter().any(|&q| self.roles[q] == QubitRole::Reference) {
                return Err(Error::Invalid(format!("op {i}: noisy op on a reference qubit")));
            }
            if op.kind == OpKind::Cnot && op.targets[0] == op.targets[1] {
                return Err(Error::Invalid(format!("op {i}: CNOT on a single qubit")));
            }
        }
        // syndrome life cycle
        let mut live = vec![false; self.n_qubits];
        let mut bounds = self.round_boundaries.iter().peekable();
        for (i, op) in self.ops.iter().enumerate() {
            while bounds.peek().is_some_and(|&&b| b <= op.time_step) {
                bounds.next();
                if let Some(q) = (0..self.n_qubits).find(|&q| live[q] && self.roles[q] == QubitRole::Syndrome) {
                    return Err(Error::Invalid(format!("syndrome qubit {q} still live at a round boundary")));
                }
            }
            for &q in op.qubits() {
                if self.roles[q] != QubitRole::Syndrome {
                    continue;
                }
                match op.kind {
                    OpKind::PrepZ | OpKind::PrepX => live[q] = true,
                    _ if !live[q] => return Err(Error::Invalid(format!("op {i} uses syndrome qubit {q} before preparation"))),
                    OpKind::MeasZ | OpKind::MeasX => live[q] = false,
                    _ => {}
                }
            }
        }
        if let Some(q) = (0..self.n_qubits).find(|&q| live[q] && self.roles[q] == QubitRole::Syndrome) {
            return Err(Error::Invalid(format!("syndrome qubit {q} never measured")));
        }
        Ok(())
    }

    /// Line-oriented export, one op per line: `t KIND q0 [q1]`. Ideal ops
    /// carry a trailing `ideal`; `MEAS_PAULI` lists its operand as a signed
    /// Pauli string instead of qubits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# qubits {}", self.n_qubits);
        let roles: String = self
            .roles
            .iter()
            .map(|r| match r {
                QubitRole::Data => 'D',
                QubitRole::Syndrome => 'S',
                QubitRole::Reference => 'R',
            })
            .collect();
        let _ = writeln!(s, "# roles {roles}");
        let rb: Vec<String> = self.round_boundaries.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(s, "# rounds {}", rb.join(" "));
        for op in &self.ops {
            let _ = write!(s, "{} {}", op.time_step, op.kind.name());
            if op.kind == OpKind::MeasPauli {
                let _ = write!(s, " {}", self.paulis[op.pauli]);
            } else {
                for q in op.qubits() {
                    let _ = write!(s, " {q}");
                }
            }
            if op.ideal {
                s.push_str(" ideal");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut c = Circuit::default();
        for (ln, line) in text.lines().enumerate() {
            let bad = |m: &str| Error::Parse(format!("line {}: {m}", ln + 1));
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks[0] == "#" {
                match toks.get(1) {
                    Some(&"qubits") => c.n_qubits = toks.get(2).and_then(|t| t.parse().ok()).ok_or_else(|| bad("qubit count"))?,
                    Some(&"roles") => {
                        c.roles = toks
                            .get(2)
                            .unwrap_or(&"")
                            .chars()
                            .map(|ch| match ch {
                                'D' => Ok(QubitRole::Data),
                                'S' => Ok(QubitRole::Syndrome),
                                'R' => Ok(QubitRole::Reference),
                                _ => Err(bad("qubit role")),
                            })
                            .collect::<Result<_>>()?
                    }
                    Some(&"rounds") => {
                        c.round_boundaries = toks[2..]
                            .iter()
                            .map(|t| t.parse().map_err(|_| bad("round boundary")))
                            .collect::<Result<_>>()?
                    }
                    _ => {}
                }
                continue;
            }
            let time_step: usize = toks[0].parse().map_err(|_| bad("time step"))?;
            let kind = toks.get(1).and_then(|k| OpKind::from_name(k)).ok_or_else(|| bad("op kind"))?;
            let ideal = toks.last() == Some(&"ideal");
            let args = &toks[2..toks.len() - ideal as usize];
            let mut op = CircuitOp {
                kind,
                targets: [0, 0],
                time_step,
                ideal,
                pauli: 0,
            };
            if kind == OpKind::MeasPauli {
                let p = PauliOp::parse(args.first().ok_or_else(|| bad("Pauli operand"))?)?;
                op.pauli = c.paulis.len();
                c.paulis.push(p);
            } else {
                if args.len() != kind.arity() {
                    return Err(bad("wrong number of targets"));
                }
                for (k, a) in args.iter().enumerate() {
                    op.targets[k] = a.parse().map_err(|_| bad("qubit index"))?;
                }
            }
            if kind.is_measurement() {
                c.n_measurements += 1;
            }
            c.ops.push(op);
        }
        if c.roles.len() != c.n_qubits {
            c.roles.resize(c.n_qubits, QubitRole::Data);
        }
        Ok(c)
    }
}

/// Incremental construction with automatic IDLE insertion: every live qubit
/// not touched in a noisy layer idles through it.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    c: Circuit,
    t: usize,
    live: Vec<bool>,
    syndrome_pool: Vec<usize>,
}

impl CircuitBuilder {
    /// Data qubits `0..n_data` start live (an ideal preamble prepares them).
    pub fn new(n_data: usize) -> Self {
        CircuitBuilder {
            c: Circuit::new(n_data),
            t: 0,
            live: vec![true; n_data],
            syndrome_pool: Vec::new(),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.c
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn n_measurements(&self) -> usize {
        self.c.n_measurements
    }

    pub fn add_qubit(&mut self, role: QubitRole) -> usize {
        self.c.n_qubits += 1;
        self.c.roles.push(role);
        self.live.push(role == QubitRole::Data);
        for p in &mut self.c.paulis {
            *p = p.remap(self.c.n_qubits, |q| q);
        }
        self.c.n_qubits - 1
    }

    /// The first `k` syndrome qubits, growing the pool as needed.
    pub fn syndrome_qubits(&mut self, k: usize) -> Vec<usize> {
        while self.syndrome_pool.len() < k {
            let q = self.add_qubit(QubitRole::Syndrome);
            self.syndrome_pool.push(q);
        }
        self.syndrome_pool[..k].to_vec()
    }

    pub fn mark_round(&mut self) {
        self.c.round_boundaries.push(self.t);
    }

    fn push(&mut self, kind: OpKind, targets: [usize; 2], ideal: bool, pauli: usize) -> Option<usize> {
        self.c.ops.push(CircuitOp {
            kind,
            targets,
            time_step: self.t,
            ideal,
            pauli,
        });
        if kind.is_measurement() {
            self.c.n_measurements += 1;
            Some(self.c.n_measurements - 1)
        } else {
            None
        }
    }

    fn layer_impl(&mut self, ops: &[(OpKind, usize, usize)], ideal: bool) -> Vec<usize> {
        let mut touched = vec![false; self.c.n_qubits];
        let mut meas = Vec::new();
        for &(kind, a, b) in ops {
            assert!(kind != OpKind::MeasPauli, "use measure_pauli");
            for &q in &[a, b][..kind.arity()] {
                assert!(!touched[q], "qubit {q} used twice in one layer");
                touched[q] = true;
                match kind {
                    OpKind::PrepZ | OpKind::PrepX => self.live[q] = self.c.roles[q] != QubitRole::Reference,
                    OpKind::MeasZ | OpKind::MeasX => self.live[q] = false,
                    _ => {}
                }
            }
            meas.extend(self.push(kind, [a, b], ideal, 0));
        }
        if !ideal {
            for q in 0..self.c.n_qubits {
                if !touched[q] && self.live[q] {
                    self.push(OpKind::Idle, [q, 0], false, 0);
                }
            }
        }
        self.t += 1;
        meas
    }

    /// One noisy time step. Returns measurement record indices in op order.
    pub fn layer(&mut self, ops: &[(OpKind, usize, usize)]) -> Vec<usize> {
        self.layer_impl(ops, false)
    }

    pub fn ideal_layer(&mut self, ops: &[(OpKind, usize, usize)]) -> Vec<usize> {
        self.layer_impl(ops, true)
    }

    /// Ideal measurement of a Pauli on the current register, in its own step.
    pub fn measure_pauli(&mut self, p: &PauliOp) -> usize {
        let p = p.remap(self.c.n_qubits, |q| q);
        self.c.paulis.push(p);
        let k = self.c.paulis.len() - 1;
        let m = self.push(OpKind::MeasPauli, [0, 0], true, k).unwrap();
        self.t += 1;
        m
    }

    pub fn finish(self) -> Circuit {
        self.c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Allocation {
    /// One ancilla per face, measuring X then Z.
    OnePerFace,
    /// One ancilla per check, X and Z interleaved.
    OnePerCheck,
}

/// CNOT time slots for interleaved extraction, indexed by basis (X, Z) and
/// by the position of the data qubit on its tile, in the vertex order of
/// [`Tile::vertices`]. Checks cut from a tile use the slots of the tile's
/// vertices that survive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interleaving {
    pub square: [[u8; 4]; 2],
    pub octagon: [[u8; 8]; 2],
}

impl Interleaving {
    /// Ten CNOT steps per round. Found by a constrained search over slot
    /// assignments: every X/Z pair commutes and no single circuit fault in
    /// a d = 3 or d = 5 memory is misdecoded by the order-1 lookup table.
    pub const DEFAULT: Interleaving = Interleaving {
        square: [[8, 5, 6, 4], [6, 3, 8, 5]],
        octagon: [[9, 7, 1, 3, 5, 4, 0, 6], [7, 9, 8, 1, 4, 5, 2, 0]],
    };

    fn slot(&self, basis: Basis, color: FaceColor, pos: Point) -> Option<usize> {
        let tile = tiling::tiles_at(pos).into_iter().find(|t| t.color() == color)?;
        let k = tile.vertices().iter().position(|&v| v == pos)?;
        let b = (basis == Basis::Z) as usize;
        Some(match tile {
            Tile::Square(..) => self.square[b][k] as usize,
            Tile::Octagon(..) => self.octagon[b][k] as usize,
        })
    }
}

impl Default for Interleaving {
    fn default() -> Self {
        Interleaving::DEFAULT
    }
}

/// CNOT layers of one extraction phase: `(check, data qubit)` per slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase {
    pub checks: Vec<usize>,
    pub layers: Vec<Vec<(usize, usize)>>,
}

/// A reusable extraction round for a fixed check list.
#[derive(Clone, Debug)]
pub struct RoundPlan {
    pub checks: Vec<Check>,
    pub allocation: Allocation,
    /// Ancilla slot per check.
    pub ancilla_of: Vec<usize>,
    pub n_ancillas: usize,
    pub phases: Vec<Phase>,
    /// Whether X and Z checks share a phase.
    pub interleaved: bool,
}

impl RoundPlan {
    /// Time steps per round: prep, CNOT layers and measurement per phase.
    pub fn steps(&self) -> usize {
        self.phases.iter().map(|p| p.layers.len() + 2).sum()
    }
}

/// Plan one extraction round.
///
/// `positions[q]` is the lattice position of data qubit `q`. One ancilla per
/// face measures the face's X check and then its Z check, each ladder in
/// ascending vertex order. One ancilla per check runs all checks at once,
/// with CNOT slots from the interleaving template; if the template does not
/// apply cleanly (conflicts, or an X/Z pair whose CNOTs would not commute)
/// the plan falls back to the X-then-Z layout.
pub fn plan_round(checks: &[Check], positions: &[Point], allocation: Allocation, il: &Interleaving) -> RoundPlan {
    let (ancilla_of, n_ancillas) = match allocation {
        Allocation::OnePerCheck => ((0..checks.len()).collect(), checks.len()),
        Allocation::OnePerFace => {
            let mut slot: BTreeMap<&[usize], usize> = BTreeMap::new();
            let mut order = Vec::new();
            for c in checks {
                let n = slot.len();
                order.push(*slot.entry(&c.support).or_insert(n));
            }
            (order, slot.len())
        }
    };
    let ascending = |c: usize| -> Vec<(usize, usize, usize)> { checks[c].support.iter().enumerate().map(|(k, &q)| (c, q, k)).collect() };
    let by_basis = |b: Basis| -> Vec<usize> { (0..checks.len()).filter(|&c| checks[c].basis == b).collect() };
    let sequential = |asc: bool| -> Vec<Phase> {
        [Basis::X, Basis::Z]
            .into_iter()
            .map(&by_basis)
            .filter(|cs| !cs.is_empty())
            .map(|cs| {
                let items: Vec<_> = cs
                    .iter()
                    .flat_map(|&c| {
                        if asc {
                            ascending(c)
                        } else {
                            template_items(&checks[c], c, positions, il).unwrap_or_else(|| ascending(c))
                        }
                    })
                    .collect();
                Phase {
                    layers: legalize(items, &ancilla_of).0,
                    checks: cs,
                }
            })
            .collect()
    };
    let base = |phases| RoundPlan {
        checks: checks.to_vec(),
        allocation,
        ancilla_of: ancilla_of.clone(),
        n_ancillas,
        phases,
        interleaved: false,
    };
    if checks.is_empty() {
        return base(Vec::new());
    }
    match allocation {
        Allocation::OnePerFace => base(sequential(true)),
        Allocation::OnePerCheck => {
            let mut items = Vec::new();
            for (c, ch) in checks.iter().enumerate() {
                match template_items(ch, c, positions, il) {
                    Some(v) => items.extend(v),
                    None => return base(sequential(true)),
                }
            }
            let (layers, exact) = legalize(items, &ancilla_of);
            let phase = Phase {
                checks: (0..checks.len()).collect(),
                layers,
            };
            if exact && commuting_interleave(checks, &phase) {
                RoundPlan {
                    interleaved: true,
                    ..base(vec![phase])
                }
            } else {
                base(sequential(false))
            }
        }
    }
}

fn template_items(ch: &Check, c: usize, positions: &[Point], il: &Interleaving) -> Option<Vec<(usize, usize, usize)>> {
    ch.support
        .iter()
        .map(|&q| il.slot(ch.basis, ch.color, *positions.get(q)?).map(|t| (c, q, t)))
        .collect()
}

/// Place `(check, qubit, desired time)` items; each goes at its desired time
/// or the first later step where its ancilla and data qubit are free.
/// Returns the compacted layers and whether every item got its desired slot.
fn legalize(mut items: Vec<(usize, usize, usize)>, ancilla_of: &[usize]) -> (Vec<Vec<(usize, usize)>>, bool) {
    items.sort_by_key(|&(c, q, t)| (t, c, q));
    let mut anc_last: HashMap<usize, usize> = HashMap::new();
    let mut busy: HashMap<(usize, usize), ()> = HashMap::new();
    let mut placed: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut exact = true;
    for (c, q, want) in items {
        let a = ancilla_of[c];
        let mut t = want.max(anc_last.get(&a).map_or(0, |&l| l + 1));
        while busy.contains_key(&(t, q)) {
            t += 1;
        }
        exact &= t == want;
        busy.insert((t, q), ());
        anc_last.insert(a, t);
        placed.entry(t).or_default().push((c, q));
    }
    (placed.into_values().collect(), exact)
}

/// X- and Z-check circuits sharing data qubits commute iff the number of
/// shared qubits the X ancilla reaches first is even.
fn commuting_interleave(checks: &[Check], phase: &Phase) -> bool {
    let mut when: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, layer) in phase.layers.iter().enumerate() {
        for &(c, q) in layer {
            when.insert((c, q), t);
        }
    }
    let xs: Vec<usize> = phase.checks.iter().copied().filter(|&c| checks[c].basis == Basis::X).collect();
    let zs: Vec<usize> = phase.checks.iter().copied().filter(|&c| checks[c].basis == Basis::Z).collect();
    for &x in &xs {
        for &z in &zs {
            let first = checks[x]
                .support
                .iter()
                .filter(|q| checks[z].support.contains(q))
                .filter(|&&q| when[&(x, q)] < when[&(z, q)])
                .count();
            if first % 2 == 1 {
                return false;
            }
        }
    }
    true
}

/// Emit one round; returns the measurement index of every check.
pub fn emit_round(b: &mut CircuitBuilder, plan: &RoundPlan) -> Vec<usize> {
    emit_round_with(b, plan, &[]).0
}

/// Like [`emit_round`], with extra one-qubit ops (data preparation or
/// destructive measurement) sharing the round's first time step. Returns
/// the check measurements and the measurements among `extra`.
pub fn emit_round_with(b: &mut CircuitBuilder, plan: &RoundPlan, extra: &[(OpKind, usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    b.mark_round();
    let anc = b.syndrome_qubits(plan.n_ancillas);
    let mut meas = vec![usize::MAX; plan.checks.len()];
    let mut extra_meas = Vec::new();
    let mut pending = extra.to_vec();
    if plan.phases.is_empty() && !pending.is_empty() {
        extra_meas = b.layer(&pending);
        pending.clear();
    }
    for phase in &plan.phases {
        let mut seen = vec![false; plan.n_ancillas];
        let mut prep = std::mem::take(&mut pending);
        let n_extra = prep.len();
        for &c in &phase.checks {
            let a = plan.ancilla_of[c];
            if !std::mem::replace(&mut seen[a], true) {
                let k = if plan.checks[c].basis == Basis::X {
                    OpKind::PrepX
                } else {
                    OpKind::PrepZ
                };
                prep.push((k, anc[a], 0));
            }
        }
        let m = b.layer(&prep);
        if n_extra > 0 {
            extra_meas = m;
        }
        for layer in &phase.layers {
            let ops: Vec<_> = layer
                .iter()
                .map(|&(c, q)| {
                    let a = anc[plan.ancilla_of[c]];
                    match plan.checks[c].basis {
                        Basis::X => (OpKind::Cnot, a, q),
                        Basis::Z => (OpKind::Cnot, q, a),
                    }
                })
                .collect();
            b.layer(&ops);
        }
        let ops: Vec<_> = phase
            .checks
            .iter()
            .map(|&c| {
                (
                    if plan.checks[c].basis == Basis::X {
                        OpKind::MeasX
                    } else {
                        OpKind::MeasZ
                    },
                    anc[plan.ancilla_of[c]],
                    0,
                )
            })
            .collect();
        for (&c, m) in phase.checks.iter().zip(b.layer(&ops)) {
            meas[c] = m;
        }
    }
    (meas, extra_meas)
}

/// One full extraction round for a single patch, on a fresh circuit.
pub fn extraction_round(patch: &crate::geometry::Patch, allocation: Allocation) -> Circuit {
    let plan = plan_round(&patch.checks(), &patch.positions(), allocation, &Interleaving::DEFAULT);
    let mut b = CircuitBuilder::new(patch.n());
    if !plan.checks.is_empty() {
        emit_round(&mut b, &plan);
    }
    b.finish()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Result<NoiseModel> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::Probability(p));
        }
        Ok(NoiseModel { p })
    }
}

/// Where noise can strike.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocKind {
    /// Pauli on one output qubit.
    One(usize),
    /// Pauli on both CNOT outputs.
    Two(usize, usize),
    /// Flip of measurement record entry.
    Flip(usize),
}

impl LocKind {
    /// Number of distinct non-trivial faults.
    pub fn n_paulis(self) -> u8 {
        match self {
            LocKind::One(_) => 3,
            LocKind::Two(..) => 15,
            LocKind::Flip(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseLocation {
    /// The op after which the fault acts.
    pub op: usize,
    pub kind: LocKind,
}

/// One concrete fault: location index and a Pauli code in `1..=n_paulis`.
/// Single-qubit codes 1, 2, 3 are X, Y, Z; a two-qubit code `v` puts
/// `v & 3` on the first qubit and `v >> 2` on the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fault {
    pub loc: usize,
    pub pauli: u8,
}

/// `(x, z)` bits of single-qubit code 0..=3 (I, X, Y, Z).
#[inline]
pub fn pauli_code_bits(code: u8) -> (bool, bool) {
    match code & 3 {
        0 => (false, false),
        1 => (true, false),
        2 => (true, true),
        _ => (false, true),
    }
}

fn pauli_code_symbol(code: u8) -> char {
    ['I', 'X', 'Y', 'Z'][(code & 3) as usize]
}

/// Every noise location, in op order. Noisy ops other than measurements
/// get a Pauli on their outputs; measurements get a record flip.
pub fn noise_locations(c: &Circuit) -> Vec<NoiseLocation> {
    let mut out = Vec::new();
    let mut m = 0;
    for (i, op) in c.ops.iter().enumerate() {
        let is_meas = op.kind.is_measurement();
        if !op.ideal {
            let kind = match op.kind {
                OpKind::MeasZ | OpKind::MeasX => Some(LocKind::Flip(m)),
                OpKind::MeasPauli => None,
                OpKind::Cnot => Some(LocKind::Two(op.targets[0], op.targets[1])),
                _ => Some(LocKind::One(op.targets[0])),
            };
            if let Some(kind) = kind {
                out.push(NoiseLocation { op: i, kind });
            }
        }
        if is_meas {
            m += 1;
        }
    }
    out
}

/// Draw faults at every location independently with probability `p`,
/// skipping ahead geometrically; each fault is uniform over its location's
/// non-identity Paulis. Appends to `out` in location order.
pub fn sample_faults<R: Rng + ?Sized>(locs: &[NoiseLocation], p: f64, rng: &mut R, out: &mut Vec<Fault>) {
    if p <= 0.0 {
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut i = 0usize;
    loop {
        if p < 1.0 {
            let u: f64 = rng.gen::<f64>();
            // P(skip >= k) = (1-p)^k
            let skip = ((1.0 - u).ln() / log_q).floor();
            if !skip.is_finite() || skip >= (locs.len() - i.min(locs.len())) as f64 {
                return;
            }
            i += skip as usize;
        }
        if i >= locs.len() {
            return;
        }
        let m = locs[i].kind.n_paulis();
        let pauli = if m == 1 { 1 } else { rng.gen_range(1..=m) };
        out.push(Fault { loc: i, pauli });
        i += 1;
    }
}

/// One inserted fault, spelled out for the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRecord {
    pub op: usize,
    pub time_step: usize,
    pub qubits: Vec<usize>,
    /// Pauli letters on `qubits`, or `FLIP` for a measurement flip.
    pub pauli: String,
    pub fault: Fault,
}

#[derive(Clone, Debug)]
pub struct NoisyCircuit {
    pub circuit: Circuit,
    pub faults: Vec<Fault>,
}

impl NoisyCircuit {
    pub fn records(&self) -> Vec<FaultRecord> {
        let locs = noise_locations(&self.circuit);
        self.faults.iter().map(|f| fault_record(&self.circuit, &locs, *f)).collect()
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("fault records serialize")
    }
}

pub fn fault_record(c: &Circuit, locs: &[NoiseLocation], f: Fault) -> FaultRecord {
    let l = locs[f.loc];
    let (qubits, pauli) = match l.kind {
        LocKind::One(q) => (vec![q], pauli_code_symbol(f.pauli).to_string()),
        LocKind::Two(a, b) => (
            vec![a, b],
            format!("{}{}", pauli_code_symbol(f.pauli), pauli_code_symbol(f.pauli >> 2)),
        ),
        LocKind::Flip(_) => (c.ops[l.op].qubits().to_vec(), "FLIP".to_string()),
    };
    FaultRecord {
        op: l.op,
        time_step: c.ops[l.op].time_step,
        qubits,
        pauli,
        fault: f,
    }
}

/// Sample the noise for one run. The circuit itself is unchanged; the
/// inserted faults are returned as annotations.
pub fn apply_noise(c: &Circuit, nm: NoiseModel, rng_seed: u64) -> NoisyCircuit {
    let locs = noise_locations(c);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut faults = Vec::new();
    sample_faults(&locs, nm.p, &mut rng, &mut faults);
    NoisyCircuit {
        circuit: c.clone(),
        faults,
    }
}

/// Effect of a fault set relative to the noiseless run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultEffect {
    pub faults: Vec<Fault>,
    /// Flipped measurement-record entries.
    pub flips: Bits,
    /// Pauli left on the data qubits at the end (syndrome qubits cleared).
    pub residual: PauliOp,
}

/// Hard cap on materialized enumeration entries.
pub const MAX_ENUMERATION: usize = 4_000_000;

/// All faults of the given order (1 or 2) with their effects, in
/// lexicographic fault order. Order-2 entries combine distinct locations.
pub fn fault_enumeration(c: &Circuit, order: usize) -> Result<Vec<FaultEffect>> {
    if !(1..=2).contains(&order) {
        return Err(Error::Invalid(format!("fault order must be 1 or 2, got {order}")));
    }
    let sim = FrameSim::new(c);
    let singles = sim.single_fault_effects();
    if order == 1 {
        return Ok(singles);
    }
    let n_pairs: usize = {
        let locs = sim.locations();
        let mut per_loc = vec![0usize; locs.len()];
        for s in &singles {
            per_loc[s.faults[0].loc] += 1;
        }
        let total: usize = per_loc.iter().sum();
        let same: usize = per_loc.iter().map(|k| k * k).sum();
        total + (total * total - same) / 2
    };
    if n_pairs > MAX_ENUMERATION {
        return Err(Error::TooLarge(format!("{n_pairs} order-2 fault entries exceed {MAX_ENUMERATION}")));
    }
    let mut out = singles.clone();
    for i in 0..singles.len() {
        for j in i + 1..singles.len() {
            let (a, b) = (&singles[i], &singles[j]);
            if a.faults[0].loc == b.faults[0].loc {
                continue;
            }
            out.push(FaultEffect {
                faults: vec![a.faults[0], b.faults[0]],
                flips: a.flips.xor(&b.flips),
                residual: a.residual.mul_unsigned(&b.residual),
            });
        }
    }
    Ok(out)
}

/// Seeded generator for one trial.
pub fn trial_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(trial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_color_patch;

    #[test]
    fn extraction_counts() {
        let p = build_color_patch(3).unwrap();
        let c = extraction_round(&p, Allocation::OnePerFace);
        assert_eq!(c.roles.iter().filter(|r| **r == QubitRole::Syndrome).count(), 3);
        assert_eq!(c.n_measurements, 6);
        c.validate().unwrap();
        let c = extraction_round(&p, Allocation::OnePerCheck);
        assert_eq!(c.roles.iter().filter(|r| **r == QubitRole::Syndrome).count(), 6);
        assert_eq!(c.n_measurements, 6);
        c.validate().unwrap();
        let c1 = extraction_round(&build_color_patch(1).unwrap(), Allocation::OnePerFace);
        assert!(c1.ops.is_empty());
    }

    #[test]
    fn cnots_per_data_qubit_match_check_incidence() {
        for alloc in [Allocation::OnePerFace, Allocation::OnePerCheck] {
            let p = build_color_patch(5).unwrap();
            let c = extraction_round(&p, alloc);
            let mut uses = vec![0; p.n()];
            for op in c.ops.iter().filter(|o| o.kind == OpKind::Cnot) {
                for &q in op.qubits() {
                    if q < p.n() {
                        uses[q] += 1;
                    }
                }
            }
            let inc = p.incidence();
            for q in 0..p.n() {
                assert_eq!(uses[q], 2 * inc[q], "{alloc:?} qubit {q}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let mut b = CircuitBuilder::new(2);
        b.measure_pauli(&PauliOp::parse("XX").unwrap());
        let s = b.syndrome_qubits(1)[0];
        b.layer(&[(OpKind::PrepZ, s, 0)]);
        b.layer(&[(OpKind::Cnot, 0, s), (OpKind::H, 1, 0)]);
        b.layer(&[(OpKind::MeasZ, s, 0)]);
        let c = b.finish();
        let back = Circuit::from_text(&c.to_text()).unwrap();
        assert_eq!(back.to_text(), c.to_text());
        assert_eq!(back.n_measurements, 2);
        assert_eq!(back.ops, c.ops);
    }

    #[test]
    fn idles_fill_untouched_live_qubits() {
        let mut b = CircuitBuilder::new(3);
        b.layer(&[(OpKind::H, 0, 0)]);
        let c = b.finish();
        assert_eq!(c.count(OpKind::Idle), 2);
    }

    #[test]
    fn noise_zero_and_one() {
        let p = build_color_patch(3).unwrap();
        let c = extraction_round(&p, Allocation::OnePerFace);
        let n0 = apply_noise(&c, NoiseModel::new(0.0).unwrap(), 1);
        assert!(n0.faults.is_empty());
        assert_eq!(n0.circuit.ops, c.ops);
        let n1 = apply_noise(&c, NoiseModel::new(1.0).unwrap(), 1);
        assert_eq!(n1.faults.len(), noise_locations(&c).len());
        assert!(NoiseModel::new(1.5).is_err());
        assert!(NoiseModel::new(-0.1).is_err());
        let again = apply_noise(&c, NoiseModel::new(0.3).unwrap(), 9);
        assert_eq!(again.faults, apply_noise(&c, NoiseModel::new(0.3).unwrap(), 9).faults);
    }

    #[test]
    fn two_qubit_faults_uniform() {
        // chi-square over the 15 two-qubit Paulis
        let locs = vec![
            NoiseLocation {
                op: 0,
                kind: LocKind::Two(0, 1)
            };
            1
        ];
        let mut counts = [0usize; 16];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut out = Vec::new();
        for _ in 0..100_000 {
            out.clear();
            sample_faults(&locs, 1.0, &mut rng, &mut out);
            counts[out[0].pauli as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        let e = 100_000.0 / 15.0;
        let chi2: f64 = counts[1..].iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 14 dof, p = 0.001 critical value 36.1
        assert!(chi2 < 36.1, "chi2 = {chi2}");
    }

    #[test]
    fn geometric_sampling_rate() {
        let locs = vec![
            NoiseLocation {
                op: 0,
                kind: LocKind::One(0)
            };
            1000
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut out = Vec::new();
        for _ in 0..200 {
            sample_faults(&locs, 0.01, &mut rng, &mut out);
        }
        let rate = out.len() as f64 / 200_000.0;
        assert!((rate - 0.01).abs() < 0.001, "{rate}");
    }
}
