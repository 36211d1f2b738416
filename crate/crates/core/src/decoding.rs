//! Decoders: exhaustive minimum-weight decoding of code-capacity syndromes
//! and a circuit-level lookup table built from fault enumeration.

use crate::circuit::{Circuit, Fault};
use crate::gf2::{nullspace, Echelon};
use crate::pauli::{CheckSet, Pauli, PauliOp};
use crate::sim::{FrameSim, Parity};
use crate::{Bits, Error, Result};
use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// Largest qubit count accepted by [`decode_minweight`].
pub const MINWEIGHT_MAX_QUBITS: usize = 25;

/// Which checks anticommute with `p`.
pub fn syndrome_of(cs: &CheckSet, p: &PauliOp) -> Bits {
    Bits::from_bools(&cs.checks.iter().map(|c| !c.commutes(p)).collect::<Vec<_>>())
}

/// Minimum-weight vector in the coset `e0 + span(kernel)`; ties go to the
/// lexicographically smallest bit pattern (qubit 0 first).
fn min_coset(e0: &Bits, kernel: &[Bits], weight: impl Fn(&Bits) -> usize) -> Bits {
    let k = kernel.len();
    let mut best = e0.clone();
    let mut best_w = weight(&best);
    let mut cur = e0.clone();
    // Gray-code walk over the coset
    for i in 1u64..(1u64 << k) {
        let bit = i.trailing_zeros() as usize;
        cur.xor_assign(&kernel[bit]);
        let w = weight(&cur);
        if w < best_w || (w == best_w && lex_less(&cur, &best)) {
            best = cur.clone();
            best_w = w;
        }
    }
    best
}

fn lex_less(a: &Bits, b: &Bits) -> bool {
    for i in 0..a.len() {
        match (a.get(i), b.get(i)) {
            (false, true) => return true,
            (true, false) => return false,
            _ => {}
        }
    }
    false
}

/// Solve `H e = s` over GF(2) for the rows of `h` (each of length `ncols`).
fn particular(h: &[Bits], s: &Bits, ncols: usize) -> Option<Bits> {
    // transpose: columns of H as rows, solve combination of columns
    let cols: Vec<Bits> = (0..ncols)
        .map(|j| Bits::from_bools(&h.iter().map(|r| r.get(j)).collect::<Vec<_>>()))
        .collect();
    if h.is_empty() {
        return s.is_zero().then(|| Bits::zeros(ncols));
    }
    Echelon::from_rows(&cols).solve(s)
}

/// Exhaustive minimum-weight correction reproducing `syndrome` (one bit per
/// check of `cs`, in order). CSS check sets are decoded as two independent
/// X/Z problems; otherwise the symplectic problem is solved directly.
pub fn decode_minweight(cs: &CheckSet, syndrome: &Bits) -> Result<PauliOp> {
    let n = cs.n;
    if n > MINWEIGHT_MAX_QUBITS {
        return Err(Error::TooLarge(format!(
            "minimum-weight decoding limited to {MINWEIGHT_MAX_QUBITS} qubits, got {n}"
        )));
    }
    if syndrome.len() != cs.len() {
        return Err(Error::SizeMismatch(syndrome.len(), cs.len()));
    }
    let infeasible = || Error::Invalid("syndrome not reachable by any Pauli".into());
    if cs.is_css() {
        let mut out = PauliOp::identity(n);
        // X errors are seen by Z checks, Z errors by X checks
        for (detect_z, set) in [(true, Pauli::X), (false, Pauli::Z)] {
            let idx: Vec<usize> = (0..cs.len())
                .filter(|&i| {
                    let c = &cs.checks[i];
                    if detect_z {
                        !c.z.is_zero()
                    } else {
                        !c.x.is_zero()
                    }
                })
                .collect();
            let h: Vec<Bits> = idx
                .iter()
                .map(|&i| if detect_z { cs.checks[i].z.clone() } else { cs.checks[i].x.clone() })
                .collect();
            let s = Bits::from_bools(&idx.iter().map(|&i| syndrome.get(i)).collect::<Vec<_>>());
            let e0 = particular(&h, &s, n).ok_or_else(infeasible)?;
            let ker = nullspace(&h, n);
            if ker.len() > 30 {
                return Err(Error::TooLarge(format!("coset of dimension {}", ker.len())));
            }
            let e = min_coset(&e0, &ker, |v| v.count_ones());
            for q in e.ones() {
                let cur = out.get(q);
                let (x, z) = cur.bits();
                out.set(
                    q,
                    if set == Pauli::X {
                        Pauli::from_bits(true, z)
                    } else {
                        Pauli::from_bits(x, true)
                    },
                );
            }
        }
        // a mixed syndrome bit (checks of both types) would break the split
        if syndrome_of(cs, &out) != *syndrome {
            return Err(infeasible());
        }
        return Ok(out);
    }
    // symplectic: anticommutation with check c is <x,c.z> + <z,c.x>
    let h: Vec<Bits> = cs.checks.iter().map(|c| c.z.concat(&c.x)).collect();
    let e0 = particular(&h, syndrome, 2 * n).ok_or_else(infeasible)?;
    let ker = nullspace(&h, 2 * n);
    if ker.len() > 26 {
        return Err(Error::TooLarge(format!("coset of dimension {}", ker.len())));
    }
    let w = |v: &Bits| v.slice(0, n).or(&v.slice(n, 2 * n)).count_ones();
    let e = min_coset(&e0, &ker, w);
    Ok(PauliOp::from_parts(e.slice(0, n), e.slice(n, 2 * n), false))
}

/// Per-round check outcomes of one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeHistory {
    pub rounds: Vec<Bits>,
}

impl SyndromeHistory {
    /// Round 0 raw, then XOR of consecutive rounds.
    pub fn differences(&self) -> Vec<Bits> {
        let mut out = Vec::with_capacity(self.rounds.len());
        for (r, row) in self.rounds.iter().enumerate() {
            if r == 0 {
                out.push(row.clone());
            } else {
                out.push(row.xor(&self.rounds[r - 1]));
            }
        }
        out
    }

    pub fn from_differences(diffs: &[Bits]) -> Self {
        let mut rounds: Vec<Bits> = Vec::with_capacity(diffs.len());
        for (r, d) in diffs.iter().enumerate() {
            if r == 0 {
                rounds.push(d.clone());
            } else {
                rounds.push(d.xor(&rounds[r - 1]));
            }
        }
        SyndromeHistory { rounds }
    }

    /// Rows of measurement outcomes from a record.
    pub fn from_record(round_meas: &[Vec<usize>], bits: &[bool]) -> Self {
        SyndromeHistory {
            rounds: round_meas
                .iter()
                .map(|r| Bits::from_bools(&r.iter().map(|&m| bits[m]).collect::<Vec<_>>()))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rounds.iter().all(|r| r.is_zero())
    }
}

/// One table entry: what the decoder predicts for a signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    /// Predicted observable flips.
    pub observables: Bits,
    /// Residual data Pauli of the representative fault set.
    pub residual: PauliOp,
    pub order: u8,
    pub weight: u32,
    pub faults: Vec<Fault>,
}

/// Decoder output, applied to the Pauli frame only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameUpdate {
    pub observables: Bits,
    pub correction: PauliOp,
}

#[derive(Clone, Debug)]
pub struct LookupTable {
    pub built_order: u8,
    pub circuit_hash: [u8; 32],
    pub n_detectors: usize,
    pub n_observables: usize,
    pub n_data: usize,
    pub entries: HashMap<Bits, Entry>,
    /// Signatures shared by fault sets with different observable effects.
    pub conflicts: usize,
    /// For every detector that is a round difference, its (round, check).
    pub history_layout: Vec<Option<(usize, usize)>>,
}

pub fn circuit_hash(c: &Circuit) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(c.to_text().as_bytes());
    h.finalize().into()
}

fn parities(sets: &[Parity], flips: &Bits) -> Bits {
    Bits::from_bools(
        &sets
            .iter()
            .map(|p| p.meas.iter().fold(false, |a, &m| a ^ flips.get(m)))
            .collect::<Vec<_>>(),
    )
}

/// Compact single-fault effect.
struct Single {
    fault: Fault,
    sig: Bits,
    obs: Bits,
    residual: PauliOp,
}

impl LookupTable {
    fn consider(&mut self, sig: Bits, cand: Entry) {
        match self.entries.get_mut(&sig) {
            None => {
                self.entries.insert(sig, cand);
            }
            Some(e) => {
                if e.observables != cand.observables {
                    self.conflicts += 1;
                }
                let key = |x: &Entry| (x.order, x.weight, x.faults.clone());
                if key(&cand) < key(e) {
                    *e = cand;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Prediction for a detector signature; unknown signatures decode to
    /// the identity.
    pub fn decode(&self, events: &Bits) -> FrameUpdate {
        match self.entries.get(events) {
            Some(e) => FrameUpdate {
                observables: e.observables.clone(),
                correction: e.residual.clone(),
            },
            None => FrameUpdate {
                observables: Bits::zeros(self.n_observables),
                correction: PauliOp::identity(self.n_data),
            },
        }
    }

    /// Versioned binary image: magic, version, circuit hash, order, counts,
    /// then the entries sorted by signature.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(LOOKUP_MAGIC);
        out.extend_from_slice(&LOOKUP_VERSION.to_le_bytes());
        out.extend_from_slice(&self.circuit_hash);
        out.push(self.built_order);
        for v in [
            self.entries.len(),
            self.n_detectors,
            self.n_observables,
            self.n_data,
            self.conflicts,
        ] {
            out.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for l in &self.history_layout {
            let (r, c) = l.map_or((u32::MAX, u32::MAX), |(r, c)| (r as u32, c as u32));
            out.extend_from_slice(&r.to_le_bytes());
            out.extend_from_slice(&c.to_le_bytes());
        }
        let mut keys: Vec<&Bits> = self.entries.keys().collect();
        keys.sort_by(|a, b| a.words().cmp(b.words()));
        let put_bits = |out: &mut Vec<u8>, b: &Bits| {
            for w in b.words() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        };
        for k in keys {
            let e = &self.entries[k];
            put_bits(&mut out, k);
            put_bits(&mut out, &e.observables);
            put_bits(&mut out, &e.residual.x);
            put_bits(&mut out, &e.residual.z);
            out.push(e.order);
            out.extend_from_slice(&e.weight.to_le_bytes());
            out.push(e.faults.len() as u8);
            for f in &e.faults {
                out.extend_from_slice(&(f.loc as u64).to_le_bytes());
                out.push(f.pauli);
            }
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let mut r = Reader { b, i: 0 };
        if r.take(4)? != LOOKUP_MAGIC {
            return Err(Error::Parse("not a lookup table".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != LOOKUP_VERSION {
            return Err(Error::Parse(format!("unsupported lookup table version {version}")));
        }
        let circuit_hash: [u8; 32] = r.take(32)?.try_into().unwrap();
        let built_order = r.take(1)?[0];
        let count = r.u64()? as usize;
        let n_detectors = r.u64()? as usize;
        let n_observables = r.u64()? as usize;
        let n_data = r.u64()? as usize;
        let conflicts = r.u64()? as usize;
        let mut history_layout = Vec::with_capacity(n_detectors);
        for _ in 0..n_detectors {
            let a = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
            let c = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
            history_layout.push((a != u32::MAX).then_some((a as usize, c as usize)));
        }
        let mut entries = HashMap::with_capacity(count);
        for _ in 0..count {
            let sig = r.bits(n_detectors)?;
            let observables = r.bits(n_observables)?;
            let x = r.bits(n_data)?;
            let z = r.bits(n_data)?;
            let order = r.take(1)?[0];
            let weight = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
            let k = r.take(1)?[0] as usize;
            let mut faults = Vec::with_capacity(k);
            for _ in 0..k {
                let loc = r.u64()? as usize;
                let pauli = r.take(1)?[0];
                faults.push(Fault { loc, pauli });
            }
            entries.insert(
                sig,
                Entry {
                    observables,
                    residual: PauliOp::from_parts(x, z, false),
                    order,
                    weight,
                    faults,
                },
            );
        }
        if r.i != b.len() {
            return Err(Error::Parse("trailing bytes in lookup table".into()));
        }
        Ok(LookupTable {
            built_order,
            circuit_hash,
            n_detectors,
            n_observables,
            n_data,
            entries,
            conflicts,
            history_layout,
        })
    }
}

const LOOKUP_MAGIC: &[u8; 4] = b"CSLT";
const LOOKUP_VERSION: u32 = 1;

struct Reader<'a> {
    b: &'a [u8],
    i: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.i + k > self.b.len() {
            return Err(Error::Parse("truncated lookup table".into()));
        }
        self.i += k;
        Ok(&self.b[self.i - k..self.i])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bits(&mut self, len: usize) -> Result<Bits> {
        let mut b = Bits::zeros(len);
        for w in b.words_mut() {
            *w = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        }
        Ok(b)
    }
}

/// Lookup table over the given detectors and observables, from every fault
/// set of size `order` (1 or 2). Order-2 pairs are combined on the fly and
/// only kept for signatures that no single fault produces.
pub fn build_lookup(c: &Circuit, order: usize, detectors: &[Parity], observables: &[Parity]) -> Result<LookupTable> {
    if !(1..=2).contains(&order) {
        return Err(Error::Invalid(format!("lookup order must be 1 or 2, got {order}")));
    }
    let sim = FrameSim::new(c);
    let n_data = sim.data_qubits().len();
    let singles: Vec<Single> = sim
        .single_fault_effects()
        .into_iter()
        .map(|e| Single {
            fault: e.faults[0],
            sig: parities(detectors, &e.flips),
            obs: parities(observables, &e.flips),
            residual: e.residual,
        })
        .collect();
    let mut lt = LookupTable {
        built_order: order as u8,
        circuit_hash: circuit_hash(c),
        n_detectors: detectors.len(),
        n_observables: observables.len(),
        n_data,
        entries: HashMap::new(),
        conflicts: 0,
        history_layout: vec![None; detectors.len()],
    };
    for s in &singles {
        // silent faults carry no information
        if s.sig.is_zero() {
            continue;
        }
        lt.consider(
            s.sig.clone(),
            Entry {
                observables: s.obs.clone(),
                residual: s.residual.clone(),
                order: 1,
                weight: s.residual.weight() as u32,
                faults: vec![s.fault],
            },
        );
    }
    if order == 2 {
        let n = singles.len();
        let pairs = n * n.saturating_sub(1) / 2;
        if pairs > crate::circuit::MAX_ENUMERATION * 4 {
            return Err(Error::TooLarge(format!("{pairs} fault pairs")));
        }
        let mut pair_entries: HashMap<Bits, Entry> = HashMap::new();
        let mut pair_conflicts = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&singles[i], &singles[j]);
                if a.fault.loc == b.fault.loc {
                    continue;
                }
                let sig = a.sig.xor(&b.sig);
                if sig.is_zero() || lt.entries.contains_key(&sig) {
                    continue;
                }
                let obs = a.obs.xor(&b.obs);
                let w = a.residual.mul_unsigned(&b.residual).weight() as u32;
                match pair_entries.get_mut(&sig) {
                    None => {
                        pair_entries.insert(
                            sig,
                            Entry {
                                observables: obs,
                                residual: a.residual.mul_unsigned(&b.residual),
                                order: 2,
                                weight: w,
                                faults: vec![a.fault, b.fault],
                            },
                        );
                    }
                    Some(e) => {
                        if e.observables != obs {
                            pair_conflicts += 1;
                        }
                        // pairs arrive in lexicographic order, so only a
                        // strictly lighter residual replaces the entry
                        if w < e.weight {
                            *e = Entry {
                                observables: obs,
                                residual: a.residual.mul_unsigned(&b.residual),
                                order: 2,
                                weight: w,
                                faults: vec![a.fault, b.fault],
                            };
                        }
                    }
                }
                if lt.entries.len() + pair_entries.len() > crate::circuit::MAX_ENUMERATION {
                    return Err(Error::TooLarge(format!(
                        "lookup table exceeds {} entries",
                        crate::circuit::MAX_ENUMERATION
                    )));
                }
            }
        }
        lt.conflicts += pair_conflicts;
        lt.entries.extend(pair_entries);
    }
    Ok(lt)
}

/// Exhaustive single-fault check of a table: the number of single faults
/// whose decoded observable prediction differs from their true effect, and
/// the number of faults tried.
pub fn single_fault_failures(c: &Circuit, lt: &LookupTable, detectors: &[Parity], observables: &[Parity]) -> (usize, usize) {
    let effects = FrameSim::new(c).single_fault_effects();
    let failures = effects
        .iter()
        .filter(|e| lt.decode(&parities(detectors, &e.flips)).observables != parities(observables, &e.flips))
        .count();
    (failures, effects.len())
}

/// Decode a stage's syndrome history with a table whose detectors carry a
/// history layout. Differences that do not correspond to any detector are
/// ignored.
pub fn decode_history(lt: &LookupTable, sh: &SyndromeHistory) -> FrameUpdate {
    let diffs = sh.differences();
    let events = Bits::from_bools(
        &lt.history_layout
            .iter()
            .map(|l| l.is_some_and(|(r, c)| diffs.get(r).is_some_and(|row| c < row.len() && row.get(c))))
            .collect::<Vec<_>>(),
    );
    lt.decode(&events)
}
