//! Pauli frames: a single tracked frame for byproduct bookkeeping, and a
//! 64-lane bit-sliced frame simulator used for fault propagation.

use crate::circuit::{pauli_code_bits, Circuit, Fault, FaultEffect, LocKind, NoiseLocation, OpKind};
use crate::pauli::{Clifford1, Pauli, PauliOp};
use crate::{Bits, Result};

/// Pauli correction carried classically instead of being applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    pub frame: PauliOp,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        PauliFrame {
            frame: PauliOp::identity(n),
        }
    }

    /// Compose another correction into the frame (phases dropped).
    pub fn compose(&mut self, p: &PauliOp) -> Result<()> {
        if p.n() != self.frame.n() {
            return Err(crate::Error::SizeMismatch(p.n(), self.frame.n()));
        }
        self.frame = self.frame.mul_unsigned(p);
        Ok(())
    }

    pub fn gate1(&mut self, q: usize, g: Clifford1) {
        self.frame.conjugate(q, g);
        self.frame.neg = false;
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        let pa = self.frame.get(a).bits();
        let pb = self.frame.get(b).bits();
        // X spreads control→target, Z target→control
        self.frame.set(b, Pauli::from_bits(pb.0 ^ pa.0, pb.1));
        self.frame.set(a, Pauli::from_bits(pa.0, pa.1 ^ pb.1));
    }

    /// Whether a raw outcome of measuring `p` must be flipped.
    pub fn flips(&self, p: &PauliOp) -> bool {
        !self.frame.commutes(p)
    }

    /// Forget the frame on qubit `q` (after a reset).
    pub fn clear(&mut self, q: usize) {
        self.frame.set(q, Pauli::I);
    }
}

/// Bit-sliced frame simulator: bit `l` of every word is lane `l`.
pub struct FrameSim<'a> {
    c: &'a Circuit,
    locs: Vec<NoiseLocation>,
}

/// Frame state at the end of a batch run.
pub struct FrameOutput {
    /// One word per measurement: lanes whose record bit is flipped.
    pub flips: Vec<u64>,
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl FrameOutput {
    pub fn lane_flips(&self, lane: usize) -> Bits {
        let mut b = Bits::zeros(self.flips.len());
        for (i, w) in self.flips.iter().enumerate() {
            if (w >> lane) & 1 == 1 {
                b.set(i, true);
            }
        }
        b
    }

    pub fn lane_pauli(&self, lane: usize, qubits: &[usize], n: usize) -> PauliOp {
        let mut p = PauliOp::identity(n);
        for (k, &q) in qubits.iter().enumerate() {
            p.set(k, Pauli::from_bits((self.x[q] >> lane) & 1 == 1, (self.z[q] >> lane) & 1 == 1));
        }
        p
    }
}

impl<'a> FrameSim<'a> {
    pub fn new(c: &'a Circuit) -> Self {
        FrameSim {
            c,
            locs: crate::circuit::noise_locations(c),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        self.c
    }

    pub fn locations(&self) -> &[NoiseLocation] {
        &self.locs
    }

    /// Propagate up to 64 lanes of faults. `events` must be sorted by
    /// location; each is `(fault, lane)`.
    pub fn run(&self, events: &[(Fault, usize)]) -> FrameOutput {
        let c = self.c;
        let mut x = vec![0u64; c.n_qubits];
        let mut z = vec![0u64; c.n_qubits];
        let mut flips = vec![0u64; c.n_measurements];
        let mut m = 0usize;
        let mut ev = 0usize;
        for (i, op) in c.ops.iter().enumerate() {
            let [a, b] = op.targets;
            match op.kind {
                OpKind::PrepZ | OpKind::PrepX => {
                    x[a] = 0;
                    z[a] = 0;
                }
                OpKind::MeasZ => {
                    flips[m] = x[a];
                    m += 1;
                }
                OpKind::MeasX => {
                    flips[m] = z[a];
                    m += 1;
                }
                OpKind::MeasPauli => {
                    let p = &c.paulis[op.pauli];
                    let mut w = 0u64;
                    for q in p.x.ones() {
                        w ^= z[q];
                    }
                    for q in p.z.ones() {
                        w ^= x[q];
                    }
                    flips[m] = w;
                    m += 1;
                }
                OpKind::Cnot => {
                    x[b] ^= x[a];
                    z[a] ^= z[b];
                }
                OpKind::H => std::mem::swap(&mut x[a], &mut z[a]),
                OpKind::S | OpKind::SDagger => z[a] ^= x[a],
                OpKind::Idle => {}
            }
            while ev < events.len() && self.locs[events[ev].0.loc].op == i {
                let (f, lane) = events[ev];
                let bit = 1u64 << lane;
                match self.locs[f.loc].kind {
                    LocKind::One(q) => {
                        let (fx, fz) = pauli_code_bits(f.pauli);
                        if fx {
                            x[q] ^= bit;
                        }
                        if fz {
                            z[q] ^= bit;
                        }
                    }
                    LocKind::Two(q0, q1) => {
                        for (q, code) in [(q0, f.pauli & 3), (q1, f.pauli >> 2)] {
                            let (fx, fz) = pauli_code_bits(code);
                            if fx {
                                x[q] ^= bit;
                            }
                            if fz {
                                z[q] ^= bit;
                            }
                        }
                    }
                    LocKind::Flip(k) => flips[k] ^= bit,
                }
                ev += 1;
            }
        }
        FrameOutput { flips, x, z }
    }

    /// Data qubits in index order.
    pub fn data_qubits(&self) -> Vec<usize> {
        (0..self.c.n_qubits)
            .filter(|&q| self.c.roles[q] == crate::circuit::QubitRole::Data)
            .collect()
    }

    /// Every single fault with its effect, in (location, Pauli) order.
    pub fn single_fault_effects(&self) -> Vec<FaultEffect> {
        let faults: Vec<Fault> = self
            .locs
            .iter()
            .enumerate()
            .flat_map(|(i, l)| (1..=l.kind.n_paulis()).map(move |p| Fault { loc: i, pauli: p }))
            .collect();
        let data = self.data_qubits();
        let mut out = Vec::with_capacity(faults.len());
        for chunk in faults.chunks(64) {
            let events: Vec<(Fault, usize)> = chunk.iter().enumerate().map(|(l, f)| (*f, l)).collect();
            let r = self.run(&events);
            for (lane, f) in chunk.iter().enumerate() {
                out.push(FaultEffect {
                    faults: vec![*f],
                    flips: r.lane_flips(lane),
                    residual: r.lane_pauli(lane, &data, data.len()),
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::sim::tableau::Tableau;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frame_rules_match_tableau_conjugation() {
        // Propagate a random Pauli through random Cliffords both ways.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = 4;
            let mut f = PauliFrame::new(n);
            let mut p = PauliOp::identity(n);
            for q in 0..n {
                p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)]);
            }
            f.compose(&p).unwrap();
            let mut t: Tableau = Tableau::new(n);
            // stabilize the state by every single-qubit Z, then check that the
            // frame predicts which Z-type observables flip
            let mut gates = Vec::new();
            for _ in 0..10 {
                let a = rng.gen_range(0..n);
                let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                gates.push((rng.gen_range(0..3), a, b));
            }
            t.apply_pauli(&p).unwrap();
            let mut clean: Tableau = Tableau::new(n);
            for &(g, a, b) in &gates {
                match g {
                    0 => {
                        t.h(a).unwrap();
                        clean.h(a).unwrap();
                        f.gate1(a, Clifford1::H);
                    }
                    1 => {
                        t.s(a).unwrap();
                        clean.s(a).unwrap();
                        f.gate1(a, Clifford1::S);
                    }
                    _ => {
                        t.cnot(a, b).unwrap();
                        clean.cnot(a, b).unwrap();
                        f.cnot(a, b);
                    }
                }
            }
            for (s, sign) in clean.stabilizers() {
                let noisy = t.expectation(&s).unwrap();
                assert_eq!(noisy ^ sign, f.flips(&s));
            }
        }
    }

    #[test]
    fn single_faults_flip_adjacent_measurements() {
        let mut b = CircuitBuilder::new(2);
        let anc = b.syndrome_qubits(1)[0];
        b.layer(&[(OpKind::PrepZ, anc, 0)]);
        b.layer(&[(OpKind::Cnot, 0, anc)]);
        b.layer(&[(OpKind::Cnot, 1, anc)]);
        b.layer(&[(OpKind::MeasZ, anc, 0)]);
        let c = b.finish();
        let sim = FrameSim::new(&c);
        let eff = sim.single_fault_effects();
        let n_expected: usize = sim.locations().iter().map(|l| l.kind.n_paulis() as usize).sum();
        assert_eq!(eff.len(), n_expected);
        // the final record flip only toggles its measurement
        let flip = eff
            .iter()
            .find(|e| matches!(sim.locations()[e.faults[0].loc].kind, LocKind::Flip(0)))
            .unwrap();
        assert!(flip.flips.get(0) && flip.residual.is_identity());
        // an X on data 0 before the first CNOT flips the parity measurement
        let x0 = eff
            .iter()
            .find(|e| {
                let l = sim.locations()[e.faults[0].loc];
                c.ops[l.op].kind == OpKind::Idle && e.faults[0].pauli == 1 && matches!(l.kind, LocKind::One(0))
            })
            .expect("idle on data 0 during prep");
        assert!(x0.flips.get(0));
        assert_eq!(x0.residual, PauliOp::parse("XI").unwrap());
    }
}
