//! Symbolic noiseless run: every measurement outcome as an affine form over
//! coins (one coin per random outcome). Detectors and observables fall out
//! as sets of measurements whose forms cancel to a constant.

use super::apply_op;
use super::tableau::{Form, Tableau};
use crate::circuit::Circuit;
use crate::gf2::Echelon;
use crate::{Bits, Error, Result};
use std::collections::HashMap;

/// Set of measurements with a deterministic XOR in the noiseless circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parity {
    /// Sorted measurement indices.
    pub meas: Vec<usize>,
    /// Noiseless value of the XOR.
    pub expected: bool,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub forms: Vec<Form>,
    /// Measurement that created coin `k`.
    pub coin_meas: Vec<usize>,
    pub detectors: Vec<Parity>,
}

fn xor_sets(a: &mut Vec<usize>, b: &[usize]) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(*x);
                i += 1;
            }
            (Some(_), Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (None, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (None, None) => break,
        }
    }
    *a = out;
}

impl Analysis {
    pub fn new(c: &Circuit) -> Result<Analysis> {
        Self::with_hints(c, &HashMap::new())
    }

    /// Like [`Analysis::new`], but measurement `m` is first paired with
    /// `hints[m]` (typically the same check one round earlier) whenever the
    /// two outcomes agree up to a constant.
    pub fn with_hints(c: &Circuit, hints: &HashMap<usize, usize>) -> Result<Analysis> {
        c.validate()?;
        let mut t: Tableau<Form> = Tableau::new(c.n_qubits);
        let mut forms = Vec::with_capacity(c.n_measurements);
        let mut coin_meas = Vec::new();
        for op in &c.ops {
            let m = forms.len();
            let mut coin = || {
                coin_meas.push(m);
                Form::coin(coin_meas.len() - 1)
            };
            if let Some(f) = apply_op(&mut t, c, op, &mut coin)? {
                forms.push(f);
            }
        }
        let n_coins = coin_meas.len();

        // slots: coin-part form -> latest measurement with that form
        let mut slots: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut slot_keys: Vec<Vec<u64>> = Vec::new();
        let mut ech = Echelon::new(n_coins, n_coins);
        let mut detectors = Vec::new();
        for (m, f) in forms.iter().enumerate() {
            let key = f.coins.clone();
            if let Some(&prev) = hints.get(&m) {
                if prev < m && forms[prev].coin_bits(n_coins) == f.coin_bits(n_coins) {
                    detectors.push(Parity {
                        meas: vec![prev, m],
                        expected: f.konst ^ forms[prev].konst,
                    });
                    if !f.is_constant() {
                        slots.insert(key, m);
                    }
                    continue;
                }
            }
            if f.is_constant() {
                detectors.push(Parity {
                    meas: vec![m],
                    expected: f.konst,
                });
                continue;
            }
            if let Some(&rep) = slots.get(&key) {
                detectors.push(Parity {
                    meas: vec![rep, m],
                    expected: f.konst ^ forms[rep].konst,
                });
                slots.insert(key, m);
                continue;
            }
            let bits = f.coin_bits(n_coins);
            match ech.solve(&bits) {
                Some(combo) => {
                    let mut meas = vec![m];
                    let mut expected = f.konst;
                    for s in combo.ones() {
                        let rep = slots[&slot_keys[s]];
                        xor_sets(&mut meas, &[rep]);
                        expected ^= forms[rep].konst;
                    }
                    detectors.push(Parity { meas, expected });
                }
                None => {
                    let id = slot_keys.len();
                    ech.insert(bits, Bits::from_indices(n_coins, [id]));
                    slot_keys.push(key.clone());
                }
            }
            slots.insert(key, m);
        }
        Ok(Analysis {
            forms,
            coin_meas,
            detectors,
        })
    }

    pub fn n_coins(&self) -> usize {
        self.coin_meas.len()
    }

    pub fn is_random(&self, m: usize) -> bool {
        self.coin_meas.binary_search(&m).is_ok()
    }

    /// Extend `meas` by other measurements so that the XOR becomes
    /// deterministic, preferring the latest ones.
    pub fn deterministic_set(&self, meas: &[usize]) -> Result<Parity> {
        let n = self.n_coins();
        let mut target = Form::default();
        let mut set: Vec<usize> = Vec::new();
        for &m in meas {
            if m >= self.forms.len() {
                return Err(Error::Invalid(format!("measurement {m} out of range")));
            }
            use super::tableau::Sign;
            target.xor_assign(&self.forms[m]);
            xor_sets(&mut set, &[m]);
        }
        let mut ech = Echelon::new(n, self.forms.len());
        let t_bits = target.coin_bits(n);
        let mut expected = target.konst;
        if !t_bits.is_zero() {
            for m in (0..self.forms.len()).rev() {
                if set.binary_search(&m).is_ok() || self.forms[m].is_constant() {
                    continue;
                }
                ech.insert(self.forms[m].coin_bits(n), Bits::from_indices(self.forms.len(), [m]));
                if ech.rank() == n {
                    break;
                }
            }
            let combo = ech
                .solve(&t_bits)
                .ok_or_else(|| Error::Invalid("measurement set cannot be made deterministic".into()))?;
            for m in combo.ones() {
                xor_sets(&mut set, &[m]);
                expected ^= self.forms[m].konst;
            }
        }
        Ok(Parity { meas: set, expected })
    }

    /// Detector value for a flip vector (`true` = fired).
    pub fn detector_events(&self, flips: &Bits) -> Bits {
        Bits::from_bools(
            &self
                .detectors
                .iter()
                .map(|d| d.meas.iter().fold(false, |a, &m| a ^ flips.get(m)))
                .collect::<Vec<_>>(),
        )
    }
}

pub fn parity_of(p: &Parity, flips: &Bits) -> bool {
    p.meas.iter().fold(false, |a, &m| a ^ flips.get(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{extraction_round, Allocation, CircuitBuilder, OpKind};
    use crate::geometry::build_color_patch;
    use crate::sim::run;

    #[test]
    fn repeated_rounds_give_pairwise_detectors() {
        let patch = build_color_patch(3).unwrap();
        let round = extraction_round(&patch, Allocation::OnePerFace);
        let mut b = CircuitBuilder::new(patch.n());
        for q in 0..patch.n() {
            b.ideal_layer(&[(OpKind::PrepZ, q, 0)]);
        }
        let r1 = crate::circuit::emit_round(
            &mut b,
            &crate::circuit::plan_round(&patch.checks(), &patch.positions(), Allocation::OnePerFace, &Default::default()),
        );
        let r2 = crate::circuit::emit_round(
            &mut b,
            &crate::circuit::plan_round(&patch.checks(), &patch.positions(), Allocation::OnePerFace, &Default::default()),
        );
        let c = b.finish();
        assert_eq!(round.n_measurements, r1.len());
        let a = Analysis::new(&c).unwrap();
        // Z checks are deterministic from the start; X checks random once
        let n_x = patch.checks().iter().filter(|k| k.basis == crate::geometry::Basis::X).count();
        assert_eq!(a.n_coins(), n_x);
        assert_eq!(a.detectors.len(), r1.len() * 2 - n_x);
        // X checks pair across rounds, Z checks are fixed by the preparation
        for (k, (&m1, &m2)) in r1.iter().zip(&r2).enumerate() {
            if a.is_random(m1) {
                assert!(
                    a.detectors.contains(&Parity {
                        meas: vec![m1, m2],
                        expected: false
                    }),
                    "check {k}"
                );
            } else {
                assert!(
                    a.detectors.contains(&Parity {
                        meas: vec![m2],
                        expected: false
                    }),
                    "check {k}"
                );
            }
        }
        for seed in 0..5 {
            let rec = run(&c, seed).unwrap();
            for d in &a.detectors {
                assert_eq!(d.meas.iter().fold(false, |x, &m| x ^ rec.bits[m]), d.expected);
            }
        }
    }

    #[test]
    fn deterministic_set_completes_parities() {
        let mut b = CircuitBuilder::new(2);
        let m0 = b.measure_pauli(&crate::PauliOp::parse("XX").unwrap());
        let m1 = b.ideal_layer(&[(OpKind::MeasX, 0, 0)])[0];
        let m2 = b.ideal_layer(&[(OpKind::MeasX, 1, 0)])[0];
        let c = b.finish();
        let a = Analysis::new(&c).unwrap();
        let p = a.deterministic_set(&[m2]).unwrap();
        assert_eq!(p.meas, vec![m0, m1, m2]);
        assert!(a.is_random(m0) && a.is_random(m1) && !a.is_random(m2));
        assert!(a.deterministic_set(&[99]).is_err());
    }
}
