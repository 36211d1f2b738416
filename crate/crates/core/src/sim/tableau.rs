//! Aaronson–Gottesman stabilizer tableau with destabilizers.
//!
//! The sign column is generic: `bool` for concrete runs, [`Form`] for the
//! symbolic pass that writes every random outcome as a fresh coin and every
//! other bit as an affine function of earlier coins.

use crate::gf2::Bits;
use crate::pauli::PauliOp;
use crate::{Error, Result};
use std::fmt::Debug;

pub trait Sign: Clone + Debug + PartialEq {
    fn constant(b: bool) -> Self;
    fn xor_assign(&mut self, o: &Self);
    fn flip(&mut self, b: bool);
}

impl Sign for bool {
    #[inline]
    fn constant(b: bool) -> Self {
        b
    }
    #[inline]
    fn xor_assign(&mut self, o: &Self) {
        *self ^= *o;
    }
    #[inline]
    fn flip(&mut self, b: bool) {
        *self ^= b;
    }
}

/// Affine GF(2) form: constant plus a set of coins (bit `k` = coin `k`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Form {
    pub coins: Vec<u64>,
    pub konst: bool,
}

impl Form {
    pub fn coin(k: usize) -> Form {
        let mut coins = vec![0; k / 64 + 1];
        coins[k / 64] |= 1 << (k % 64);
        Form { coins, konst: false }
    }

    pub fn is_constant(&self) -> bool {
        self.coins.iter().all(|&w| w == 0)
    }

    /// Coin part as a fixed-length bit vector.
    pub fn coin_bits(&self, n_coins: usize) -> Bits {
        let mut b = Bits::zeros(n_coins);
        for (k, &w) in self.coins.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let t = w.trailing_zeros() as usize;
                b.set(k * 64 + t, true);
                w &= w - 1;
            }
        }
        b
    }

    fn trim(&mut self) {
        while self.coins.last() == Some(&0) {
            self.coins.pop();
        }
    }
}

impl Sign for Form {
    fn constant(b: bool) -> Self {
        Form {
            coins: Vec::new(),
            konst: b,
        }
    }

    fn xor_assign(&mut self, o: &Self) {
        if self.coins.len() < o.coins.len() {
            self.coins.resize(o.coins.len(), 0);
        }
        for (a, b) in self.coins.iter_mut().zip(&o.coins) {
            *a ^= b;
        }
        self.konst ^= o.konst;
        self.trim();
    }

    fn flip(&mut self, b: bool) {
        self.konst ^= b;
    }
}

/// Rows `0..n` are destabilizers, `n..2n` stabilizers.
#[derive(Clone, Debug)]
pub struct Tableau<S: Sign = bool> {
    n: usize,
    x: Vec<Bits>,
    z: Vec<Bits>,
    s: Vec<S>,
}

/// Result of a Pauli measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<S> {
    /// Outcome bit: eigenvalue `(-1)^bit`.
    pub bit: S,
    pub deterministic: bool,
}

#[inline]
fn parity_and(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

/// Power of `i` picked up by the product `(x1,z1)·(x2,z2)`, mod 4.
fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for k in 0..x1.len() {
        let (a, b, c, d) = (x1[k], z1[k], x2[k], z2[k]);
        let y1 = a & b;
        let xo1 = a & !b;
        let zo1 = !a & b;
        let y2 = c & d;
        let xo2 = c & !d;
        let zo2 = !c & d;
        plus += ((y1 & zo2) | (xo1 & y2) | (zo1 & xo2)).count_ones();
        minus += ((y1 & xo2) | (xo1 & zo2) | (zo1 & y2)).count_ones();
    }
    (plus + 4 * x1.len() as u32 * 64 - minus) % 4
}

impl<S: Sign> Tableau<S> {
    /// `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        let mut x = Vec::with_capacity(2 * n);
        let mut z = Vec::with_capacity(2 * n);
        for i in 0..n {
            x.push(Bits::from_indices(n, [i]));
            z.push(Bits::zeros(n));
        }
        for i in 0..n {
            x.push(Bits::zeros(n));
            z.push(Bits::from_indices(n, [i]));
        }
        Tableau {
            n,
            x,
            z,
            s: vec![S::constant(false); 2 * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitRange(q))
        } else {
            Ok(())
        }
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let xw = self.x[r].words()[w] & m;
            let zw = self.z[r].words()[w] & m;
            if xw != 0 && zw != 0 {
                self.s[r].flip(true);
            }
            if (xw != 0) != (zw != 0) {
                self.x[r].words_mut()[w] ^= m;
                self.z[r].words_mut()[w] ^= m;
            }
        }
        Ok(())
    }

    pub fn s(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            if self.x[r].words()[w] & m != 0 {
                if self.z[r].words()[w] & m != 0 {
                    self.s[r].flip(true);
                }
                self.z[r].words_mut()[w] ^= m;
            }
        }
        Ok(())
    }

    pub fn s_dagger(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            if self.x[r].words()[w] & m != 0 {
                if self.z[r].words()[w] & m == 0 {
                    self.s[r].flip(true);
                }
                self.z[r].words_mut()[w] ^= m;
            }
        }
        Ok(())
    }

    pub fn cnot(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::Invalid("CNOT control equals target".into()));
        }
        let (wa, ma) = (a / 64, 1u64 << (a % 64));
        let (wb, mb) = (b / 64, 1u64 << (b % 64));
        for r in 0..2 * self.n {
            let xa = self.x[r].words()[wa] & ma != 0;
            let zb = self.z[r].words()[wb] & mb != 0;
            let xb = self.x[r].words()[wb] & mb != 0;
            let za = self.z[r].words()[wa] & ma != 0;
            if xa && zb && (xb == za) {
                self.s[r].flip(true);
            }
            if xa {
                self.x[r].words_mut()[wb] ^= mb;
            }
            if zb {
                self.z[r].words_mut()[wa] ^= ma;
            }
        }
        Ok(())
    }

    /// Conjugate the state by a Pauli (`P ρ P`): flips the sign of every row
    /// anticommuting with `p`, weighted by `when`.
    pub fn apply_pauli_if(&mut self, p: &PauliOp, when: &S) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::SizeMismatch(p.n(), self.n));
        }
        for r in 0..2 * self.n {
            if self.anticommutes(r, p) {
                self.s[r].xor_assign(when);
            }
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliOp) -> Result<()> {
        self.apply_pauli_if(p, &S::constant(true))
    }

    #[inline]
    fn anticommutes(&self, r: usize, p: &PauliOp) -> bool {
        parity_and(self.x[r].words(), p.z.words()) ^ parity_and(self.z[r].words(), p.x.words())
    }

    /// Row `h` := row `i` · row `h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let e = product_phase(self.x[i].words(), self.z[i].words(), self.x[h].words(), self.z[h].words());
        let si = self.s[i].clone();
        self.s[h].xor_assign(&si);
        self.s[h].flip(e >= 2);
        let (xi, zi) = (self.x[i].clone(), self.z[i].clone());
        self.x[h].xor_assign(&xi);
        self.z[h].xor_assign(&zi);
    }

    /// Measure a Hermitian Pauli. `random` supplies the outcome when it is
    /// not determined by the state.
    pub fn measure(&mut self, p: &PauliOp, random: &mut dyn FnMut() -> S) -> Result<Outcome<S>> {
        if p.n() != self.n {
            return Err(Error::SizeMismatch(p.n(), self.n));
        }
        if p.is_identity() {
            return Ok(Outcome {
                bit: S::constant(p.neg),
                deterministic: true,
            });
        }
        let n = self.n;
        let pivot = (n..2 * n).find(|&r| self.anticommutes(r, p));
        match pivot {
            Some(pr) => {
                for r in 0..2 * n {
                    if r != pr && self.anticommutes(r, p) {
                        self.rowsum(r, pr);
                    }
                }
                self.x[pr - n] = self.x[pr].clone();
                self.z[pr - n] = self.z[pr].clone();
                self.s[pr - n] = self.s[pr].clone();
                let bit = random();
                self.x[pr] = p.x.clone();
                self.z[pr] = p.z.clone();
                let mut sign = bit.clone();
                sign.flip(p.neg);
                self.s[pr] = sign;
                Ok(Outcome { bit, deterministic: false })
            }
            None => {
                let mut bit = self.stabilizer_sign(p);
                bit.flip(p.neg);
                Ok(Outcome { bit, deterministic: true })
            }
        }
    }

    /// Sign `σ` such that `(-1)^σ P` (unsigned `P`) is in the stabilizer
    /// group. Only meaningful when `P` commutes with every stabilizer.
    fn stabilizer_sign(&self, p: &PauliOp) -> S {
        let n = self.n;
        let mut sx = Bits::zeros(n);
        let mut sz = Bits::zeros(n);
        let mut sign = S::constant(false);
        for j in 0..n {
            if self.anticommutes(j, p) {
                let r = n + j;
                let e = product_phase(self.x[r].words(), self.z[r].words(), sx.words(), sz.words());
                sign.xor_assign(&self.s[r]);
                sign.flip(e >= 2);
                sx.xor_assign(&self.x[r]);
                sz.xor_assign(&self.z[r]);
            }
        }
        debug_assert!(sx == p.x && sz == p.z, "operator not in the stabilizer group");
        sign
    }

    /// Deterministic value of `p` on the current state, if any.
    pub fn expectation(&self, p: &PauliOp) -> Option<S> {
        if (self.n..2 * self.n).any(|r| self.anticommutes(r, p)) {
            return None;
        }
        let mut s = self.stabilizer_sign(p);
        s.flip(p.neg);
        Some(s)
    }

    /// Reset qubit `q` to `|0⟩` without consuming randomness.
    pub fn prep_z(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let zq = PauliOp::single(self.n, q, crate::Pauli::Z);
        let n = self.n;
        match (n..2 * n).find(|&r| self.anticommutes(r, &zq)) {
            Some(pr) => {
                for r in 0..2 * n {
                    if r != pr && self.anticommutes(r, &zq) {
                        self.rowsum(r, pr);
                    }
                }
                self.x[pr - n] = self.x[pr].clone();
                self.z[pr - n] = self.z[pr].clone();
                self.s[pr - n] = self.s[pr].clone();
                self.x[pr] = zq.x.clone();
                self.z[pr] = zq.z.clone();
                self.s[pr] = S::constant(false);
            }
            None => {
                let v = self.stabilizer_sign(&zq);
                let xq = PauliOp::single(self.n, q, crate::Pauli::X);
                self.apply_pauli_if(&xq, &v)?;
            }
        }
        Ok(())
    }

    pub fn prep_x(&mut self, q: usize) -> Result<()> {
        self.prep_z(q)?;
        self.h(q)
    }

    /// Current stabilizer generators.
    pub fn stabilizers(&self) -> Vec<(PauliOp, S)> {
        (self.n..2 * self.n)
            .map(|r| (PauliOp::from_parts(self.x[r].clone(), self.z[r].clone(), false), self.s[r].clone()))
            .collect()
    }

    /// Symplectic sanity: stabilizers commute pairwise, destabilizer `i`
    /// anticommutes exactly with stabilizer `i`, and all rows independent.
    pub fn check_invariants(&self) -> bool {
        let n = self.n;
        let row = |r: usize| PauliOp::from_parts(self.x[r].clone(), self.z[r].clone(), false);
        for i in 0..n {
            for j in 0..n {
                let (di, sj) = (row(i), row(n + j));
                if di.commutes(&sj) == (i == j) {
                    return false;
                }
                if !row(n + i).commutes(&sj) {
                    return false;
                }
            }
        }
        let rows: Vec<Bits> = (0..2 * n).map(|r| row(r).symplectic()).collect();
        crate::gf2::rank(&rows) == 2 * n
    }
}

impl Tableau<bool> {
    /// Signed stabilizer generators.
    pub fn signed_stabilizers(&self) -> Vec<PauliOp> {
        self.stabilizers()
            .into_iter()
            .map(|(mut p, s)| {
                p.neg = s;
                p
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOp {
        PauliOp::parse(s).unwrap()
    }

    #[test]
    fn bell_state_and_joint_measurements() {
        let mut t: Tableau = Tableau::new(2);
        let mut coin = || true;
        let zz = t.measure(&p("ZZ"), &mut coin).unwrap();
        assert!(zz.deterministic && !zz.bit);
        let xx = t.measure(&p("XX"), &mut coin).unwrap();
        assert!(!xx.deterministic && xx.bit);
        assert_eq!(t.expectation(&p("XX")), Some(true));
        assert_eq!(t.expectation(&p("ZZ")), Some(false));
        assert_eq!(t.expectation(&p("YY")), Some(false), "YY = -XX·ZZ");
        assert_eq!(t.expectation(&p("ZI")), None);
    }

    #[test]
    fn gates_conjugate_as_expected() {
        let mut t: Tableau = Tableau::new(2);
        t.h(0).unwrap();
        assert_eq!(t.expectation(&p("XI")), Some(false));
        t.s(0).unwrap();
        assert_eq!(t.expectation(&p("YI")), Some(false));
        t.s_dagger(0).unwrap();
        t.s_dagger(0).unwrap();
        assert_eq!(t.expectation(&p("YI")), Some(true));
        let mut t: Tableau = Tableau::new(2);
        t.h(0).unwrap();
        t.cnot(0, 1).unwrap();
        assert_eq!(t.expectation(&p("XX")), Some(false));
        assert_eq!(t.expectation(&p("ZZ")), Some(false));
        t.apply_pauli(&p("ZI")).unwrap();
        assert_eq!(t.expectation(&p("XX")), Some(true));
    }

    #[test]
    fn prep_resets_entangled_qubit() {
        let mut t: Tableau = Tableau::new(2);
        t.h(0).unwrap();
        t.cnot(0, 1).unwrap();
        t.prep_z(0).unwrap();
        assert_eq!(t.expectation(&p("ZI")), Some(false));
        t.apply_pauli(&p("XI")).unwrap();
        t.prep_z(0).unwrap();
        assert_eq!(t.expectation(&p("ZI")), Some(false));
        t.prep_x(1).unwrap();
        assert_eq!(t.expectation(&p("IX")), Some(false));
        assert!(t.check_invariants());
    }

    #[test]
    fn symbolic_outcomes_track_coins() {
        let mut t: Tableau<Form> = Tableau::new(2);
        let mut k = 0;
        let mut coin = || {
            k += 1;
            Form::coin(k - 1)
        };
        let a = t.measure(&p("XX"), &mut coin).unwrap();
        assert_eq!(a.bit, Form::coin(0));
        let b = t.measure(&p("XX"), &mut coin).unwrap();
        assert!(b.deterministic);
        assert_eq!(b.bit, Form::coin(0));
        t.h(0).unwrap();
        let c = t.measure(&p("ZX"), &mut coin).unwrap();
        assert_eq!(c.bit, Form::coin(0));
    }

    #[test]
    fn stress_invariants_random_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 9;
        let mut t: Tableau = Tableau::new(n);
        for step in 0..10_000 {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..6) {
                0 => t.h(q).unwrap(),
                1 => t.s(q).unwrap(),
                2 => {
                    let r = (q + 1 + rng.gen_range(0..n - 1)) % n;
                    t.cnot(q, r).unwrap()
                }
                3 => t.prep_z(q).unwrap(),
                4 => {
                    let mut op = PauliOp::identity(n);
                    for k in 0..n {
                        op.set(
                            k,
                            [crate::Pauli::I, crate::Pauli::X, crate::Pauli::Y, crate::Pauli::Z][rng.gen_range(0..4)],
                        );
                    }
                    let mut coin = || rng.gen::<bool>();
                    let before = t.measure(&op, &mut coin).unwrap();
                    // repeated measurement agrees
                    let mut never = || panic!("second measurement must be determined");
                    assert_eq!(t.measure(&op, &mut never).unwrap().bit, before.bit);
                }
                _ => t.s_dagger(q).unwrap(),
            }
            if step % 500 == 0 {
                assert!(t.check_invariants(), "step {step}");
            }
        }
        assert!(t.check_invariants());
    }

    #[test]
    fn size_and_range_errors() {
        let mut t: Tableau = Tableau::new(2);
        assert!(t.h(2).is_err());
        assert!(t.cnot(0, 0).is_err());
        let mut c = || false;
        assert!(matches!(t.measure(&p("XXX"), &mut c), Err(Error::SizeMismatch(3, 2))));
    }

    proptest! {
        #[test]
        fn measurement_matches_expectation(ops in proptest::collection::vec((0usize..4, 0usize..4, 0usize..4), 0..40), m in "[IXYZ]{4}") {
            let mut t: Tableau = Tableau::new(4);
            for (k, a, b) in ops {
                match k {
                    0 => t.h(a).unwrap(),
                    1 => t.s(a).unwrap(),
                    2 => if a != b { t.cnot(a, b).unwrap() },
                    _ => t.prep_z(a).unwrap(),
                }
            }
            let op = p(&m);
            let exp = t.expectation(&op);
            let mut coin = || true;
            let out = t.measure(&op, &mut coin).unwrap();
            match exp {
                Some(v) => { prop_assert!(out.deterministic); prop_assert_eq!(out.bit, v); }
                None => prop_assert!(!out.deterministic || op.is_identity()),
            }
        }
    }
}
