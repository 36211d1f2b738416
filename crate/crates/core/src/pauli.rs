//! Hermitian Pauli operators in binary-symplectic form, check sets, and the
//! exhaustive distance search.

use crate::gf2::{Bits, Echelon};
use crate::Error;
use std::fmt;

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis
/// `(x1,z1)·(x2,z2)`, with `(1,1)` standing for Y.
#[inline]
fn phase_exp(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

/// An n-qubit Hermitian Pauli `±P`. Bit pattern `(x,z) = (1,1)` is Y.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    pub x: Bits,
    pub z: Bits,
    pub neg: bool,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        PauliOp {
            x: Bits::zeros(n),
            z: Bits::zeros(n),
            neg: false,
        }
    }

    pub fn from_parts(x: Bits, z: Bits, neg: bool) -> Self {
        assert_eq!(x.len(), z.len());
        PauliOp { x, z, neg }
    }

    pub fn x_on(n: usize, qs: impl IntoIterator<Item = usize>) -> Self {
        PauliOp::from_parts(Bits::from_indices(n, qs), Bits::zeros(n), false)
    }

    pub fn z_on(n: usize, qs: impl IntoIterator<Item = usize>) -> Self {
        PauliOp::from_parts(Bits::zeros(n), Bits::from_indices(n, qs), false)
    }

    pub fn y_on(n: usize, qs: impl IntoIterator<Item = usize> + Clone) -> Self {
        let b = Bits::from_indices(n, qs);
        PauliOp::from_parts(b.clone(), b, false)
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut op = PauliOp::identity(n);
        op.set(q, p);
        op
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn support(&self) -> Bits {
        self.x.or(&self.z)
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_x_type(&self) -> bool {
        self.z.is_zero()
    }

    pub fn is_z_type(&self) -> bool {
        self.x.is_zero()
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.neg = !p.neg;
        p
    }

    /// Symplectic vector `[x | z]`.
    pub fn symplectic(&self) -> Bits {
        self.x.concat(&self.z)
    }

    pub fn from_symplectic(v: &Bits) -> Self {
        let n = v.len() / 2;
        PauliOp::from_parts(v.slice(0, n), v.slice(n, 2 * n), false)
    }

    /// Product with the overall phase as a power of `i` (mod 4); the Pauli
    /// part keeps `neg = false`.
    pub fn mul_phase(&self, o: &PauliOp) -> (PauliOp, u8) {
        assert_eq!(self.n(), o.n(), "Pauli size mismatch");
        let mut e: i32 = 2 * (self.neg as i32) + 2 * (o.neg as i32);
        for q in self.support().or(&o.support()).ones() {
            e += phase_exp(self.x.get(q), self.z.get(q), o.x.get(q), o.z.get(q));
        }
        let p = PauliOp::from_parts(self.x.xor(&o.x), self.z.xor(&o.z), false);
        (p, e.rem_euclid(4) as u8)
    }

    /// Product of two commuting operators (the result is Hermitian). Returns
    /// `None` if they anticommute.
    pub fn checked_mul(&self, o: &PauliOp) -> Option<PauliOp> {
        let (mut p, e) = self.mul_phase(o);
        if e % 2 == 1 {
            return None;
        }
        p.neg = e == 2;
        Some(p)
    }

    /// Product ignoring phases; what a Pauli frame needs.
    pub fn mul_unsigned(&self, o: &PauliOp) -> PauliOp {
        PauliOp::from_parts(self.x.xor(&o.x), self.z.xor(&o.z), false)
    }

    pub fn commutes(&self, o: &PauliOp) -> bool {
        assert_eq!(self.n(), o.n(), "Pauli size mismatch");
        self.x.dot(&o.z) == self.z.dot(&o.x)
    }

    pub fn try_commutes(&self, o: &PauliOp) -> Result<bool, Error> {
        if self.n() != o.n() {
            return Err(Error::SizeMismatch(self.n(), o.n()));
        }
        Ok(self.commutes(o))
    }

    /// Restrict or re-embed onto another qubit register.
    pub fn remap(&self, n: usize, map: impl Fn(usize) -> usize) -> PauliOp {
        let mut p = PauliOp::identity(n);
        p.neg = self.neg;
        for q in self.support().ones() {
            p.set(map(q), self.get(q));
        }
        p
    }

    /// Conjugate by a single-qubit Clifford on qubit `q`.
    pub fn conjugate(&mut self, q: usize, g: Clifford1) {
        let p = self.get(q);
        let (np, flip) = g.conjugate(p);
        self.set(q, np);
        self.neg ^= flip;
    }

    pub fn parse(s: &str) -> Result<PauliOp, Error> {
        let (neg, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let mut p = PauliOp::identity(body.len());
        p.neg = neg;
        for (q, c) in body.chars().enumerate() {
            let pc = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::Parse(format!("bad Pauli symbol {c:?}"))),
            };
            p.set(q, pc);
        }
        Ok(p)
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.neg { "-" } else { "+" })?;
        for q in 0..self.n() {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Single-qubit Cliffords used transversally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Clifford1 {
    H,
    S,
    SDagger,
}

impl Clifford1 {
    /// `g P g†` as (Pauli, sign flip).
    pub fn conjugate(self, p: Pauli) -> (Pauli, bool) {
        use Pauli::*;
        match (self, p) {
            (_, I) => (I, false),
            (Clifford1::H, X) => (Z, false),
            (Clifford1::H, Z) => (X, false),
            (Clifford1::H, Y) => (Y, true),
            (Clifford1::S, X) => (Y, false),
            (Clifford1::S, Y) => (X, true),
            (Clifford1::S, Z) => (Z, false),
            (Clifford1::SDagger, X) => (Y, true),
            (Clifford1::SDagger, Y) => (X, false),
            (Clifford1::SDagger, Z) => (Z, false),
        }
    }
}

/// A list of commuting checks on `n` qubits.
#[derive(Clone, Debug)]
pub struct CheckSet {
    pub n: usize,
    pub checks: Vec<PauliOp>,
}

impl CheckSet {
    pub fn new(n: usize, checks: Vec<PauliOp>) -> Self {
        assert!(checks.iter().all(|c| c.n() == n));
        CheckSet { n, checks }
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn matrix(&self) -> Vec<Bits> {
        self.checks.iter().map(|c| c.symplectic()).collect()
    }

    pub fn rank(&self) -> usize {
        crate::gf2::rank(&self.matrix())
    }

    pub fn is_commuting(&self) -> bool {
        for i in 0..self.checks.len() {
            for j in i + 1..self.checks.len() {
                if !self.checks[i].commutes(&self.checks[j]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_independent(&self) -> bool {
        self.rank() == self.checks.len()
    }

    pub fn echelon(&self) -> Echelon {
        Echelon::from_rows(&self.matrix())
    }

    /// Membership of `p` in the generated group, ignoring signs.
    pub fn contains(&self, p: &PauliOp) -> bool {
        self.echelon().contains(&p.symplectic())
    }

    pub fn commutes_with_all(&self, p: &PauliOp) -> bool {
        self.checks.iter().all(|c| c.commutes(p))
    }

    pub fn same_group(&self, o: &CheckSet) -> bool {
        self.n == o.n && crate::gf2::same_row_space(&self.matrix(), &o.matrix())
    }

    pub fn is_css(&self) -> bool {
        self.checks.iter().all(|c| c.is_x_type() || c.is_z_type())
    }

    /// X-type supports and Z-type supports (only meaningful for CSS sets).
    pub fn css_parts(&self) -> (Vec<Bits>, Vec<Bits>) {
        let xs = self
            .checks
            .iter()
            .filter(|c| c.is_x_type() && !c.is_identity())
            .map(|c| c.x.clone())
            .collect();
        let zs = self
            .checks
            .iter()
            .filter(|c| c.is_z_type() && !c.is_identity())
            .map(|c| c.z.clone())
            .collect();
        (xs, zs)
    }

    /// Conjugate every check by a per-qubit Clifford pattern.
    pub fn transversal_image(&self, gates: &[Option<Clifford1>]) -> CheckSet {
        assert_eq!(gates.len(), self.n);
        let checks = self
            .checks
            .iter()
            .map(|c| {
                let mut c = c.clone();
                for (q, g) in gates.iter().enumerate() {
                    if let Some(g) = g {
                        c.conjugate(q, *g);
                    }
                }
                c
            })
            .collect();
        CheckSet::new(self.n, checks)
    }

    /// Number of encoded qubits, assuming a commuting set.
    pub fn logical_qubits(&self) -> usize {
        self.n - self.rank()
    }
}

/// Logical X and Z representatives of a single encoded qubit.
#[derive(Clone, Debug)]
pub struct LogicalPair {
    pub logical_x: PauliOp,
    pub logical_z: PauliOp,
}

impl LogicalPair {
    pub fn is_valid_for(&self, cs: &CheckSet) -> bool {
        cs.commutes_with_all(&self.logical_x) && cs.commutes_with_all(&self.logical_z) && !self.logical_x.commutes(&self.logical_z)
    }

    pub fn transversal_image(&self, gates: &[Option<Clifford1>]) -> LogicalPair {
        let f = |p: &PauliOp| {
            let mut p = p.clone();
            for (q, g) in gates.iter().enumerate() {
                if let Some(g) = g {
                    p.conjugate(q, *g);
                }
            }
            p
        };
        LogicalPair {
            logical_x: f(&self.logical_x),
            logical_z: f(&self.logical_z),
        }
    }
}

/// Limits for the exhaustive distance search, counted in candidate supports.
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub max_candidates: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_candidates: 200_000_000,
        }
    }
}

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r.min(u64::MAX as u128) as u64
}

/// Minimum weight of a Pauli that commutes with every check and is not in
/// the check group. `lp` must be a valid logical pair for `cs`; the search
/// itself runs over all nontrivial logicals, so it also works when `cs`
/// encodes several qubits.
pub fn code_distance(cs: &CheckSet, lp: &LogicalPair) -> Result<usize, Error> {
    if !lp.is_valid_for(cs) {
        return Err(Error::Invalid("logical pair does not match the check set".into()));
    }
    min_logical_weight(cs, usize::MAX, SearchBudget::default())?.ok_or_else(|| Error::Invalid("check set encodes no logical qubit".into()))
}

/// Smallest nontrivial logical weight up to `max_w` (inclusive); `None` if
/// there is none that light.
pub fn min_logical_weight(cs: &CheckSet, max_w: usize, budget: SearchBudget) -> Result<Option<usize>, Error> {
    if cs.logical_qubits() == 0 {
        return Ok(None);
    }
    let max_w = max_w.min(cs.n);
    let mut spent = 0u64;
    for w in 1..=max_w {
        let cost = if cs.is_css() {
            2 * binom(cs.n, w)
        } else {
            binom(cs.n, w).saturating_mul(3u64.saturating_pow(w as u32))
        };
        spent = spent.saturating_add(cost);
        if spent > budget.max_candidates {
            return Err(Error::TooLarge(format!(
                "distance search past weight {} on {} qubits exceeds the budget",
                w - 1,
                cs.n
            )));
        }
        let found = if cs.is_css() {
            css_has_logical_of_weight(cs, w)
        } else {
            general_has_logical_of_weight(cs, w)
        };
        if found {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Enumerate supports of size `w` with an incremental syndrome; `accept` sees
/// the support once its syndrome vanishes.
fn enumerate_zero_syndrome(cols: &[Bits], w: usize, accept: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    let n = cols.len();
    let m = cols.first().map_or(0, |c| c.len());
    let mut stack: Vec<usize> = Vec::with_capacity(w);
    let mut syn: Vec<Bits> = vec![Bits::zeros(m); w + 1];
    fn rec(
        cols: &[Bits],
        n: usize,
        w: usize,
        start: usize,
        stack: &mut Vec<usize>,
        syn: &mut Vec<Bits>,
        accept: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let depth = stack.len();
        if depth == w {
            return syn[depth].is_zero() && accept(stack);
        }
        for q in start..=(n - (w - depth)) {
            let mut s = syn[depth].clone();
            s.xor_assign(&cols[q]);
            syn[depth + 1] = s;
            stack.push(q);
            if rec(cols, n, w, q + 1, stack, syn, accept) {
                return true;
            }
            stack.pop();
        }
        false
    }
    if w > n {
        return false;
    }
    rec(cols, n, w, 0, &mut stack, &mut syn, accept)
}

fn columns(rows: &[Bits], n: usize) -> Vec<Bits> {
    let mut cols = vec![Bits::zeros(rows.len()); n];
    for (i, r) in rows.iter().enumerate() {
        for q in r.ones() {
            cols[q].set(i, true);
        }
    }
    cols
}

fn css_has_logical_of_weight(cs: &CheckSet, w: usize) -> bool {
    let (xs, zs) = cs.css_parts();
    let n = cs.n;
    // X-type logicals: commute with Z checks, not in span of X checks
    for (detect, span) in [(&zs, &xs), (&xs, &zs)] {
        let cols = columns(detect, n);
        let ech = Echelon::from_rows(span);
        let span_empty = span.is_empty();
        let found = enumerate_zero_syndrome(&cols, w, &mut |supp| {
            let v = Bits::from_indices(n, supp.iter().copied());
            if span_empty {
                true
            } else {
                !ech.contains(&v)
            }
        });
        if found {
            return true;
        }
    }
    false
}

fn general_has_logical_of_weight(cs: &CheckSet, w: usize) -> bool {
    let n = cs.n;
    let ech = cs.echelon();
    // columns indexed by (qubit, pauli) via anticommutation with each check
    let mut found = false;
    let mut combo: Vec<usize> = Vec::with_capacity(w);
    fn rec_supp(n: usize, w: usize, start: usize, combo: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if combo.len() == w {
            return f(combo);
        }
        for q in start..=(n - (w - combo.len())) {
            combo.push(q);
            if rec_supp(n, w, q + 1, combo, f) {
                return true;
            }
            combo.pop();
        }
        false
    }
    if w > n {
        return false;
    }
    rec_supp(n, w, 0, &mut combo, &mut |supp| {
        let mut code = vec![0u8; w];
        loop {
            let mut p = PauliOp::identity(n);
            for (k, &q) in supp.iter().enumerate() {
                p.set(q, [Pauli::X, Pauli::Y, Pauli::Z][code[k] as usize]);
            }
            if cs.commutes_with_all(&p) && !ech.contains(&p.symplectic()) {
                found = true;
                return true;
            }
            let mut k = 0;
            loop {
                if k == w {
                    return false;
                }
                code[k] += 1;
                if code[k] < 3 {
                    break;
                }
                code[k] = 0;
                k += 1;
            }
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn commutation_basics() {
        let x0 = PauliOp::parse("XI").unwrap();
        let z0 = PauliOp::parse("ZI").unwrap();
        let z1 = PauliOp::parse("IZ").unwrap();
        assert!(!x0.commutes(&z0));
        assert!(x0.commutes(&z1));
        assert!(x0.try_commutes(&PauliOp::parse("X").unwrap()).is_err());
    }

    #[test]
    fn products_and_phases() {
        let x = PauliOp::parse("X").unwrap();
        let z = PauliOp::parse("Z").unwrap();
        let (p, e) = x.mul_phase(&z);
        // XZ = -iY
        assert_eq!(p, PauliOp::parse("Y").unwrap());
        assert_eq!(e, 3);
        assert!(x.checked_mul(&z).is_none());
        let xx = PauliOp::parse("XX").unwrap();
        let zz = PauliOp::parse("ZZ").unwrap();
        // XX·ZZ = (XZ)⊗(XZ) = (-iY)(-iY) = -YY
        assert_eq!(xx.checked_mul(&zz).unwrap(), PauliOp::parse("-YY").unwrap());
    }

    #[test]
    fn clifford_conjugation() {
        let mut p = PauliOp::parse("X").unwrap();
        p.conjugate(0, Clifford1::H);
        assert_eq!(p, PauliOp::parse("Z").unwrap());
        let mut y = PauliOp::parse("Y").unwrap();
        y.conjugate(0, Clifford1::H);
        assert_eq!(y, PauliOp::parse("-Y").unwrap());
        let mut s = PauliOp::parse("X").unwrap();
        s.conjugate(0, Clifford1::S);
        assert_eq!(s, PauliOp::parse("Y").unwrap());
        s.conjugate(0, Clifford1::SDagger);
        assert_eq!(s, PauliOp::parse("X").unwrap());
    }

    #[test]
    fn repetition_code_distance() {
        // 3-qubit bit-flip code plus an X logical check-free: Z-type checks only
        let cs = CheckSet::new(3, vec![PauliOp::parse("ZZI").unwrap(), PauliOp::parse("IZZ").unwrap()]);
        let lp = LogicalPair {
            logical_x: PauliOp::parse("XXX").unwrap(),
            logical_z: PauliOp::parse("ZII").unwrap(),
        };
        assert_eq!(code_distance(&cs, &lp).unwrap(), 1);
        assert_eq!(min_logical_weight(&cs, 3, SearchBudget::default()).unwrap(), Some(1));
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOp> {
        (proptest::collection::vec(0u8..4, n), any::<bool>()).prop_map(|(v, neg)| {
            let mut p = PauliOp::identity(v.len());
            for (q, c) in v.iter().enumerate() {
                p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][*c as usize]);
            }
            p.neg = neg;
            p
        })
    }

    proptest! {
        #[test]
        fn mul_is_associative_up_to_phase(a in arb_pauli(6), b in arb_pauli(6), c in arb_pauli(6)) {
            let (ab, e1) = a.mul_phase(&b);
            let (abc, e2) = ab.mul_phase(&c);
            let (bc, e3) = b.mul_phase(&c);
            let (abc2, e4) = a.mul_phase(&bc);
            prop_assert_eq!(abc, abc2);
            prop_assert_eq!((e1 + e2) % 4, (e3 + e4) % 4);
        }

        #[test]
        fn commutation_matches_phase(a in arb_pauli(7), b in arb_pauli(7)) {
            let (_, e1) = a.mul_phase(&b);
            let (_, e2) = b.mul_phase(&a);
            prop_assert_eq!(a.commutes(&b), e1 == e2);
        }

        #[test]
        fn conjugation_preserves_commutation(a in arb_pauli(5), b in arb_pauli(5), g in 0usize..3, q in 0usize..5) {
            let g = [Clifford1::H, Clifford1::S, Clifford1::SDagger][g];
            let (mut a2, mut b2) = (a.clone(), b.clone());
            a2.conjugate(q, g);
            b2.conjugate(q, g);
            prop_assert_eq!(a.commutes(&b), a2.commutes(&b2));
        }
    }
}
