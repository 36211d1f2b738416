//! Dense GF(2) vectors and the handful of elimination routines the rest of
//! the crate needs (rank, row-space membership, nullspaces, solving).

use std::fmt;

/// Fixed-length bit vector packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bits::zeros(len);
        for i in idx {
            b.flip(i);
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Bits::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i & 63);
        if v {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    #[inline]
    pub fn xor_assign(&mut self, o: &Bits) {
        debug_assert_eq!(self.len, o.len);
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= b;
        }
    }

    pub fn and(&self, o: &Bits) -> Bits {
        let mut r = self.clone();
        for (a, b) in r.words.iter_mut().zip(&o.words) {
            *a &= b;
        }
        r
    }

    pub fn or(&self, o: &Bits) -> Bits {
        let mut r = self.clone();
        for (a, b) in r.words.iter_mut().zip(&o.words) {
            *a |= b;
        }
        r
    }

    pub fn xor(&self, o: &Bits) -> Bits {
        let mut r = self.clone();
        r.xor_assign(o);
        r
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of `self & o`.
    #[inline]
    pub fn dot(&self, o: &Bits) -> bool {
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&o.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + t)
                }
            })
        })
    }

    /// Copy with `extra` zero bits appended.
    pub fn extended(&self, new_len: usize) -> Bits {
        assert!(new_len >= self.len);
        let mut r = Bits::zeros(new_len);
        r.words[..self.words.len()].copy_from_slice(&self.words);
        r
    }

    pub fn concat(&self, o: &Bits) -> Bits {
        let mut r = self.extended(self.len + o.len);
        for i in o.ones() {
            r.set(self.len + i, true);
        }
        r
    }

    pub fn slice(&self, start: usize, end: usize) -> Bits {
        Bits::from_indices(end - start, self.ones().filter(|&i| i >= start && i < end).map(|i| i - start))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Echelon form of a set of rows, remembering which input rows make up
/// each reduced row so that membership queries can return a witness.
#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    nrows_in: usize,
    rows: Vec<Bits>,
    combos: Vec<Bits>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(ncols: usize, nrows_in: usize) -> Self {
        Echelon {
            ncols,
            nrows_in,
            rows: Vec::new(),
            combos: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_rows(rows: &[Bits]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut e = Echelon::new(ncols, rows.len());
        for (i, r) in rows.iter().enumerate() {
            e.insert(r.clone(), Bits::from_indices(rows.len(), [i]));
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the basis; returns the remainder and the input-row
    /// combination that was subtracted.
    pub fn reduce(&self, v: &Bits) -> (Bits, Bits) {
        let mut v = v.clone();
        let mut c = Bits::zeros(self.nrows_in);
        for (k, &p) in self.pivots.iter().enumerate() {
            if v.get(p) {
                v.xor_assign(&self.rows[k]);
                c.xor_assign(&self.combos[k]);
            }
        }
        (v, c)
    }

    /// Insert a row whose own combination label is `combo`. Returns `None`
    /// if the row was independent, otherwise the dependency (combination of
    /// input rows summing to zero).
    pub fn insert(&mut self, row: Bits, combo: Bits) -> Option<Bits> {
        debug_assert_eq!(row.len(), self.ncols);
        let (mut r, c) = self.reduce(&row);
        let mut c = c;
        c.xor_assign(&combo);
        match r.first_one() {
            None => Some(c),
            Some(p) => {
                // keep the basis fully reduced on pivot columns
                for k in 0..self.rows.len() {
                    if self.rows[k].get(p) {
                        let (rk, ck) = (&mut self.rows[k], &mut self.combos[k]);
                        rk.xor_assign(&r);
                        ck.xor_assign(&c);
                    }
                }
                r.set(p, true);
                self.rows.push(r);
                self.combos.push(c);
                self.pivots.push(p);
                None
            }
        }
    }

    pub fn contains(&self, v: &Bits) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Input-row combination producing `v`, if `v` is in the span.
    pub fn solve(&self, v: &Bits) -> Option<Bits> {
        let (r, c) = self.reduce(v);
        r.is_zero().then_some(c)
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }
}

pub fn rank(rows: &[Bits]) -> usize {
    Echelon::from_rows(rows).rank()
}

/// Basis of `{c : sum_i c_i rows_i = 0}`.
pub fn left_nullspace(rows: &[Bits]) -> Vec<Bits> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut e = Echelon::new(ncols, rows.len());
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if let Some(dep) = e.insert(r.clone(), Bits::from_indices(rows.len(), [i])) {
            out.push(dep);
        }
    }
    out
}

/// Basis of `{x : rows · x = 0}` (right kernel).
pub fn nullspace(rows: &[Bits], ncols: usize) -> Vec<Bits> {
    let mut e = Echelon::new(ncols, rows.len());
    for (i, r) in rows.iter().enumerate() {
        e.insert(r.clone(), Bits::from_indices(rows.len(), [i]));
    }
    let pivots: Vec<usize> = e.pivots.clone();
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; ncols];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut out = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut x = Bits::zeros(ncols);
        x.set(free, true);
        // rows are fully reduced on pivot columns, so each pivot variable is
        // determined by the free ones in its row
        for (k, &p) in pivots.iter().enumerate() {
            if e.rows[k].get(free) {
                x.set(p, true);
            }
        }
        out.push(x);
    }
    out
}

/// True if the two row sets span the same space.
pub fn same_row_space(a: &[Bits], b: &[Bits]) -> bool {
    let ea = Echelon::from_rows(a);
    let eb = Echelon::from_rows(b);
    ea.rank() == eb.rank() && b.iter().all(|r| ea.contains(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Bits {
        Bits::from_bools(&s.chars().map(|c| c == '1').collect::<Vec<_>>())
    }

    #[test]
    fn basic_ops() {
        let a = bits("1100101");
        let b = bits("0110001");
        assert_eq!(a.xor(&b), bits("1010100"));
        assert!(a.dot(&b) == ((1 + 1) % 2 == 1));
        assert_eq!(a.count_ones(), 4);
        assert_eq!(a.ones().collect::<Vec<_>>(), vec![0, 1, 4, 6]);
        assert_eq!(a.concat(&b).len(), 14);
        assert_eq!(a.concat(&b).slice(7, 14), b);
    }

    #[test]
    fn rank_and_kernels() {
        let rows = vec![bits("1100"), bits("0110"), bits("1010"), bits("0001")];
        assert_eq!(rank(&rows), 3);
        let ln = left_nullspace(&rows);
        assert_eq!(ln, vec![bits("1110")]);
        let ns = nullspace(&rows, 4);
        assert_eq!(ns.len(), 1);
        for r in &rows {
            assert!(!r.dot(&ns[0]));
        }
    }

    fn arb_rows() -> impl Strategy<Value = Vec<Bits>> {
        (1usize..12, 1usize..70).prop_flat_map(|(m, n)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), m)
                .prop_map(|rows| rows.iter().map(|r| Bits::from_bools(r)).collect())
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in arb_rows()) {
            let n = rows[0].len();
            let r = rank(&rows);
            prop_assert_eq!(nullspace(&rows, n).len(), n - r);
            prop_assert_eq!(left_nullspace(&rows).len(), rows.len() - r);
            for x in nullspace(&rows, n) {
                for row in &rows { prop_assert!(!row.dot(&x)); }
            }
        }

        #[test]
        fn solve_reproduces(rows in arb_rows(), pick in proptest::collection::vec(any::<bool>(), 12)) {
            let e = Echelon::from_rows(&rows);
            let mut v = Bits::zeros(rows[0].len());
            for (i, r) in rows.iter().enumerate() { if pick[i] { v.xor_assign(r); } }
            let c = e.solve(&v).expect("in span");
            let mut w = Bits::zeros(v.len());
            for i in c.ones() { w.xor_assign(&rows[i]); }
            prop_assert_eq!(w, v);
        }

        #[test]
        fn row_space_equality_is_equivalence(rows in arb_rows(), k in 0usize..12) {
            // any invertible recombination keeps the row space
            let mut other = rows.clone();
            let k = k % rows.len();
            for j in 0..other.len() { if j != k { let r = rows[k].clone(); other[j].xor_assign(&r); } }
            prop_assert!(same_row_space(&rows, &rows));
            prop_assert!(same_row_space(&rows, &other));
            prop_assert!(same_row_space(&other, &rows));
        }
    }
}
