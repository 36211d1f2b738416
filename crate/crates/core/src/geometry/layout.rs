//! Multi-patch arrangements: the control/ancilla/target CNOT layout and the
//! staged state-injection geometry.

use super::tiling::Tile;
use super::{build_color_patch, merge_geometry, Basis, Check, FaceColor, MergeGeometry, Patch, Point, SideLabel};
use crate::gf2::Echelon;
use crate::pauli::CheckSet;
use crate::{check_distance, Error, Result};
use std::collections::{BTreeSet, HashMap};

/// Control, ancilla and target patches. The target is the mirror image of the
/// ancilla across its RIGHT side (XX interface), the control the mirror image
/// across its BOTTOM side (ZZ interface). Global data indices are
/// `[control | ancilla | target]`.
#[derive(Clone, Debug)]
pub struct CnotLayout {
    pub d: usize,
    pub control: Patch,
    pub ancilla: Patch,
    pub target: Patch,
    /// Merge of ancilla (as `a`) with target (as `b`).
    pub xx: MergeGeometry,
    /// Merge of ancilla (as `a`) with control (as `b`).
    pub zz: MergeGeometry,
}

impl CnotLayout {
    pub fn n_patch(&self) -> usize {
        self.ancilla.n()
    }

    pub fn n_data(&self) -> usize {
        3 * self.n_patch()
    }

    pub fn offset_control(&self) -> usize {
        0
    }

    pub fn offset_ancilla(&self) -> usize {
        self.n_patch()
    }

    pub fn offset_target(&self) -> usize {
        2 * self.n_patch()
    }

    /// Checks of one patch in global indexing.
    pub fn patch_checks(&self, which: PatchRole) -> Vec<Check> {
        let (p, off) = match which {
            PatchRole::Control => (&self.control, self.offset_control()),
            PatchRole::Ancilla => (&self.ancilla, self.offset_ancilla()),
            PatchRole::Target => (&self.target, self.offset_target()),
        };
        shift(p.checks(), |v| v + off)
    }

    pub fn xx_checks(&self) -> Vec<Check> {
        let n = self.n_patch();
        let (oa, ot) = (self.offset_ancilla(), self.offset_target());
        shift(self.xx.merged_checks(), |v| if v < n { v + oa } else { v - n + ot })
    }

    pub fn zz_checks(&self) -> Vec<Check> {
        let n = self.n_patch();
        let (oa, oc) = (self.offset_ancilla(), self.offset_control());
        shift(self.zz.merged_checks(), |v| if v < n { v + oa } else { v - n + oc })
    }

    pub fn logical_support(&self, which: PatchRole) -> Vec<usize> {
        let (p, off) = match which {
            PatchRole::Control => (&self.control, self.offset_control()),
            PatchRole::Ancilla => (&self.ancilla, self.offset_ancilla()),
            PatchRole::Target => (&self.target, self.offset_target()),
        };
        p.logical_x.iter().map(|v| v + off).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatchRole {
    Control,
    Ancilla,
    Target,
}

fn shift(checks: Vec<Check>, f: impl Fn(usize) -> usize) -> Vec<Check> {
    checks
        .into_iter()
        .map(|c| {
            let mut support: Vec<usize> = c.support.iter().map(|&v| f(v)).collect();
            support.sort_unstable();
            Check { support, ..c }
        })
        .collect()
}

pub fn cnot_layout(d: i64) -> Result<CnotLayout> {
    let du = check_distance(d)?;
    if du < 3 {
        return Err(Error::InvalidDistance(d));
    }
    let ancilla = build_color_patch(d)?;
    let target = ancilla.mirrored(SideLabel::Right)?;
    let control = ancilla.mirrored(SideLabel::Bottom)?;
    let xx = merge_geometry(&ancilla, &target, SideLabel::Right, SideLabel::Right, Basis::X)?;
    let zz = merge_geometry(&ancilla, &control, SideLabel::Bottom, SideLabel::Bottom, Basis::Z)?;
    Ok(CnotLayout {
        d: du,
        control,
        ancilla,
        target,
        xx,
        zz,
    })
}

/// Two-step injection geometry on a single patch.
///
/// The injected qubit `q*` is the top corner (where LEFT meets RIGHT). In
/// step 1 the rest of the patch holds a stabilizer state: every face that
/// persists into the final code, plus the even-row left-column octagons cut
/// down to the patch (with `q*` removed). Step 2 measures the full patch,
/// i.e. it adds the faces through `q*` and the left-column half octagons
/// (all blue) and stops measuring the step-1-only green faces.
#[derive(Clone, Debug)]
pub struct InjectionLayout {
    pub d: usize,
    pub patch: Patch,
    pub injected: usize,
    /// Face ids of the final patch first measured in step 2.
    pub new_faces: Vec<usize>,
    /// Face ids measured in both steps.
    pub persistent_faces: Vec<usize>,
    /// Supports measured only in step 1 (restrictions of green octagons).
    pub ceased: Vec<Vec<usize>>,
    /// Two-qubit step-1 supports that are Bell pairs (both XX and ZZ fixed).
    pub bell_pairs: Vec<(usize, usize)>,
}

impl InjectionLayout {
    pub fn step1_checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        for &f in &self.persistent_faces {
            for b in [Basis::X, Basis::Z] {
                out.push(Check {
                    basis: b,
                    support: self.patch.faces[f].vertices.clone(),
                    color: self.patch.faces[f].color,
                });
            }
        }
        for s in &self.ceased {
            for b in [Basis::X, Basis::Z] {
                out.push(Check {
                    basis: b,
                    support: s.clone(),
                    color: FaceColor::Green,
                });
            }
        }
        out
    }

    pub fn step2_checks(&self) -> Vec<Check> {
        self.patch.checks()
    }

    pub fn step1_checkset(&self) -> CheckSet {
        let n = self.patch.n();
        CheckSet::new(n, self.step1_checks().iter().map(|c| c.op(n)).collect())
    }
}

pub fn injection_layout(d: i64) -> Result<InjectionLayout> {
    let du = check_distance(d)?;
    if du < 3 {
        return Err(Error::InvalidDistance(d));
    }
    let patch = build_color_patch(d)?;
    let m = ((du - 3) / 2) as i32;
    let left = &patch.side(SideLabel::Left).unwrap().vertices;
    let right = &patch.side(SideLabel::Right).unwrap().vertices;
    let injected = *left.iter().find(|v| right.contains(v)).expect("LEFT and RIGHT share a corner");
    let pos: HashMap<Point, usize> = patch.position_index();
    let restrict = |t: Tile| -> BTreeSet<usize> { t.vertices().iter().filter_map(|p| pos.get(p).copied()).collect() };
    let left_column: Vec<BTreeSet<usize>> = (-1..=m + 1)
        .filter(|b| b % 2 != 0)
        .map(|b| restrict(Tile::Octagon(-1, b)))
        .collect();

    let mut new_faces = Vec::new();
    let mut persistent_faces = Vec::new();
    for f in &patch.faces {
        let vs: BTreeSet<usize> = f.vertices.iter().copied().collect();
        if vs.contains(&injected) || left_column.contains(&vs) {
            new_faces.push(f.id);
        } else {
            persistent_faces.push(f.id);
        }
    }
    debug_assert!(new_faces.iter().all(|&f| patch.faces[f].color == FaceColor::Blue));
    let ceased: Vec<Vec<usize>> = (0..=m + 1)
        .filter(|b| b % 2 == 0)
        .map(|b| {
            let mut s = restrict(Tile::Octagon(-1, b));
            s.remove(&injected);
            s.into_iter().collect::<Vec<_>>()
        })
        .filter(|s| s.len() >= 2)
        .collect();

    let mut lay = InjectionLayout {
        d: du,
        patch,
        injected,
        new_faces,
        persistent_faces,
        ceased,
        bell_pairs: Vec::new(),
    };
    let cs = lay.step1_checkset();
    if !cs.is_commuting() {
        return Err(Error::Invalid("step-1 checks do not commute".into()));
    }
    let e: Echelon = cs.echelon();
    let n = lay.patch.n();
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let xx = Basis::X.op(n, [u, v]).symplectic();
            let zz = Basis::Z.op(n, [u, v]).symplectic();
            if e.contains(&xx) && e.contains(&zz) {
                pairs.push((u, v));
            }
        }
    }
    lay.bell_pairs = pairs;
    Ok(lay)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_counts_and_orientation() {
        for (d, total) in [(3, 21), (5, 51)] {
            let l = cnot_layout(d).unwrap();
            assert_eq!(l.n_data(), total);
            assert_eq!(l.xx.basis, Basis::X);
            assert_eq!(l.zz.basis, Basis::Z);
            let all: BTreeSet<Point> = [&l.control, &l.ancilla, &l.target]
                .iter()
                .flat_map(|p| p.vertices.iter().map(|v| v.pos))
                .collect();
            assert_eq!(all.len(), total);
        }
        assert!(cnot_layout(1).is_err());
    }

    #[test]
    fn stage_check_sets_encode_expected_qubits() {
        let l = cnot_layout(3).unwrap();
        let n = l.n_data();
        let cs = |v: Vec<Check>| CheckSet::new(n, v.iter().map(|c| c.op(n)).collect());
        let mut s1 = l.patch_checks(PatchRole::Control);
        s1.extend(l.xx_checks());
        assert_eq!(n - cs(s1).rank(), 2);
        let mut s2 = l.zz_checks();
        s2.extend(l.patch_checks(PatchRole::Target));
        assert_eq!(n - cs(s2).rank(), 2);
    }

    #[test]
    fn injection_bell_pairs() {
        for (d, bells) in [(3, 3), (5, 0), (7, 2), (9, 0), (11, 2)] {
            let l = injection_layout(d).unwrap();
            assert_eq!(l.bell_pairs.len(), bells, "d={d}");
        }
    }

    #[test]
    fn injection_stages_are_consistent() {
        for d in [3, 5, 7, 9] {
            let l = injection_layout(d).unwrap();
            let n = l.patch.n();
            let s1 = l.step1_checkset();
            assert!(s1.is_independent());
            // every qubit but q* is fixed in step 1
            assert_eq!(s1.rank(), n - 1, "d={d}");
            assert!(l.step1_checks().iter().all(|c| !c.support.contains(&l.injected)));
            // new faces are blue; persistent ones commute with step-1 checks trivially
            for &f in &l.new_faces {
                assert_eq!(l.patch.faces[f].color, FaceColor::Blue);
            }
            assert!(l.ceased.iter().all(|s| s.len() >= 2));
        }
    }
}
