//! Osculating merges of two color patches.
//!
//! Patch `b` is the mirror image of `a` across the line of `side_a`. The
//! interface faces are the tiles that meet both patches without being a face
//! of either; they are measured only in the merge basis. Any face of `a`
//! overlapping an interface face oddly is fused with its mirror image in `b`:
//! the union is measured in the other basis, while in the merge basis the two
//! halves keep being measured separately (their product is the fused check).
//! With that convention the merged check set is independent and encodes
//! exactly one qubit.
//!
//! The *lighter* faces are the unique subset of interface faces whose product
//! equals the joint logical up to checks of the two patches.

use super::tiling::{self, Tile};
use super::{support_bits, Basis, Check, CodeFamily, Face, FaceKind, Patch, Point, SideLabel};
use crate::gf2::Echelon;
use crate::pauli::{CheckSet, LogicalPair, PauliOp};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap, HashSet};

#[derive(Clone, Debug)]
pub struct MergeGeometry {
    pub patch_a: Patch,
    pub patch_b: Patch,
    pub side_a: SideLabel,
    pub side_b: SideLabel,
    /// `X` for an XX merge, `Z` for ZZ.
    pub basis: Basis,
    /// Interface faces in merged indexing (`a` first, then `b` offset by `a.n()`).
    pub fusing_faces: Vec<Face>,
    /// Indices into `fusing_faces` of the merge-basis-only interface faces.
    pub interface_faces: Vec<usize>,
    /// Subset of `interface_faces` revealing the joint outcome.
    pub lighter_faces: Vec<usize>,
    /// Faces of `a` / `b` whose other-basis check is replaced by a fused face.
    pub replaced_a: Vec<usize>,
    pub replaced_b: Vec<usize>,
}

impl MergeGeometry {
    pub fn n(&self) -> usize {
        self.patch_a.n() + self.patch_b.n()
    }

    pub fn offset_b(&self) -> usize {
        self.patch_a.n()
    }

    pub fn lighter(&self) -> impl Iterator<Item = &Face> {
        self.lighter_faces.iter().map(|&i| &self.fusing_faces[i])
    }

    pub fn interface(&self) -> impl Iterator<Item = &Face> {
        self.interface_faces.iter().map(|&i| &self.fusing_faces[i])
    }

    pub fn fused(&self) -> impl Iterator<Item = &Face> {
        let inter: HashSet<usize> = self.interface_faces.iter().copied().collect();
        self.fusing_faces
            .iter()
            .enumerate()
            .filter(move |(i, _)| !inter.contains(i))
            .map(|(_, f)| f)
    }

    /// Checks measured while merged, in merged indexing: patch `a` checks,
    /// patch `b` checks, fused faces, then interface faces.
    pub fn merged_checks(&self) -> Vec<Check> {
        let other = self.basis.other();
        let off = self.offset_b();
        let mut out = Vec::new();
        for (p, replaced, shift) in [(&self.patch_a, &self.replaced_a, 0), (&self.patch_b, &self.replaced_b, off)] {
            for f in &p.faces {
                for &b in f.bases() {
                    if b == other && replaced.contains(&f.id) {
                        continue;
                    }
                    out.push(Check {
                        basis: b,
                        support: f.vertices.iter().map(|v| v + shift).collect(),
                        color: f.color,
                    });
                }
            }
        }
        for f in self.fused() {
            out.push(Check {
                basis: other,
                support: f.vertices.clone(),
                color: f.color,
            });
        }
        for f in self.interface() {
            out.push(Check {
                basis: self.basis,
                support: f.vertices.clone(),
                color: f.color,
            });
        }
        out
    }

    pub fn merged_checkset(&self) -> CheckSet {
        let n = self.n();
        CheckSet::new(n, self.merged_checks().iter().map(|c| c.op(n)).collect())
    }

    /// The joint operator `P_a P_b` revealed by the merge.
    pub fn joint_logical(&self) -> PauliOp {
        let off = self.offset_b();
        let supp = self
            .patch_a
            .logical_x
            .iter()
            .copied()
            .chain(self.patch_b.logical_x.iter().map(|v| v + off));
        self.basis.op(self.n(), supp)
    }

    /// Logical pair of the merged code.
    pub fn merged_logical_pair(&self) -> LogicalPair {
        let n = self.n();
        let off = self.offset_b();
        let a_only = |b: Basis| b.op(n, self.patch_a.logical_x.iter().copied());
        let joint_other = self.basis.other().op(
            n,
            self.patch_a
                .logical_x
                .iter()
                .copied()
                .chain(self.patch_b.logical_x.iter().map(|v| v + off)),
        );
        match self.basis {
            Basis::X => LogicalPair {
                logical_x: a_only(Basis::X),
                logical_z: joint_other,
            },
            Basis::Z => LogicalPair {
                logical_x: joint_other,
                logical_z: a_only(Basis::Z),
            },
        }
    }

    /// Indices into [`merged_checks`](Self::merged_checks) of the patch checks
    /// whose product, times the lighter-face product, equals
    /// [`joint_logical`](Self::joint_logical).
    pub fn reference_checks(&self) -> Vec<usize> {
        let n = self.n();
        let checks = self.merged_checks();
        let mut target = self.joint_logical().symplectic();
        for f in self.lighter() {
            target.xor_assign(&self.basis.op(n, f.vertices.iter().copied()).symplectic());
        }
        let pool: Vec<usize> = (0..checks.len() - self.interface_faces.len())
            .filter(|&i| checks[i].basis == self.basis)
            .collect();
        let rows: Vec<_> = pool.iter().map(|&i| checks[i].op(n).symplectic()).collect();
        let combo = Echelon::from_rows(&rows)
            .solve(&target)
            .expect("lighter faces reveal the joint logical");
        combo.ones().map(|k| pool[k]).collect()
    }

    /// Indices into `merged_checks` of the lighter-face checks.
    pub fn lighter_check_indices(&self) -> Vec<usize> {
        let base = self.merged_checks().len() - self.interface_faces.len();
        self.interface_faces
            .iter()
            .enumerate()
            .filter(|(_, f)| self.lighter_faces.contains(f))
            .map(|(k, _)| base + k)
            .collect()
    }
}

/// Build the merge of `a` with its mirror image `b` across `side_a`.
pub fn merge_geometry(a: &Patch, b: &Patch, side_a: SideLabel, side_b: SideLabel, basis: Basis) -> Result<MergeGeometry> {
    if a.family != CodeFamily::Color488 || b.family != CodeFamily::Color488 {
        return Err(Error::IncompatibleSides("merges are defined for color patches".into()));
    }
    if a.distance != b.distance {
        return Err(Error::Invalid(format!("mismatched distances {} and {}", a.distance, b.distance)));
    }
    let pos_a: HashMap<Point, usize> = a.position_index();
    let pos_b: HashMap<Point, usize> = b.position_index();
    if pos_a.keys().any(|p| pos_b.contains_key(p)) {
        return Err(Error::IncompatibleSides("patches overlap (merging a patch with itself?)".into()));
    }
    if side_a != side_b {
        return Err(Error::IncompatibleSides(format!("{side_a:?} cannot osculate {side_b:?}")));
    }
    let r = a.side_reflection(side_a)?;
    let mirror_ok = a.vertices.iter().all(|v| pos_b.contains_key(&r.apply(v.pos)));
    if !mirror_ok || a.n() != b.n() {
        return Err(Error::IncompatibleSides(format!(
            "patch b is not the mirror image of a across {side_a:?}"
        )));
    }
    let n_a = a.n();
    let n = n_a + b.n();
    let merged_id = |p: &Point| pos_a.get(p).copied().or_else(|| pos_b.get(p).map(|i| i + n_a));
    let face_sets = |p: &Patch, shift: usize| -> HashSet<BTreeSet<usize>> {
        p.faces.iter().map(|f| f.vertices.iter().map(|v| v + shift).collect()).collect()
    };
    let faces_a = face_sets(a, 0);
    let faces_b = face_sets(b, n_a);

    let mut tiles: BTreeSet<Tile> = BTreeSet::new();
    for v in a.vertices.iter().chain(&b.vertices) {
        tiles.extend(tiling::tiles_at(v.pos));
    }
    let mut lights: Vec<(Tile, Vec<usize>)> = Vec::new();
    for t in tiles {
        let in_a: BTreeSet<usize> = t.vertices().iter().filter_map(|p| pos_a.get(p).copied()).collect();
        let in_b: BTreeSet<usize> = t.vertices().iter().filter_map(|p| pos_b.get(p).map(|i| i + n_a)).collect();
        if in_a.is_empty() || in_b.is_empty() {
            continue;
        }
        match (faces_a.contains(&in_a), faces_b.contains(&in_b)) {
            (false, false) => lights.push((t, in_a.into_iter().chain(in_b).collect())),
            (true, true) => {}
            _ => return Err(Error::IncompatibleSides(format!("tile {t:?} is a face on one side only"))),
        }
    }
    if lights.is_empty() {
        return Err(Error::IncompatibleSides("patches do not touch".into()));
    }

    let mut fusing: Vec<Face> = Vec::new();
    let mut replaced_a = Vec::new();
    let mut replaced_b = Vec::new();
    let light_bits: Vec<_> = lights.iter().map(|(_, vs)| support_bits(n, vs)).collect();
    for f in &a.faces {
        let fb = support_bits(n, &f.vertices);
        if light_bits.iter().any(|l| l.dot(&fb)) {
            let mirror: BTreeSet<usize> = f
                .vertices
                .iter()
                .map(|&v| merged_id(&r.apply(a.vertices[v].pos)).unwrap())
                .collect();
            let gf = b
                .faces
                .iter()
                .find(|g| g.vertices.iter().map(|v| v + n_a).collect::<BTreeSet<_>>() == mirror)
                .ok_or_else(|| Error::IncompatibleSides("mirror face missing".into()))?;
            let mut vs: Vec<usize> = f.vertices.iter().copied().chain(mirror.iter().copied()).collect();
            vs.sort_unstable();
            let pts: Vec<Point> = f
                .vertices
                .iter()
                .map(|&v| a.vertices[v].pos)
                .chain(gf.vertices.iter().map(|&v| b.vertices[v].pos))
                .collect();
            let kind = match tiling::tile_containing(&pts) {
                Some(t @ Tile::Octagon(..)) if t.vertices().len() == vs.len() => FaceKind::Octagon,
                _ => FaceKind::Partial,
            };
            replaced_a.push(f.id);
            replaced_b.push(gf.id);
            fusing.push(Face {
                id: fusing.len(),
                color: f.color,
                kind,
                vertices: vs,
            });
        }
    }
    let mut interface_faces = Vec::new();
    for (t, vs) in lights {
        let kind = match t {
            Tile::Square(..) if vs.len() == 4 => FaceKind::Square,
            Tile::Octagon(..) if vs.len() == 8 => FaceKind::Octagon,
            _ => FaceKind::Partial,
        };
        interface_faces.push(fusing.len());
        fusing.push(Face {
            id: fusing.len(),
            color: t.color(),
            kind,
            vertices: vs,
        });
    }
    let mut m = MergeGeometry {
        patch_a: a.clone(),
        patch_b: b.clone(),
        side_a,
        side_b,
        basis,
        fusing_faces: fusing,
        interface_faces,
        lighter_faces: Vec::new(),
        replaced_a,
        replaced_b,
    };
    let cs = m.merged_checkset();
    if !cs.is_commuting() {
        return Err(Error::IncompatibleSides("merged checks do not commute".into()));
    }
    m.lighter_faces = lighter_subset(&m)?;
    Ok(m)
}

/// Solve for the interface faces whose product is the joint logical modulo
/// the merge-basis checks of the two patches.
fn lighter_subset(m: &MergeGeometry) -> Result<Vec<usize>> {
    let n = m.n();
    let off = m.offset_b();
    let mut rows = Vec::new();
    for (p, shift) in [(&m.patch_a, 0), (&m.patch_b, off)] {
        for c in p.checks().iter().filter(|c| c.basis == m.basis) {
            rows.push(m.basis.op(n, c.support.iter().map(|v| v + shift)).symplectic());
        }
    }
    let n_patch = rows.len();
    for f in m.interface() {
        rows.push(m.basis.op(n, f.vertices.iter().copied()).symplectic());
    }
    let combo = Echelon::from_rows(&rows)
        .solve(&m.joint_logical().symplectic())
        .ok_or_else(|| Error::IncompatibleSides("interface does not reveal the joint logical".into()))?;
    Ok(combo
        .ones()
        .filter(|&k| k >= n_patch)
        .map(|k| m.interface_faces[k - n_patch])
        .collect())
}

/// Stop measuring the interface and return the two original patches.
pub fn split_geometry(m: &MergeGeometry) -> (Patch, Patch) {
    (m.patch_a.clone(), m.patch_b.clone())
}
