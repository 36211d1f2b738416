//! Code patches: vertices (data qubits), colored faces, boundary sides and
//! logical supports, plus merges and the multi-patch layouts built on them.
//!
//! Positions are integers in quarter lattice units (see [`tiling`]); JSON
//! export divides by four.

mod color;
pub mod layout;
pub mod merge;
mod surface;
pub mod tiling;

pub use color::build_color_patch;
pub use layout::{cnot_layout, injection_layout, CnotLayout, InjectionLayout, PatchRole};
pub use merge::{merge_geometry, split_geometry, MergeGeometry};
pub use surface::build_surface_patch;

use crate::gf2::Bits;
use crate::pauli::{CheckSet, LogicalPair, PauliOp};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeFamily {
    #[serde(rename = "color488")]
    Color488,
    #[serde(rename = "surface")]
    SurfaceMedial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FaceColor {
    Red,
    Green,
    Blue,
    /// Surface-code X plaquette.
    Dark,
    /// Surface-code Z plaquette.
    Light,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FaceKind {
    Square,
    Octagon,
    Partial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SideLabel {
    Bottom,
    Left,
    Right,
    Top,
}

/// Pauli basis of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }

    pub fn op(self, n: usize, qs: impl IntoIterator<Item = usize>) -> PauliOp {
        match self {
            Basis::X => PauliOp::x_on(n, qs),
            Basis::Z => PauliOp::z_on(n, qs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub pos: Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub id: usize,
    pub color: FaceColor,
    pub kind: FaceKind,
    /// Ascending vertex ids.
    pub vertices: Vec<usize>,
}

impl Face {
    /// Bases measured on this face: both for color codes, one for surface codes.
    pub fn bases(&self) -> &'static [Basis] {
        match self.color {
            FaceColor::Dark => &[Basis::X],
            FaceColor::Light => &[Basis::Z],
            _ => &[Basis::X, Basis::Z],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Side {
    pub label: SideLabel,
    pub color: FaceColor,
    pub vertices: Vec<usize>,
}

/// A single measured check: basis, data-qubit support and the color of the
/// face it lives on (schedules use the color to find the face's tile).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Check {
    pub basis: Basis,
    pub support: Vec<usize>,
    pub color: FaceColor,
}

impl Check {
    pub fn op(&self, n: usize) -> PauliOp {
        self.basis.op(n, self.support.iter().copied())
    }
}

/// Integer isometry of the plane: `p -> m·p + t`, `m` a signed permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transform {
    pub m: [[i32; 2]; 2],
    pub t: [i32; 2],
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        m: [[1, 0], [0, 1]],
        t: [0, 0],
    };

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.t[0],
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.t[1],
        )
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &Transform) -> Transform {
        let mut m = [[0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j];
            }
        }
        let tp = self.apply(Point::new(o.t[0], o.t[1]));
        Transform { m, t: [tp.x, tp.y] }
    }

    pub fn inverse(&self) -> Transform {
        let m = [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]];
        let r = Transform { m, t: [0, 0] };
        let t = r.apply(Point::new(-self.t[0], -self.t[1]));
        Transform { m, t: [t.x, t.y] }
    }

    pub fn translation(dx: i32, dy: i32) -> Transform {
        Transform {
            m: [[1, 0], [0, 1]],
            t: [dx, dy],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Patch {
    pub family: CodeFamily,
    pub distance: usize,
    pub vertices: Vec<Vertex>,
    pub faces: Vec<Face>,
    pub sides: Vec<Side>,
    pub logical_x: Vec<usize>,
    pub logical_z: Vec<usize>,
    /// Map from the patch's standard frame to its placed position.
    pub frame: Transform,
}

impl Patch {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.vertices.iter().map(|v| v.pos).collect()
    }

    pub fn position_index(&self) -> HashMap<Point, usize> {
        self.vertices.iter().map(|v| (v.pos, v.id)).collect()
    }

    pub fn side(&self, label: SideLabel) -> Option<&Side> {
        self.sides.iter().find(|s| s.label == label)
    }

    /// Checks in face order; X before Z for two-basis faces.
    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        for f in &self.faces {
            for &b in f.bases() {
                out.push(Check {
                    basis: b,
                    support: f.vertices.clone(),
                    color: f.color,
                });
            }
        }
        out
    }

    pub fn checkset(&self) -> CheckSet {
        checkset_from_patch(self)
    }

    pub fn logical_pair(&self) -> LogicalPair {
        LogicalPair {
            logical_x: PauliOp::x_on(self.n(), self.logical_x.iter().copied()),
            logical_z: PauliOp::z_on(self.n(), self.logical_z.iter().copied()),
        }
    }

    /// Number of faces meeting at each vertex.
    pub fn incidence(&self) -> Vec<usize> {
        let mut inc = vec![0; self.n()];
        for f in &self.faces {
            for &v in &f.vertices {
                inc[v] += 1;
            }
        }
        inc
    }

    /// Rebuild from positioned faces, re-indexing vertices row-major and faces
    /// by centroid.
    pub(crate) fn assemble(
        family: CodeFamily,
        distance: usize,
        faces: Vec<(FaceColor, FaceKind, Vec<Point>)>,
        extra_vertices: Vec<Point>,
        sides: Vec<(SideLabel, FaceColor, Vec<Point>)>,
        logical_x: Vec<Point>,
        logical_z: Vec<Point>,
        frame: Transform,
    ) -> Patch {
        let mut pts: Vec<Point> = faces.iter().flat_map(|f| f.2.iter().copied()).chain(extra_vertices).collect();
        pts.sort_by_key(|p| (p.y, p.x));
        pts.dedup();
        let index: HashMap<Point, usize> = pts.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut fs: Vec<(FaceColor, FaceKind, Vec<usize>, (i64, i64))> = faces
            .into_iter()
            .map(|(c, k, vs)| {
                let mut ids: Vec<usize> = vs.iter().map(|p| index[p]).collect();
                ids.sort_unstable();
                ids.dedup();
                // centroid scaled by 840 keeps the comparison integral for sizes 1..8
                let k8 = vs.len() as i64;
                let sx: i64 = vs.iter().map(|p| p.x as i64).sum();
                let sy: i64 = vs.iter().map(|p| p.y as i64).sum();
                (c, k, ids, (sy * 840 / k8, sx * 840 / k8))
            })
            .collect();
        fs.sort_by(|a, b| (a.3 .0, a.3 .1, &a.2).cmp(&(b.3 .0, b.3 .1, &b.2)));
        let faces = fs
            .into_iter()
            .enumerate()
            .map(|(id, (color, kind, vertices, _))| Face { id, color, kind, vertices })
            .collect();
        let sides = sides
            .into_iter()
            .map(|(label, color, vs)| Side {
                label,
                color,
                vertices: vs.iter().map(|p| index[p]).collect(),
            })
            .collect();
        let ids = |vs: Vec<Point>| {
            let mut v: Vec<usize> = vs.iter().map(|p| index[p]).collect();
            v.sort_unstable();
            v
        };
        Patch {
            family,
            distance,
            vertices: pts.iter().enumerate().map(|(id, &pos)| Vertex { id, pos }).collect(),
            faces,
            sides,
            logical_x: ids(logical_x),
            logical_z: ids(logical_z),
            frame,
        }
    }

    /// Apply an isometry to every position (ids are recomputed).
    pub fn transformed(&self, t: &Transform) -> Patch {
        let pos = |ids: &[usize]| ids.iter().map(|&i| t.apply(self.vertices[i].pos)).collect::<Vec<_>>();
        Patch::assemble(
            self.family,
            self.distance,
            self.faces.iter().map(|f| (f.color, f.kind, pos(&f.vertices))).collect(),
            self.vertices.iter().map(|v| t.apply(v.pos)).collect(),
            self.sides.iter().map(|s| (s.label, s.color, pos(&s.vertices))).collect(),
            pos(&self.logical_x),
            pos(&self.logical_z),
            t.compose(&self.frame),
        )
    }

    /// Reflection (in placed coordinates) across the line carrying `side`.
    pub fn side_reflection(&self, side: SideLabel) -> Result<Transform> {
        let std = match (self.family, side) {
            (CodeFamily::Color488, _) => color::standard_reflection(self.distance, side),
            _ => None,
        }
        .ok_or_else(|| Error::IncompatibleSides(format!("no osculation line for {side:?} on a {:?} patch", self.family)))?;
        Ok(self.frame.compose(&std).compose(&self.frame.inverse()))
    }

    /// Mirror image across one of the patch's own sides.
    pub fn mirrored(&self, side: SideLabel) -> Result<Patch> {
        let r = self.side_reflection(side)?;
        Ok(self.transformed(&r))
    }

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        let d = self.distance;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return bad(format!("vertex ids not dense at {i}"));
            }
        }
        if self.position_index().len() != self.n() {
            return bad("duplicate vertex positions".into());
        }
        if self.logical_x.len() != d || self.logical_z.len() != d {
            return bad("logical supports must have d vertices".into());
        }
        for l in [&self.logical_x, &self.logical_z] {
            if !self.sides.iter().any(|s| l.iter().all(|v| s.vertices.contains(v))) {
                return bad("logical support does not lie along a side".into());
            }
        }
        let cs = self.checkset();
        if !cs.is_commuting() {
            return bad("checks do not commute".into());
        }
        if !cs.is_independent() || cs.n - cs.rank() != 1 {
            return bad("patch must encode exactly one qubit with independent checks".into());
        }
        if !self.logical_pair().is_valid_for(&cs) {
            return bad("logical pair invalid".into());
        }
        match self.family {
            CodeFamily::Color488 => {
                let n_exp = (d * d - 1) / 2 + d;
                let f_exp = (d * d + 2 * d - 3) / 4;
                if self.n() != n_exp || self.faces.len() != f_exp {
                    return bad(format!("counts {}/{} differ from {n_exp}/{f_exp}", self.n(), self.faces.len()));
                }
                for f in &self.faces {
                    if ![4, 8].contains(&f.vertices.len()) && !(f.kind == FaceKind::Partial && f.vertices.len() == 2) {
                        return bad(format!("face {} has weight {}", f.id, f.vertices.len()));
                    }
                }
                self.validate_coloring()?;
                let inc = self.incidence();
                let corners = inc.iter().filter(|&&k| k == 1).count();
                if d > 1 && (corners != 3 || inc.iter().any(|&k| k == 0 || k > 3)) {
                    return bad("vertex incidences must be 1 (corner), 2 (edge) or 3".into());
                }
                let on_side: Vec<bool> = (0..self.n()).map(|v| self.sides.iter().any(|s| s.vertices.contains(&v))).collect();
                for (v, &k) in inc.iter().enumerate() {
                    if d > 1 && (k < 3) != on_side[v] {
                        return bad(format!("vertex {v} incidence {k} inconsistent with sides"));
                    }
                }
                let colors: std::collections::BTreeSet<_> = self.sides.iter().map(|s| s.color).collect();
                if self.sides.len() != 3 || colors.len() != 3 {
                    return bad("color patch needs three distinctly colored sides".into());
                }
            }
            CodeFamily::SurfaceMedial => {
                if self.n() != d * d || cs.len() != d * d - 1 {
                    return bad("surface patch counts".into());
                }
                if self.sides.len() != 4 && d > 1 {
                    return bad("surface patch needs four sides".into());
                }
            }
        }
        Ok(())
    }

    fn validate_coloring(&self) -> Result<()> {
        let mut by_vertex: Vec<Vec<FaceColor>> = vec![Vec::new(); self.n()];
        for f in &self.faces {
            for &v in &f.vertices {
                if by_vertex[v].contains(&f.color) {
                    return Err(Error::Invalid(format!("two {:?} faces meet at vertex {v}", f.color)));
                }
                by_vertex[v].push(f.color);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let q = |c: i32| c as f64 / 4.0;
        json!({
            "family": self.family,
            "distance": self.distance,
            "vertices": self.vertices.iter().map(|v| json!({"id": v.id, "x": q(v.pos.x), "y": q(v.pos.y)})).collect::<Vec<_>>(),
            "faces": self.faces.iter().map(|f| json!({"id": f.id, "color": f.color, "kind": f.kind, "vertices": f.vertices})).collect::<Vec<_>>(),
            "boundary_sides": self.sides.iter().map(|s| json!({"label": s.label, "color": s.color, "vertices": s.vertices})).collect::<Vec<_>>(),
            "logical_x": self.logical_x,
            "logical_z": self.logical_z,
        })
    }
}

/// X- and Z-type checks for every face (one basis per face for surface codes).
pub fn checkset_from_patch(p: &Patch) -> CheckSet {
    let n = p.n();
    CheckSet::new(n, p.checks().iter().map(|c| c.op(n)).collect())
}

/// Supports as bitsets, handy for overlap tests.
pub(crate) fn support_bits(n: usize, vs: &[usize]) -> Bits {
    Bits::from_indices(n, vs.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_algebra() {
        let r = Transform {
            m: [[0, -1], [-1, 0]],
            t: [8, 8],
        };
        let s = Transform::translation(3, -2);
        let p = Point::new(5, 7);
        assert_eq!(r.compose(&r).apply(p), p);
        assert_eq!(s.compose(&r).apply(p), s.apply(r.apply(p)));
        assert_eq!(s.inverse().apply(s.apply(p)), p);
        assert_eq!(r.compose(&s).inverse().apply(r.compose(&s).apply(p)), p);
    }
}
