//! Rotated ("medial") surface-code patches: `d²` data qubits on a square
//! grid, `(d−1)²` weight-4 plaquettes in a checkerboard of X (dark) and Z
//! (light), and weight-2 X checks on the top/bottom and Z checks on the
//! left/right boundaries.

use super::{CodeFamily, FaceColor, FaceKind, Patch, Point, SideLabel, Transform};
use crate::{check_distance, Result};

pub fn build_surface_patch(d: i64) -> Result<Patch> {
    let d = check_distance(d)? as i32;
    let q = |i: i32, j: i32| Point::new(4 * i, 4 * j);
    let mut faces = Vec::new();
    for i in -1..d {
        for j in -1..d {
            let color = if (i + j).rem_euclid(2) == 0 {
                FaceColor::Dark
            } else {
                FaceColor::Light
            };
            let vs: Vec<Point> = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                .into_iter()
                .filter(|&(a, b)| (0..d).contains(&a) && (0..d).contains(&b))
                .map(|(a, b)| q(a, b))
                .collect();
            let bulk = vs.len() == 4;
            let keep = match vs.len() {
                4 => true,
                2 => {
                    let horizontal = j == -1 || j == d - 1;
                    (horizontal && color == FaceColor::Dark) || (!horizontal && color == FaceColor::Light)
                }
                _ => false,
            };
            if keep {
                faces.push((color, if bulk { FaceKind::Square } else { FaceKind::Partial }, vs));
            }
        }
    }
    let bottom: Vec<Point> = (0..d).map(|i| q(i, 0)).collect();
    let top: Vec<Point> = (0..d).map(|i| q(i, d - 1)).collect();
    let left: Vec<Point> = (0..d).map(|j| q(0, j)).collect();
    let right: Vec<Point> = (0..d).map(|j| q(d - 1, j)).collect();
    let all: Vec<Point> = (0..d).flat_map(|j| (0..d).map(move |i| q(i, j))).collect();
    Ok(Patch::assemble(
        CodeFamily::SurfaceMedial,
        d as usize,
        faces,
        all,
        vec![
            (SideLabel::Bottom, FaceColor::Dark, bottom.clone()),
            (SideLabel::Left, FaceColor::Light, left.clone()),
            (SideLabel::Right, FaceColor::Light, right),
            (SideLabel::Top, FaceColor::Dark, top),
        ],
        left,
        bottom,
        Transform::IDENTITY,
    ))
}
