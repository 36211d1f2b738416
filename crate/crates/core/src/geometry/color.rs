//! Triangular 4.8.8 color patches.
//!
//! For `d = 2M + 3` the patch is cut from the tiling as follows (tile
//! indices as in [`super::tiling`]):
//!
//! * squares `(a, b)` with `a, b ≥ 0`, `a + b ≤ M`;
//! * octagons `(a, b)` with `a, b ≥ 0`, `a + b ≤ M − 1`;
//! * upper halves of octagons `(a, −1)` for even `a ≤ M` (bottom row);
//! * right halves of octagons `(−1, b)` for odd `b ≤ M` (left column);
//! * the part of octagon `(a, M − a)` strictly below `x + y = 4(M + 1)`.
//!
//! The skipped half-octagons along the bottom and left are not faces. Side
//! colors name the face color missing along that side.

use super::tiling::Tile;
use super::{CodeFamily, FaceColor, FaceKind, Patch, Point, SideLabel, Transform};
use crate::{check_distance, Result};
use std::collections::HashMap;

pub fn build_color_patch(d: i64) -> Result<Patch> {
    let d = check_distance(d)?;
    if d == 1 {
        let v = Point::new(-1, 0);
        return Ok(Patch::assemble(
            CodeFamily::Color488,
            1,
            vec![],
            vec![v],
            vec![
                (SideLabel::Bottom, FaceColor::Blue, vec![v]),
                (SideLabel::Left, FaceColor::Green, vec![v]),
                (SideLabel::Right, FaceColor::Red, vec![v]),
            ],
            vec![v],
            vec![v],
            Transform::IDENTITY,
        ));
    }
    let m = ((d - 3) / 2) as i32;
    let mut faces: Vec<(FaceColor, FaceKind, Vec<Point>)> = Vec::new();
    let mut add = |t: Tile, keep: &dyn Fn(&Point) -> bool| {
        let vs: Vec<Point> = t.vertices().into_iter().filter(|p| keep(p)).collect();
        let kind = match (t, vs.len()) {
            (Tile::Square(..), _) => FaceKind::Square,
            (Tile::Octagon(..), 8) => FaceKind::Octagon,
            _ => FaceKind::Partial,
        };
        faces.push((t.color(), kind, vs));
    };
    for a in 0..=m {
        for b in 0..=(m - a) {
            add(Tile::Square(a, b), &|_| true);
        }
    }
    for a in 0..m {
        for b in 0..(m - a) {
            add(Tile::Octagon(a, b), &|_| true);
        }
    }
    for a in (0..=m).filter(|a| a % 2 == 0) {
        add(Tile::Octagon(a, -1), &|p| p.y > -2);
    }
    for b in (0..=m).filter(|b| b % 2 == 1) {
        add(Tile::Octagon(-1, b), &|p| p.x > -2);
    }
    let k = 4 * (m + 1);
    for a in 0..=m {
        add(Tile::Octagon(a, m - a), &|p| p.x + p.y < k);
    }

    // boundary vertices: incidence ≤ 2; each lies on the side(s) whose color
    // is absent from its faces
    let mut colors_at: HashMap<Point, Vec<FaceColor>> = HashMap::new();
    for (c, _, vs) in &faces {
        for p in vs {
            colors_at.entry(*p).or_default().push(*c);
        }
    }
    let mut sides = Vec::new();
    for (label, color) in [
        (SideLabel::Bottom, FaceColor::Blue),
        (SideLabel::Left, FaceColor::Green),
        (SideLabel::Right, FaceColor::Red),
    ] {
        let mut vs: Vec<Point> = colors_at
            .iter()
            .filter(|(_, cs)| cs.len() <= 2 && !cs.contains(&color))
            .map(|(p, _)| *p)
            .collect();
        match label {
            SideLabel::Bottom => vs.sort_by_key(|p| (p.x, p.y)),
            SideLabel::Left => vs.sort_by_key(|p| (p.y, p.x)),
            _ => vs.sort_by_key(|p| (-p.x, p.y)),
        }
        sides.push((label, color, vs));
    }
    let bottom = sides[0].2.clone();
    Ok(Patch::assemble(
        CodeFamily::Color488,
        d,
        faces,
        vec![],
        sides,
        bottom.clone(),
        bottom,
        Transform::IDENTITY,
    ))
}

/// Reflection across the osculation line of a side, in standard coordinates.
/// Bottom: the row of octagon centres `y = −2`; left: `x = −2`; right: the
/// diagonal `x + y = 4(M + 1)` through the cut octagons.
pub(crate) fn standard_reflection(d: usize, side: SideLabel) -> Option<Transform> {
    if d < 3 {
        return None;
    }
    let k = 4 * ((d as i32 - 3) / 2 + 1);
    match side {
        SideLabel::Bottom => Some(Transform {
            m: [[1, 0], [0, -1]],
            t: [0, -4],
        }),
        SideLabel::Left => Some(Transform {
            m: [[-1, 0], [0, 1]],
            t: [-4, 0],
        }),
        SideLabel::Right => Some(Transform {
            m: [[0, -1], [-1, 0]],
            t: [k, k],
        }),
        SideLabel::Top => None,
    }
}
