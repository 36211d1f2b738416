//! The infinite 4.8.8 tiling in integer "quarter" coordinates.
//!
//! Squares sit at `(4a, 4b)` with vertices `(4a±1, 4b)`, `(4a, 4b±1)`; the
//! octagon with lower-left index `(a, b)` is centred at `(4a+2, 4b+2)`.
//! Octagon edges between consecutive vertices have length 2 (quarter units);
//! the diagonal square edges have length √2, which is all the tiling needs
//! combinatorially.

use super::{FaceColor, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tile {
    Square(i32, i32),
    Octagon(i32, i32),
}

impl Tile {
    pub fn vertices(self) -> Vec<Point> {
        match self {
            Tile::Square(a, b) => {
                let (x, y) = (4 * a, 4 * b);
                vec![
                    Point::new(x + 1, y),
                    Point::new(x, y + 1),
                    Point::new(x - 1, y),
                    Point::new(x, y - 1),
                ]
            }
            Tile::Octagon(a, b) => {
                let (x, y) = (4 * a, 4 * b);
                vec![
                    Point::new(x + 1, y),
                    Point::new(x + 3, y),
                    Point::new(x + 4, y + 1),
                    Point::new(x + 4, y + 3),
                    Point::new(x + 3, y + 4),
                    Point::new(x + 1, y + 4),
                    Point::new(x, y + 3),
                    Point::new(x, y + 1),
                ]
            }
        }
    }

    pub fn color(self) -> FaceColor {
        match self {
            Tile::Square(..) => FaceColor::Red,
            Tile::Octagon(a, b) => {
                if (a - b).rem_euclid(2) == 0 {
                    FaceColor::Blue
                } else {
                    FaceColor::Green
                }
            }
        }
    }

    /// Twice the centre, so it stays integral.
    pub fn center2(self) -> Point {
        match self {
            Tile::Square(a, b) => Point::new(8 * a, 8 * b),
            Tile::Octagon(a, b) => Point::new(8 * a + 4, 8 * b + 4),
        }
    }

    /// The tile whose centre is `c2 / 2`.
    pub fn from_center2(c2: Point) -> Option<Tile> {
        if c2.x.rem_euclid(8) == 0 && c2.y.rem_euclid(8) == 0 {
            Some(Tile::Square(c2.x.div_euclid(8), c2.y.div_euclid(8)))
        } else if c2.x.rem_euclid(8) == 4 && c2.y.rem_euclid(8) == 4 {
            Some(Tile::Octagon(c2.x.div_euclid(8), c2.y.div_euclid(8)))
        } else {
            None
        }
    }
}

/// Whether `p` is a vertex of the tiling.
pub fn is_vertex(p: Point) -> bool {
    let (rx, ry) = (p.x.rem_euclid(4), p.y.rem_euclid(4));
    matches!((rx, ry), (1, 0) | (3, 0) | (0, 1) | (0, 3))
}

/// The three tiles meeting at vertex `p`.
pub fn tiles_at(p: Point) -> [Tile; 3] {
    assert!(is_vertex(p), "{p:?} is not a tiling vertex");
    let (x, y) = (p.x, p.y);
    if y.rem_euclid(4) == 0 {
        let b = y.div_euclid(4);
        if x.rem_euclid(4) == 1 {
            let a = x.div_euclid(4);
            [Tile::Square(a, b), Tile::Octagon(a, b), Tile::Octagon(a, b - 1)]
        } else {
            let a = (x + 1).div_euclid(4);
            [Tile::Square(a, b), Tile::Octagon(a - 1, b), Tile::Octagon(a - 1, b - 1)]
        }
    } else {
        let a = x.div_euclid(4);
        if y.rem_euclid(4) == 1 {
            let b = y.div_euclid(4);
            [Tile::Square(a, b), Tile::Octagon(a, b), Tile::Octagon(a - 1, b)]
        } else {
            let b = (y + 1).div_euclid(4);
            [Tile::Square(a, b), Tile::Octagon(a, b - 1), Tile::Octagon(a - 1, b - 1)]
        }
    }
}

/// The unique tile containing every point of a (nonempty, ≥2-point) set.
pub fn tile_containing(points: &[Point]) -> Option<Tile> {
    let first = tiles_at(*points.first()?);
    first.into_iter().find(|t| {
        let vs = t.vertices();
        points.iter().all(|p| vs.contains(p))
    })
}
