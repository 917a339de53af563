//! Integer-lattice geometry: boxes, faces, boundaries, dual boxes and the
//! box classes H2(t) / B2(t).
//!
//! A box stores an exclusive lower corner and an inclusive upper corner, so
//! the vertex set of `B(r)` is exactly the product of `(-r_i/2, r_i/2]`
//! intersected with the integer lattice and no rounding convention is needed.
//! Dual vertices live on the lattice shifted by (1/2, 1/2); they are stored
//! as the integer pair `v` standing for `v + (1/2, 1/2)`.

use crate::error::{Error, Result};
use std::collections::HashSet;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    /// L1 distance, the norm used throughout.
    pub fn l1_dist(self, other: Point) -> u64 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn is_adjacent(self, other: Point) -> bool {
        self.l1_dist(other) == 1
    }

    pub fn translated(self, dx: i64, dy: i64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// One of the four faces of a box, indexed the usual way: +1/-1 select the
/// maximal/minimal first coordinate, +2/-2 the second.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Face {
    XNeg,
    XPos,
    YNeg,
    YPos,
}

pub const FACES: [Face; 4] = [Face::XNeg, Face::XPos, Face::YNeg, Face::YPos];

impl Face {
    pub fn from_index(i: i8) -> Result<Face> {
        match i {
            -1 => Ok(Face::XNeg),
            1 => Ok(Face::XPos),
            -2 => Ok(Face::YNeg),
            2 => Ok(Face::YPos),
            other => Err(Error::InvalidAxis(other)),
        }
    }

    pub fn index(self) -> i8 {
        match self {
            Face::XNeg => -1,
            Face::XPos => 1,
            Face::YNeg => -2,
            Face::YPos => 2,
        }
    }

    pub fn opposite(self) -> Face {
        match self {
            Face::XNeg => Face::XPos,
            Face::XPos => Face::XNeg,
            Face::YNeg => Face::YPos,
            Face::YPos => Face::YNeg,
        }
    }
}

/// Crossing direction: along the first or the second axis.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn faces(self) -> (Face, Face) {
        match self {
            Axis::X => (Face::XNeg, Face::XPos),
            Axis::Y => (Face::YNeg, Face::YPos),
        }
    }
}

/// An unordered nearest-neighbour pair, stored with the lexicographically
/// smaller endpoint first so equal edges compare equal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Edge {
    a: Point,
    b: Point,
}

impl Edge {
    pub fn new(a: Point, b: Point) -> Result<Edge> {
        if !a.is_adjacent(b) {
            return Err(Error::NotAdjacent((a.x, a.y), (b.x, b.y)));
        }
        if a <= b {
            Ok(Edge { a, b })
        } else {
            Ok(Edge { a: b, b: a })
        }
    }

    pub fn endpoints(self) -> (Point, Point) {
        (self.a, self.b)
    }

    pub fn is_horizontal(self) -> bool {
        self.a.y == self.b.y
    }
}

/// A finite box of the integer lattice with vertex set
/// `(lo.x, hi.x] x (lo.y, hi.y]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LatticeBox {
    lo: Point,
    hi: Point,
}

impl LatticeBox {
    pub fn new(lo: Point, hi: Point) -> Result<LatticeBox> {
        if hi.x <= lo.x || hi.y <= lo.y {
            return Err(Error::InvalidCorners((lo.x, lo.y), (hi.x, hi.y)));
        }
        Ok(LatticeBox { lo, hi })
    }

    /// The centered box `B(r)` with vertex set `prod (-r_i/2, r_i/2]`.
    /// Radii below 1 admit no full unit cell and are rejected.
    pub fn from_radii(rx: f64, ry: f64) -> Result<LatticeBox> {
        for (i, r) in [rx, ry].into_iter().enumerate() {
            if !(r > 0.0) || r < 1.0 {
                return Err(Error::EmptyBox(r, i + 1));
            }
        }
        let lo = Point::new((-rx / 2.0).floor() as i64, (-ry / 2.0).floor() as i64);
        let hi = Point::new((rx / 2.0).floor() as i64, (ry / 2.0).floor() as i64);
        LatticeBox::new(lo, hi)
    }

    /// The symmetric box `B(n)`.
    pub fn symmetric(n: u32) -> Result<LatticeBox> {
        LatticeBox::from_radii(n as f64, n as f64)
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn translated(&self, dx: i64, dy: i64) -> LatticeBox {
        LatticeBox {
            lo: self.lo.translated(dx, dy),
            hi: self.hi.translated(dx, dy),
        }
    }

    /// Vertex count along an axis.
    pub fn side(&self, axis: Axis) -> i64 {
        match axis {
            Axis::X => self.hi.x - self.lo.x,
            Axis::Y => self.hi.y - self.lo.y,
        }
    }

    pub fn num_vertices(&self) -> u64 {
        (self.side(Axis::X) * self.side(Axis::Y)) as u64
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x > self.lo.x && p.x <= self.hi.x && p.y > self.lo.y && p.y <= self.hi.y
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        self.lo.x <= other.lo.x
            && self.lo.y <= other.lo.y
            && self.hi.x >= other.hi.x
            && self.hi.y >= other.hi.y
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        let (lo, hi) = (self.lo, self.hi);
        (lo.y + 1..=hi.y).flat_map(move |y| (lo.x + 1..=hi.x).map(move |x| Point::new(x, y)))
    }

    pub fn vertex_set(&self) -> HashSet<Point> {
        self.vertices().collect()
    }

    /// The i-th face: vertices whose |i|-coordinate is extremal.
    pub fn face(&self, face: Face) -> Vec<Point> {
        match face {
            Face::XNeg => (self.lo.y + 1..=self.hi.y)
                .map(|y| Point::new(self.lo.x + 1, y))
                .collect(),
            Face::XPos => (self.lo.y + 1..=self.hi.y)
                .map(|y| Point::new(self.hi.x, y))
                .collect(),
            Face::YNeg => (self.lo.x + 1..=self.hi.x)
                .map(|x| Point::new(x, self.lo.y + 1))
                .collect(),
            Face::YPos => (self.lo.x + 1..=self.hi.x)
                .map(|x| Point::new(x, self.hi.y))
                .collect(),
        }
    }

    /// Inner vertex boundary of the box.
    pub fn inner_boundary(&self) -> Vec<Point> {
        self.vertices().filter(|p| self.is_boundary(*p)).collect()
    }

    pub fn is_boundary(&self, p: Point) -> bool {
        self.contains(p)
            && (p.x == self.lo.x + 1
                || p.x == self.hi.x
                || p.y == self.lo.y + 1
                || p.y == self.hi.y)
    }

    /// Smallest shifted box whose region covers this box's vertices.
    pub fn dual(&self) -> DualBox {
        DualBox {
            shifted: LatticeBox {
                lo: Point::new(self.lo.x - 1, self.lo.y - 1),
                hi: self.hi,
            },
        }
    }

    /// Membership in B2(t): congruent to some `B(r)` with `r` in H2(t).
    pub fn in_b2_class(&self, t: f64) -> bool {
        if !(t > 0.0) {
            return false;
        }
        let min_side = radius_vertex_count(t);
        let max_side = radius_vertex_count(2.0 * t);
        let sx = self.side(Axis::X);
        let sy = self.side(Axis::Y);
        sx >= min_side && sx <= max_side && sy >= min_side && sy <= max_side
    }
}

/// Membership of a radius pair in H2(t): both radii in [t, 2t].
pub fn in_h2_class(r: (f64, f64), t: f64) -> bool {
    t > 0.0 && r.0 >= t && r.0 <= 2.0 * t && r.1 >= t && r.1 <= 2.0 * t
}

/// Number of integers in `(-r/2, r/2]`.
pub fn radius_vertex_count(r: f64) -> i64 {
    (r / 2.0).floor() as i64 - (-r / 2.0).floor() as i64
}

/// A box of the shifted lattice `Z^2 + (1/2, 1/2)`. The stored integer box
/// lists points `v` standing for `v + (1/2, 1/2)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct DualBox {
    shifted: LatticeBox,
}

impl DualBox {
    /// The underlying integer box in shifted coordinates.
    pub fn as_shifted_box(&self) -> LatticeBox {
        self.shifted
    }

    pub fn num_vertices(&self) -> u64 {
        self.shifted.num_vertices()
    }
}

/// The shifted-lattice edge crossing a primal edge.
pub fn dual_edge(e: Edge) -> Edge {
    let (a, b) = e.endpoints();
    if e.is_horizontal() {
        // crossing edge is vertical through (a.x + 1/2, a.y +- 1/2)
        let x = a.x.min(b.x);
        Edge::new(Point::new(x, a.y - 1), Point::new(x, a.y)).expect("adjacent by construction")
    } else {
        let y = a.y.min(b.y);
        Edge::new(Point::new(a.x - 1, y), Point::new(a.x, y)).expect("adjacent by construction")
    }
}

/// Inverse of [`dual_edge`]: the primal edge crossed by a shifted edge.
pub fn primal_edge_of_dual(e: Edge) -> Edge {
    let (a, b) = e.endpoints();
    if e.is_horizontal() {
        // shifted horizontal edge crosses a primal vertical edge
        let x = a.x.max(b.x);
        Edge::new(Point::new(x, a.y), Point::new(x, a.y + 1)).expect("adjacent by construction")
    } else {
        let y = a.y.max(b.y);
        Edge::new(Point::new(a.x, y), Point::new(a.x + 1, y)).expect("adjacent by construction")
    }
}

/// Inner vertex boundary and edge boundary of an arbitrary finite vertex set.
pub fn boundaries(set: &HashSet<Point>) -> (HashSet<Point>, HashSet<Edge>) {
    let mut inner = HashSet::new();
    let mut edge = HashSet::new();
    for &p in set {
        for n in neighbours(p) {
            if !set.contains(&n) {
                inner.insert(p);
                edge.insert(Edge::new(p, n).expect("neighbours adjacent"));
            }
        }
    }
    (inner, edge)
}

pub fn neighbours(p: Point) -> [Point; 4] {
    [
        Point::new(p.x - 1, p.y),
        Point::new(p.x + 1, p.y),
        Point::new(p.x, p.y - 1),
        Point::new(p.x, p.y + 1),
    ]
}

/// Max over axes of the coordinate spread.
pub fn diameter<I: IntoIterator<Item = Point>>(points: I) -> Result<i64> {
    let mut it = points.into_iter();
    let first = it.next().ok_or(Error::EmptySet)?;
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (first.x, first.x, first.y, first.y);
    for p in it {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    Ok((max_x - min_x).max(max_y - min_y))
}
