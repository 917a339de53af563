//! Indexed view of the maximal subgraph on a box's vertex set.
//!
//! Vertices are numbered row-major; edges follow the fixed scan order
//! "for each vertex: +x edge, then +y edge", which is also the heat-bath
//! sweep order.

use crate::geometry::{Axis, Edge, Face, LatticeBox, Point};

#[derive(Clone, Debug)]
pub struct BoxGraph {
    bbox: LatticeBox,
    width: i64,
    height: i64,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<(u32, u32)>>,
    boundary: Vec<u32>,
    boundary_mark: Vec<bool>,
    faces: [Vec<u32>; 4],
}

impl BoxGraph {
    pub fn new(bbox: LatticeBox) -> BoxGraph {
        let width = bbox.side(Axis::X);
        let height = bbox.side(Axis::Y);
        let nv = (width * height) as usize;
        let mut edges = Vec::with_capacity(2 * nv);
        let mut adj = vec![Vec::with_capacity(4); nv];
        for y in 0..height {
            for x in 0..width {
                let v = (y * width + x) as u32;
                if x + 1 < width {
                    let u = v + 1;
                    let idx = edges.len() as u32;
                    edges.push((v, u));
                    adj[v as usize].push((idx, u));
                    adj[u as usize].push((idx, v));
                }
                if y + 1 < height {
                    let u = v + width as u32;
                    let idx = edges.len() as u32;
                    edges.push((v, u));
                    adj[v as usize].push((idx, u));
                    adj[u as usize].push((idx, v));
                }
            }
        }
        let mut boundary = Vec::new();
        let mut boundary_mark = vec![false; nv];
        for y in 0..height {
            for x in 0..width {
                if x == 0 || x == width - 1 || y == 0 || y == height - 1 {
                    let v = (y * width + x) as u32;
                    boundary.push(v);
                    boundary_mark[v as usize] = true;
                }
            }
        }
        let col = |x: i64| -> Vec<u32> { (0..height).map(|y| (y * width + x) as u32).collect() };
        let row = |y: i64| -> Vec<u32> { (0..width).map(|x| (y * width + x) as u32).collect() };
        let faces = [col(0), col(width - 1), row(0), row(height - 1)];
        BoxGraph {
            bbox,
            width,
            height,
            edges,
            adj,
            boundary,
            boundary_mark,
            faces,
        }
    }

    pub fn bounding_box(&self) -> LatticeBox {
        self.bbox
    }

    pub fn num_vertices(&self) -> usize {
        (self.width * self.height) as usize
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, p: Point) -> Option<u32> {
        if !self.bbox.contains(p) {
            return None;
        }
        let x = p.x - self.bbox.lo().x - 1;
        let y = p.y - self.bbox.lo().y - 1;
        Some((y * self.width + x) as u32)
    }

    pub fn point_of(&self, v: u32) -> Point {
        let x = v as i64 % self.width;
        let y = v as i64 / self.width;
        Point::new(self.bbox.lo().x + 1 + x, self.bbox.lo().y + 1 + y)
    }

    pub fn edge_endpoints(&self, e: u32) -> (u32, u32) {
        self.edges[e as usize]
    }

    pub fn edge_points(&self, e: u32) -> Edge {
        let (a, b) = self.edges[e as usize];
        Edge::new(self.point_of(a), self.point_of(b)).expect("graph edges are adjacent")
    }

    /// Index of the edge between two lattice points, if both lie in the box.
    pub fn edge_index(&self, a: Point, b: Point) -> Option<u32> {
        if !a.is_adjacent(b) {
            return None;
        }
        let va = self.vertex_index(a)?;
        let vb = self.vertex_index(b)?;
        let (lo, hi) = if va < vb { (va, vb) } else { (vb, va) };
        self.adj[lo as usize]
            .iter()
            .find(|(_, u)| *u == hi)
            .map(|(e, _)| *e)
    }

    pub fn neighbours(&self, v: u32) -> &[(u32, u32)] {
        &self.adj[v as usize]
    }

    pub fn boundary_vertices(&self) -> &[u32] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: u32) -> bool {
        self.boundary_mark[v as usize]
    }

    pub fn face_vertices(&self, face: Face) -> &[u32] {
        match face {
            Face::XNeg => &self.faces[0],
            Face::XPos => &self.faces[1],
            Face::YNeg => &self.faces[2],
            Face::YPos => &self.faces[3],
        }
    }

    /// Which faces a vertex belongs to, as flags indexed by
    /// [XNeg, XPos, YNeg, YPos]. Corners belong to both incident faces.
    pub fn face_flags(&self, v: u32) -> [bool; 4] {
        let x = v as i64 % self.width;
        let y = v as i64 / self.width;
        [x == 0, x == self.width - 1, y == 0, y == self.height - 1]
    }
}
