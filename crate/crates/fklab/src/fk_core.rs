//! Exact finite-volume FK measures: cluster counting under boundary
//! partitions, atom weights, full enumeration on small boxes, induced
//! boundary partitions and single-edge conditionals.
//!
//! Cluster counting joins vertices through open edges and through one
//! virtual node per partition class, so the partition-wired counting rule
//! is literal. Enumeration works in log space and normalizes by
//! log-sum-exp in fixed index order, which keeps the result independent
//! of how the atom space is sharded across workers.

use crate::error::{Error, Result};
use crate::graph::BoxGraph;
use crate::union_find::UnionFind;

/// Edge count above which full enumeration is refused.
pub const ENUMERATION_CAP: usize = 22;

/// The (p, q) pair of the random-cluster measure.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Parameters {
    pub p: f64,
    pub q: f64,
}

impl Parameters {
    pub fn new(p: f64, q: f64) -> Result<Parameters> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p must lie in [0,1], got {p}"
            )));
        }
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
        }
        Ok(Parameters { p, q })
    }
}

/// A 0/1 assignment on the edge set of a box graph.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EdgeConfig {
    pub bits: Vec<bool>,
}

impl EdgeConfig {
    pub fn all_closed(graph: &BoxGraph) -> EdgeConfig {
        EdgeConfig {
            bits: vec![false; graph.num_edges()],
        }
    }

    pub fn all_open(graph: &BoxGraph) -> EdgeConfig {
        EdgeConfig {
            bits: vec![true; graph.num_edges()],
        }
    }

    pub fn from_bits(graph: &BoxGraph, bits: Vec<bool>) -> Result<EdgeConfig> {
        if bits.len() != graph.num_edges() {
            return Err(Error::SupportMismatch {
                got: bits.len(),
                expected: graph.num_edges(),
            });
        }
        Ok(EdgeConfig { bits })
    }

    pub fn open_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// A partition of a box's inner vertex boundary. Free has one singleton
/// class per boundary vertex, wired a single class.
#[derive(Clone, Debug)]
pub struct BoundaryPartition {
    classes: Vec<Vec<u32>>,
    class_of: Vec<Option<u32>>,
}

impl BoundaryPartition {
    pub fn free(graph: &BoxGraph) -> BoundaryPartition {
        let classes: Vec<Vec<u32>> = graph.boundary_vertices().iter().map(|&v| vec![v]).collect();
        Self::from_index_classes(graph, classes).expect("free partition is valid")
    }

    pub fn wired(graph: &BoxGraph) -> BoundaryPartition {
        let classes = vec![graph.boundary_vertices().to_vec()];
        Self::from_index_classes(graph, classes).expect("wired partition is valid")
    }

    /// Build from explicit classes of vertex indices, validating an exact
    /// partition of the inner boundary.
    pub fn from_index_classes(
        graph: &BoxGraph,
        classes: Vec<Vec<u32>>,
    ) -> Result<BoundaryPartition> {
        let mut class_of = vec![None; graph.num_vertices()];
        let mut covered = 0usize;
        for (ci, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidPartition(format!("class {ci} is empty")));
            }
            for &v in class {
                if v as usize >= graph.num_vertices() || !graph.is_boundary(v) {
                    let p = if (v as usize) < graph.num_vertices() {
                        format!("{:?}", graph.point_of(v))
                    } else {
                        format!("index {v}")
                    };
                    return Err(Error::InvalidPartition(format!(
                        "{p} is not an inner-boundary vertex"
                    )));
                }
                if class_of[v as usize].is_some() {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {:?} appears in two classes",
                        graph.point_of(v)
                    )));
                }
                class_of[v as usize] = Some(ci as u32);
                covered += 1;
            }
        }
        if covered != graph.boundary_vertices().len() {
            return Err(Error::InvalidPartition(format!(
                "classes cover {covered} of {} boundary vertices",
                graph.boundary_vertices().len()
            )));
        }
        Ok(BoundaryPartition { classes, class_of })
    }

    /// Parse the boundary-partition file format: one line per class,
    /// vertices written as `x,y` pairs separated by spaces.
    pub fn from_file_str(graph: &BoxGraph, text: &str) -> Result<BoundaryPartition> {
        let mut classes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut class = Vec::new();
            for token in line.split_whitespace() {
                let (xs, ys) = token.split_once(',').ok_or_else(|| {
                    Error::InvalidPartition(format!(
                        "line {}: token `{token}` is not an x,y pair",
                        lineno + 1
                    ))
                })?;
                let x: i64 = xs.trim().parse().map_err(|_| {
                    Error::InvalidPartition(format!("line {}: bad x in `{token}`", lineno + 1))
                })?;
                let y: i64 = ys.trim().parse().map_err(|_| {
                    Error::InvalidPartition(format!("line {}: bad y in `{token}`", lineno + 1))
                })?;
                let v = graph
                    .vertex_index(crate::geometry::Point::new(x, y))
                    .ok_or_else(|| {
                        Error::InvalidPartition(format!(
                            "line {}: vertex {x},{y} is outside the box",
                            lineno + 1
                        ))
                    })?;
                class.push(v);
            }
            classes.push(class);
        }
        Self::from_index_classes(graph, classes)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn class_of(&self, v: u32) -> Option<u32> {
        self.class_of[v as usize]
    }

    /// Partial order on partitions: `self` dominates `other` when every
    /// pair wired in `other` is wired in `self`.
    pub fn dominates(&self, other: &BoundaryPartition) -> bool {
        other.classes.iter().all(|class| {
            let first = self.class_of[class[0] as usize];
            class.iter().all(|&v| self.class_of[v as usize] == first)
        })
    }
}

/// Number of partition-wired clusters of a configuration.
pub fn cluster_count(graph: &BoxGraph, bits: &[bool], pi: &BoundaryPartition) -> u32 {
    debug_assert_eq!(bits.len(), graph.num_edges());
    let nv = graph.num_vertices();
    let mut uf = UnionFind::new(nv + pi.num_classes());
    wire(graph, bits, pi, &mut uf);
    count_vertex_components(graph, &mut uf)
}

fn wire(graph: &BoxGraph, bits: &[bool], pi: &BoundaryPartition, uf: &mut UnionFind) {
    let nv = graph.num_vertices() as u32;
    for (e, &open) in bits.iter().enumerate() {
        if open {
            let (a, b) = graph.edge_endpoints(e as u32);
            uf.union(a, b);
        }
    }
    for (ci, class) in pi.classes().iter().enumerate() {
        for &v in class {
            uf.union(v, nv + ci as u32);
        }
    }
}

fn count_vertex_components(graph: &BoxGraph, uf: &mut UnionFind) -> u32 {
    let nv = graph.num_vertices();
    let mut seen = vec![false; uf.len()];
    let mut count = 0;
    for v in 0..nv as u32 {
        let root = uf.find(v) as usize;
        if !seen[root] {
            seen[root] = true;
            count += 1;
        }
    }
    count
}

/// Log of the unnormalized atom weight `p^o (1-p)^c q^cl`.
pub fn log_atom_weight(
    graph: &BoxGraph,
    bits: &[bool],
    pi: &BoundaryPartition,
    params: Parameters,
) -> f64 {
    let open = bits.iter().filter(|b| **b).count() as f64;
    let closed = bits.len() as f64 - open;
    let cl = cluster_count(graph, bits, pi) as f64;
    open * params.p.ln() + closed * (1.0 - params.p).ln() + cl * params.q.ln()
}

pub fn atom_weight(
    graph: &BoxGraph,
    bits: &[bool],
    pi: &BoundaryPartition,
    params: Parameters,
) -> f64 {
    log_atom_weight(graph, bits, pi, params).exp()
}

/// The full atom table of an FK measure, enumerated over a chosen set of
/// active edges with the remaining edges frozen.
///
/// Frozen edges keep the state given in `base` and contribute no Bernoulli
/// factor; for conditional laws that factor is constant across atoms and
/// cancels in the normalization.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    active: Vec<u32>,
    base: Vec<bool>,
    probs: Vec<f64>,
    log_z: f64,
}

impl ExactDistribution {
    pub fn num_atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn active_edges(&self) -> &[u32] {
        &self.active
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    pub fn normalizer(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn atom_probability(&self, mask: u32) -> f64 {
        self.probs[mask as usize]
    }

    /// Expand an atom mask into a full edge configuration.
    pub fn bits_of_mask(&self, mask: u32) -> Vec<bool> {
        let mut bits = self.base.clone();
        for (i, &e) in self.active.iter().enumerate() {
            bits[e as usize] = mask >> i & 1 == 1;
        }
        bits
    }

    /// Probability of an event given as a predicate on full configurations.
    pub fn event_probability<F: FnMut(&[bool]) -> bool>(&self, mut pred: F) -> f64 {
        let mut bits = self.base.clone();
        let mut total = 0.0;
        for mask in 0..self.probs.len() as u32 {
            for (i, &e) in self.active.iter().enumerate() {
                bits[e as usize] = mask >> i & 1 == 1;
            }
            if pred(&bits) {
                total += self.probs[mask as usize];
            }
        }
        total
    }

    /// Expectation of a function of the configuration.
    pub fn expectation<F: FnMut(&[bool]) -> f64>(&self, mut f: F) -> f64 {
        let mut bits = self.base.clone();
        let mut total = 0.0;
        for mask in 0..self.probs.len() as u32 {
            for (i, &e) in self.active.iter().enumerate() {
                bits[e as usize] = mask >> i & 1 == 1;
            }
            total += f(&bits) * self.probs[mask as usize];
        }
        total
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.probs.iter().enumerate().map(|(m, &p)| (m as u32, p))
    }
}

/// Enumerate the FK measure on the whole edge set of a box.
pub fn exact_distribution(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
) -> Result<ExactDistribution> {
    let active: Vec<u32> = (0..graph.num_edges() as u32).collect();
    exact_distribution_with(graph, pi, params, active, vec![false; graph.num_edges()])
}

/// Enumerate over `active` edges only, with the remaining edges frozen at
/// the states in `base`.
pub fn exact_distribution_with(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
    active: Vec<u32>,
    base: Vec<bool>,
) -> Result<ExactDistribution> {
    if active.len() > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            edges: active.len(),
            cap: ENUMERATION_CAP,
        });
    }
    if base.len() != graph.num_edges() {
        return Err(Error::SupportMismatch {
            got: base.len(),
            expected: graph.num_edges(),
        });
    }
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "exact enumeration needs 0 < p < 1 so every atom has positive probability, got p={}",
            params.p
        )));
    }
    let n_atoms = 1usize << active.len();
    let mut log_w = vec![0.0f64; n_atoms];
    let log_p = params.p.ln();
    let log_1p = (1.0 - params.p).ln();
    let log_q = params.q.ln();

    let fill = |chunk_start: usize, chunk: &mut [f64]| {
        let mut bits = base.clone();
        let mut uf = UnionFind::new(graph.num_vertices() + pi.num_classes());
        for (off, slot) in chunk.iter_mut().enumerate() {
            let mask = (chunk_start + off) as u32;
            let mut open = 0i32;
            for (i, &e) in active.iter().enumerate() {
                let b = mask >> i & 1 == 1;
                bits[e as usize] = b;
                open += b as i32;
            }
            uf.reset();
            wire(graph, &bits, pi, &mut uf);
            let cl = count_vertex_components(graph, &mut uf);
            *slot = open as f64 * log_p
                + (active.len() as i32 - open) as f64 * log_1p
                + cl as f64 * log_q;
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let chunk_size = (n_atoms / (4 * rayon::current_num_threads().max(1))).max(1024);
        log_w
            .par_chunks_mut(chunk_size)
            .enumerate()
            .for_each(|(ci, chunk)| fill(ci * chunk_size, chunk));
    }
    #[cfg(not(feature = "parallel"))]
    fill(0, &mut log_w);

    // normalize by log-sum-exp, summing in fixed index order
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for &lw in &log_w {
        sum += (lw - max).exp();
    }
    let log_z = max + sum.ln();
    let probs: Vec<f64> = log_w.iter().map(|&lw| (lw - log_z).exp()).collect();
    Ok(ExactDistribution {
        active,
        base,
        probs,
        log_z,
    })
}

/// Exact probability of an event under the FK measure on a small box.
pub fn exact_event_probability<F: FnMut(&[bool]) -> bool>(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
    pred: F,
) -> Result<f64> {
    Ok(exact_distribution(graph, pi, params)?.event_probability(pred))
}

/// The partition of a sub-box boundary induced by the configuration outside
/// the sub-box and the outer boundary condition (the Markov-property
/// conditioning rule).
///
/// `omega` is read on `E(V) \ E(U)` only; entries on `E(U)` are ignored.
pub fn induced_partition(
    graph_v: &BoxGraph,
    pi: &BoundaryPartition,
    omega: &EdgeConfig,
    graph_u: &BoxGraph,
) -> Result<BoundaryPartition> {
    if omega.bits.len() != graph_v.num_edges() {
        return Err(Error::SupportMismatch {
            got: omega.bits.len(),
            expected: graph_v.num_edges(),
        });
    }
    if !graph_v.bounding_box().contains_box(&graph_u.bounding_box()) {
        return Err(Error::NotContained);
    }
    let nv = graph_v.num_vertices() as u32;
    let mut uf = UnionFind::new(nv as usize + pi.num_classes());
    for e in 0..graph_v.num_edges() as u32 {
        if !omega.bits[e as usize] {
            continue;
        }
        let edge = graph_v.edge_points(e);
        let (a, b) = edge.endpoints();
        // skip edges interior to U: both endpoints in U
        if graph_u.vertex_index(a).is_some() && graph_u.vertex_index(b).is_some() {
            continue;
        }
        let (va, vb) = graph_v.edge_endpoints(e);
        uf.union(va, vb);
    }
    for (ci, class) in pi.classes().iter().enumerate() {
        for &v in class {
            uf.union(v, nv + ci as u32);
        }
    }
    // group the boundary of U by connectivity outside U
    let mut root_to_class: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    let mut classes: Vec<Vec<u32>> = Vec::new();
    for &u_idx in graph_u.boundary_vertices() {
        let p = graph_u.point_of(u_idx);
        let v_idx = graph_v
            .vertex_index(p)
            .expect("U is contained in V, so its vertices index into V");
        let root = uf.find(v_idx);
        let class = *root_to_class.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[class].push(u_idx);
    }
    BoundaryPartition::from_index_classes(graph_u, classes)
}

/// The finite-energy conditional: probability that edge `e` is open given
/// the states of all other edges.
pub fn single_edge_conditional(
    graph: &BoxGraph,
    bits: &[bool],
    e: u32,
    pi: &BoundaryPartition,
    params: Parameters,
) -> f64 {
    debug_assert_eq!(bits.len(), graph.num_edges());
    let (x, y) = graph.edge_endpoints(e);
    let nv = graph.num_vertices() as u32;
    let mut uf = UnionFind::new(nv as usize + pi.num_classes());
    for (i, &open) in bits.iter().enumerate() {
        if open && i as u32 != e {
            let (a, b) = graph.edge_endpoints(i as u32);
            uf.union(a, b);
        }
    }
    for (ci, class) in pi.classes().iter().enumerate() {
        for &v in class {
            uf.union(v, nv + ci as u32);
        }
    }
    if uf.same(x, y) {
        params.p
    } else {
        params.p / (params.p + params.q * (1.0 - params.p))
    }
}
