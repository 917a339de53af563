//! The N-block renormalization: partitioning an N-large box into blocks of
//! scale class B2(N), connector boxes across shared faces, the block events
//! and the 0/1 block process, the block-crossing event, and the statistics
//! feeding the density and domination experiments.
//!
//! The partition is built by per-axis segmentation: interior indices keep
//! their nominal N-interval and the extreme index on each side absorbs the
//! leftover strip (always shorter than N). This yields rectangular blocks
//! with sides in [N, 2N] that exactly tile the box; corner leftovers merge
//! into the diagonal extreme block, which resolves the corner-ownership
//! ambiguity of the boundary-merge rule.

use crate::clusters::{label_clusters, EventOutcome};
use crate::error::{Error, Result};
use crate::fk_core::{BoundaryPartition, Parameters};
use crate::geometry::{Axis, LatticeBox, Point};
use crate::graph::BoxGraph;
use crate::sampler::{run_replicas, wilson_interval, Chain, EstimateReport, RunLabels, Schedule};
use crate::stats::{weighted_line_fit, LineFit};
use crate::union_find::UnionFind;
use std::collections::HashSet;

pub const MIN_BLOCK_SCALE: i64 = 24;

/// A connector box across the shared face of two adjacent blocks.
#[derive(Clone, Debug)]
pub struct Connector {
    /// Index-graph edge id this connector belongs to.
    pub index_edge: u32,
    /// The separating axis (the crossing direction the event asks for).
    pub axis: Axis,
    pub dbox: LatticeBox,
}

/// The N-block partition of an N-large box.
#[derive(Clone, Debug)]
pub struct BlockPartition {
    pub n_block: i64,
    pub lambda: LatticeBox,
    /// The rescaled index set as a box graph: vertices are block indices,
    /// edges are adjacent block pairs.
    pub index_graph: BoxGraph,
    /// Block boxes aligned with index-graph vertex ids.
    pub blocks: Vec<LatticeBox>,
    /// Pre-built graphs of the blocks.
    pub block_graphs: Vec<BoxGraph>,
    /// One connector per index-graph edge.
    pub connectors: Vec<Connector>,
    pub connector_graphs: Vec<BoxGraph>,
    /// Interior index: all four neighbours exist.
    pub interior: Vec<bool>,
}

fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

fn floor_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

/// Partition an N-large box into blocks of scale class B2(N).
pub fn build_partition(lambda: LatticeBox, n_block: i64) -> Result<BlockPartition> {
    if n_block < MIN_BLOCK_SCALE {
        return Err(Error::InvalidParameter(format!(
            "block scale N must be >= {MIN_BLOCK_SCALE}, got {n_block}"
        )));
    }
    let sx = lambda.side(Axis::X);
    let sy = lambda.side(Axis::Y);
    if sx < 3 * n_block || sy < 3 * n_block {
        return Err(Error::NotNLarge(sx, sy, n_block));
    }
    let nominal = LatticeBox::from_radii(n_block as f64, n_block as f64)?;

    // per-axis index ranges: nominal(k) on the axis is
    // (nom_lo + N k, nom_hi + N k], contained when both corners fit
    let range = |lo: i64, hi: i64, nom_lo: i64, nom_hi: i64| -> (i64, i64) {
        (
            ceil_div(lo - nom_lo, n_block),
            floor_div(hi - nom_hi, n_block),
        )
    };
    let (kx_min, kx_max) = range(lambda.lo().x, lambda.hi().x, nominal.lo().x, nominal.hi().x);
    let (ky_min, ky_max) = range(lambda.lo().y, lambda.hi().y, nominal.lo().y, nominal.hi().y);

    // segments per axis: extremes absorb the leftover strips
    let segment = |k: i64, k_min: i64, k_max: i64, lo: i64, hi: i64, nom_lo: i64, nom_hi: i64| {
        let seg_lo = if k == k_min { lo } else { nom_lo + n_block * k };
        let seg_hi = if k == k_max { hi } else { nom_hi + n_block * k };
        (seg_lo, seg_hi)
    };

    let index_box = LatticeBox::new(
        Point::new(kx_min - 1, ky_min - 1),
        Point::new(kx_max, ky_max),
    )
    .expect("N-large boxes have at least 3 indices per axis");
    let index_graph = BoxGraph::new(index_box);

    let mut blocks = Vec::with_capacity(index_graph.num_vertices());
    for v in 0..index_graph.num_vertices() as u32 {
        let k = index_graph.point_of(v);
        let (lx, hx) = segment(
            k.x,
            kx_min,
            kx_max,
            lambda.lo().x,
            lambda.hi().x,
            nominal.lo().x,
            nominal.hi().x,
        );
        let (ly, hy) = segment(
            k.y,
            ky_min,
            ky_max,
            lambda.lo().y,
            lambda.hi().y,
            nominal.lo().y,
            nominal.hi().y,
        );
        let block = LatticeBox::new(Point::new(lx, ly), Point::new(hx, hy))?;
        for axis in [Axis::X, Axis::Y] {
            let side = block.side(axis);
            if side < n_block || side > 2 * n_block {
                return Err(Error::InvalidParameter(format!(
                    "block at index {k:?} has side {side} outside [N, 2N]"
                )));
            }
        }
        blocks.push(block);
    }

    // exact tiling: disjoint and covering
    let total: u64 = blocks.iter().map(|b| b.num_vertices()).sum();
    if total != lambda.num_vertices() {
        return Err(Error::InvalidParameter(
            "blocks do not tile the box".to_string(),
        ));
    }

    let block_graphs: Vec<BoxGraph> = blocks.iter().map(|b| BoxGraph::new(*b)).collect();

    // connectors: for the index edge (l, k) with k = l + e_i, the box
    // B(floor(N/4)) centred at N l + floor(N/2) e_i
    let d_radius = n_block / 4;
    let half = n_block / 2;
    let mut connectors = Vec::with_capacity(index_graph.num_edges());
    for e in 0..index_graph.num_edges() as u32 {
        let (va, vb) = index_graph.edge_endpoints(e);
        let (pa, pb) = (index_graph.point_of(va), index_graph.point_of(vb));
        // row-major edge order guarantees pa < pb, so pa is the lower index
        let (l, axis) = if pa.x + 1 == pb.x && pa.y == pb.y {
            (pa, Axis::X)
        } else {
            debug_assert!(pa.x == pb.x && pa.y + 1 == pb.y);
            (pa, Axis::Y)
        };
        let m = match axis {
            Axis::X => Point::new(n_block * l.x + half, n_block * l.y),
            Axis::Y => Point::new(n_block * l.x, n_block * l.y + half),
        };
        let dbox = LatticeBox::from_radii(d_radius as f64, d_radius as f64)?.translated(m.x, m.y);
        // containment in the union of the two blocks
        let ba = blocks[va as usize];
        let bb = blocks[vb as usize];
        for p in dbox.vertices() {
            if !ba.contains(p) && !bb.contains(p) {
                return Err(Error::InvalidParameter(format!(
                    "connector at index edge {pa:?}-{pb:?} leaves its two blocks"
                )));
            }
        }
        connectors.push(Connector {
            index_edge: e,
            axis,
            dbox,
        });
    }
    let connector_graphs: Vec<BoxGraph> =
        connectors.iter().map(|c| BoxGraph::new(c.dbox)).collect();

    let interior: Vec<bool> = (0..index_graph.num_vertices() as u32)
        .map(|v| index_graph.neighbours(v).len() == 4)
        .collect();

    Ok(BlockPartition {
        n_block,
        lambda,
        index_graph,
        blocks,
        block_graphs,
        connectors,
        connector_graphs,
        interior,
    })
}

impl BlockPartition {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn index_of(&self, k: Point) -> Option<u32> {
        self.index_graph.vertex_index(k)
    }

    pub fn interior_indices(&self) -> Vec<u32> {
        (0..self.num_blocks() as u32)
            .filter(|&v| self.interior[v as usize])
            .collect()
    }

    /// The stray-path diameter threshold sqrt(N)/10 of the block event.
    pub fn r_threshold(&self) -> f64 {
        (self.n_block as f64).sqrt() / 10.0
    }

    /// The window around an interior index: the plus-shaped union of its
    /// block and the four neighbouring blocks, minus the connectors that
    /// point away from it.
    pub fn window_e(&self, idx: u32) -> HashSet<Point> {
        let centre = self.index_graph.point_of(idx);
        let mut set = HashSet::new();
        let mut members = vec![idx];
        for &(_, j) in self.index_graph.neighbours(idx) {
            members.push(j);
        }
        for &v in &members {
            set.extend(self.blocks[v as usize].vertices());
        }
        for &(_, j) in self.index_graph.neighbours(idx) {
            for &(edge, k) in self.index_graph.neighbours(j) {
                if self.index_graph.point_of(k) == centre {
                    continue;
                }
                for p in self.connectors[edge as usize].dbox.vertices() {
                    set.remove(&p);
                }
            }
        }
        set
    }

    /// Extract a sub-box configuration from a configuration on the big box.
    pub fn extract_bits(&self, big: &BoxGraph, bits: &[bool], sub: &BoxGraph) -> Vec<bool> {
        let mut out = vec![false; sub.num_edges()];
        for e in 0..sub.num_edges() as u32 {
            let (a, b) = sub.edge_points(e).endpoints();
            let idx = big
                .edge_index(a, b)
                .expect("sub-box edges lie inside the big box");
            out[e as usize] = bits[idx as usize];
        }
        out
    }
}

/// Connector event: an axis-crossing of the connector box exists.
pub fn block_event_k(
    partition: &BlockPartition,
    big: &BoxGraph,
    bits: &[bool],
    connector: usize,
) -> bool {
    let d = &partition.connectors[connector];
    let graph = &partition.connector_graphs[connector];
    let sub_bits = partition.extract_bits(big, bits, graph);
    let lab = label_clusters(graph, &sub_bits);
    !lab.crossing_clusters(d.axis).is_empty()
}

/// Block event: a unique crossing cluster exists in the block and every
/// other cluster has diameter below sqrt(N)/10 (real comparison, no
/// rounding of the threshold).
pub fn block_event_r(partition: &BlockPartition, big: &BoxGraph, bits: &[bool], idx: u32) -> bool {
    let graph = &partition.block_graphs[idx as usize];
    let sub_bits = partition.extract_bits(big, bits, graph);
    let lab = label_clusters(graph, &sub_bits);
    let crossing = lab.full_crossing_clusters();
    if crossing.len() != 1 {
        return false;
    }
    let star = crossing[0];
    let threshold = partition.r_threshold();
    lab.clusters
        .iter()
        .enumerate()
        .all(|(c, stats)| c as u32 == star || (stats.diameter() as f64) < threshold)
}

/// The realized block process with the per-index witnesses.
#[derive(Clone, Debug)]
pub struct BlockRealization {
    pub x: Vec<bool>,
    pub r_ok: Vec<bool>,
    /// Connector verdicts aligned with the partition's connector list.
    pub k_ok: Vec<bool>,
}

/// Evaluate the block process: X_k = 1 exactly when R_k holds and every
/// connector of k is crossed.
pub fn compute_x(partition: &BlockPartition, big: &BoxGraph, bits: &[bool]) -> BlockRealization {
    let k_ok: Vec<bool> = (0..partition.connectors.len())
        .map(|c| block_event_k(partition, big, bits, c))
        .collect();
    let r_ok: Vec<bool> = (0..partition.num_blocks() as u32)
        .map(|i| block_event_r(partition, big, bits, i))
        .collect();
    let x = (0..partition.num_blocks() as u32)
        .map(|i| {
            r_ok[i as usize]
                && partition
                    .index_graph
                    .neighbours(i)
                    .iter()
                    .all(|&(edge, _)| k_ok[edge as usize])
        })
        .collect();
    BlockRealization { x, r_ok, k_ok }
}

/// Site-percolation labeling of the occupied blocks on the index graph.
pub struct BlockClusterLabeling {
    pub cluster_of: Vec<Option<u32>>,
    pub sizes: Vec<u32>,
    pub crossing: Vec<u32>,
}

pub fn label_occupied_blocks(
    partition: &BlockPartition,
    realization: &BlockRealization,
) -> BlockClusterLabeling {
    let g = &partition.index_graph;
    let nv = g.num_vertices();
    let mut uf = UnionFind::new(nv);
    for e in 0..g.num_edges() as u32 {
        let (a, b) = g.edge_endpoints(e);
        if realization.x[a as usize] && realization.x[b as usize] {
            uf.union(a, b);
        }
    }
    let mut label_of_root = vec![u32::MAX; nv];
    let mut cluster_of = vec![None; nv];
    let mut sizes: Vec<u32> = Vec::new();
    let mut touches: Vec<[bool; 4]> = Vec::new();
    for v in 0..nv as u32 {
        if !realization.x[v as usize] {
            continue;
        }
        let root = uf.find(v) as usize;
        let label = if label_of_root[root] == u32::MAX {
            label_of_root[root] = sizes.len() as u32;
            sizes.push(0);
            touches.push([false; 4]);
            label_of_root[root]
        } else {
            label_of_root[root]
        };
        cluster_of[v as usize] = Some(label);
        sizes[label as usize] += 1;
        let flags = g.face_flags(v);
        for i in 0..4 {
            touches[label as usize][i] |= flags[i];
        }
    }
    let crossing = (0..sizes.len() as u32)
        .filter(|&c| touches[c as usize].iter().all(|t| *t))
        .collect();
    BlockClusterLabeling {
        cluster_of,
        sizes,
        crossing,
    }
}

/// Z: the occupied blocks contain a unique crossing cluster holding at
/// least a (1-delta) fraction of all block indices.
pub fn event_z(
    partition: &BlockPartition,
    realization: &BlockRealization,
    delta: f64,
) -> EventOutcome {
    let labeling = label_occupied_blocks(partition, realization);
    let total = partition.num_blocks() as f64;
    let holds = labeling.crossing.len() == 1
        && labeling.sizes[labeling.crossing[0] as usize] as f64 >= (1.0 - delta) * total;
    let witness = labeling.crossing.clone();
    let frac = labeling
        .crossing
        .first()
        .map(|&c| labeling.sizes[c as usize] as f64 / total)
        .unwrap_or(0.0);
    EventOutcome {
        name: "Z",
        holds,
        witness,
        diagnostics: vec![
            ("crossing_block_clusters", labeling.crossing.len() as f64),
            ("crossing_block_fraction", frac),
        ],
    }
}

/// Microscopic consequence of Z: the per-block crossing clusters of the
/// occupied crossing cluster all belong to one cluster of the underlying
/// configuration, and that cluster crosses the whole box.
pub fn z_microscopic_bridge(
    partition: &BlockPartition,
    big: &BoxGraph,
    bits: &[bool],
    realization: &BlockRealization,
) -> bool {
    let labeling = label_occupied_blocks(partition, realization);
    if labeling.crossing.len() != 1 {
        return false;
    }
    let tilde = labeling.crossing[0];
    let full = label_clusters(big, bits);
    let mut global_label: Option<u32> = None;
    for v in 0..partition.num_blocks() as u32 {
        if labeling.cluster_of[v as usize] != Some(tilde) {
            continue;
        }
        let graph = &partition.block_graphs[v as usize];
        let sub_bits = partition.extract_bits(big, bits, graph);
        let lab = label_clusters(graph, &sub_bits);
        let crossing = lab.full_crossing_clusters();
        if crossing.len() != 1 {
            return false;
        }
        let rep = (0..graph.num_vertices() as u32)
            .find(|&u| lab.cluster_of[u as usize] == crossing[0])
            .expect("crossing cluster nonempty");
        let p = graph.point_of(rep);
        let g = full.cluster_of[big.vertex_index(p).unwrap() as usize];
        match global_label {
            None => global_label = Some(g),
            Some(existing) if existing != g => return false,
            _ => {}
        }
    }
    match global_label {
        Some(label) => full.clusters[label as usize].is_crossing(),
        None => false,
    }
}

/// Total volume of block clusters with diameter at least sqrt(N).
pub fn y_statistic(partition: &BlockPartition, big: &BoxGraph, bits: &[bool], idx: u32) -> u64 {
    let graph = &partition.block_graphs[idx as usize];
    let sub_bits = partition.extract_bits(big, bits, graph);
    let lab = label_clusters(graph, &sub_bits);
    let threshold = (partition.n_block as f64).sqrt();
    lab.clusters
        .iter()
        .filter(|c| c.diameter() as f64 >= threshold)
        .map(|c| c.volume as u64)
        .sum()
}

/// Frame/core split of the blocks: the frame G_i collects vertices within
/// L1 distance sqrt(N) of the block boundary.
#[derive(Clone, Debug)]
pub struct Regions {
    pub g_sizes: Vec<u64>,
    pub q_sizes: Vec<u64>,
    pub total_g: u64,
}

pub fn in_frame(partition: &BlockPartition, idx: u32, p: Point) -> bool {
    let b = partition.blocks[idx as usize];
    debug_assert!(b.contains(p));
    let depth_x = (p.x - (b.lo().x + 1)).min(b.hi().x - p.x);
    let depth_y = (p.y - (b.lo().y + 1)).min(b.hi().y - p.y);
    (depth_x.min(depth_y) as f64) <= (partition.n_block as f64).sqrt()
}

pub fn regions_g_q(partition: &BlockPartition) -> Regions {
    let mut g_sizes = Vec::with_capacity(partition.num_blocks());
    let mut q_sizes = Vec::with_capacity(partition.num_blocks());
    let mut total_g = 0;
    for idx in 0..partition.num_blocks() as u32 {
        let mut g = 0u64;
        let mut q = 0u64;
        for p in partition.blocks[idx as usize].vertices() {
            if in_frame(partition, idx, p) {
                g += 1;
            } else {
                q += 1;
            }
        }
        total_g += g;
        g_sizes.push(g);
        q_sizes.push(q);
    }
    Regions {
        g_sizes,
        q_sizes,
        total_g,
    }
}

/// Conditional occurrence counts of {X = 0} at the probe index, binned by
/// the joint state of the blocks at rescaled L1 distance greater than one.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BinReport {
    pub key: u32,
    pub count: u64,
    pub zeros: u64,
    /// Bins with fewer than 100 samples are reported, not dropped, but
    /// flagged inconclusive.
    pub conclusive: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DominationPoint {
    pub n_block: i64,
    pub box_side: i64,
    pub report: EstimateReport,
    pub bins: Vec<BinReport>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DominationReport {
    pub points: Vec<DominationPoint>,
    /// Least-squares fit of log Phat[X=0] against sqrt(N); the domination
    /// rate C is the negated slope.
    pub fit: Option<LineFit>,
    pub c_estimate: Option<f64>,
}

/// Estimate P[X = 0] at the centre block of B(3N) over a grid of block
/// scales, with the conditional bins over the diagonal neighbour states.
pub fn domination_probe(
    params: Parameters,
    wired: bool,
    n_grid: &[i64],
    replicas: u64,
    schedule: Schedule,
    seed: u64,
) -> Result<DominationReport> {
    if replicas == 0 {
        return Err(Error::ZeroReplicas);
    }
    let mut points = Vec::new();
    for &n_block in n_grid {
        let lambda = LatticeBox::symmetric((3 * n_block) as u32)?;
        let partition = build_partition(lambda, n_block)?;
        let big = BoxGraph::new(lambda);
        let pi = if wired {
            BoundaryPartition::wired(&big)
        } else {
            BoundaryPartition::free(&big)
        };
        let centre = partition
            .index_of(Point::new(0, 0))
            .expect("centre index exists");
        assert!(partition.interior[centre as usize]);
        // conditioning set: indices at rescaled L1 distance > 1
        let far: Vec<u32> = (0..partition.num_blocks() as u32)
            .filter(|&v| {
                let k = partition.index_graph.point_of(v);
                k.x.abs() + k.y.abs() > 1
            })
            .collect();

        let outcomes = run_replicas(replicas, |i| {
            let mut chain = Chain::new(&big, &pi, params, seed ^ i);
            chain.run(schedule);
            let realization = compute_x(&partition, &big, chain.bits());
            let zero = !realization.x[centre as usize];
            let mut key = 0u32;
            for (b, &v) in far.iter().enumerate() {
                if realization.x[v as usize] {
                    key |= 1 << b;
                }
            }
            (zero, key)
        });

        let zeros = outcomes.iter().filter(|(z, _)| *z).count() as u64;
        let (ci_low, ci_high) = wilson_interval(zeros, replicas);
        let labels = RunLabels {
            boundary: if wired { "wired" } else { "free" },
            box_label: "B(3N)",
        };
        let report = EstimateReport {
            trials: replicas,
            successes: zeros,
            point: zeros as f64 / replicas as f64,
            ci_low,
            ci_high,
            seed,
            p: params.p,
            q: params.q,
            boundary: labels.boundary.to_string(),
            box_label: labels.box_label.to_string(),
            burn_in: schedule.burn_in,
            sweeps: schedule.sweeps,
        };
        let mut by_key: std::collections::BTreeMap<u32, (u64, u64)> =
            std::collections::BTreeMap::new();
        for (zero, key) in outcomes {
            let entry = by_key.entry(key).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += zero as u64;
        }
        let bins = by_key
            .into_iter()
            .map(|(key, (count, zeros))| BinReport {
                key,
                count,
                zeros,
                conclusive: count >= 100,
            })
            .collect();
        points.push(DominationPoint {
            n_block,
            box_side: lambda.side(Axis::X),
            report,
            bins,
        });
    }
    // fit log Phat against sqrt(N) over resolvable points
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for pt in &points {
        if pt.report.resolvable() {
            xs.push((pt.n_block as f64).sqrt());
            ys.push(pt.report.point.ln());
            let s = pt.report.successes as f64;
            let t = pt.report.trials as f64;
            ws.push(s * t / (t - s));
        }
    }
    let fit = if xs.len() >= 3 {
        weighted_line_fit(&xs, &ys, &ws)
    } else {
        None
    };
    let c_estimate = fit.map(|f| -f.slope);
    Ok(DominationReport {
        points,
        fit,
        c_estimate,
    })
}
