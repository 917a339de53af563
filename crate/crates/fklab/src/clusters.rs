//! Cluster labeling and the macroscopic events: crossings, the unique
//! crossing cluster, stray-path control, volume windows, boundary-cluster
//! volume and intermediate clusters.

use crate::geometry::{Axis, LatticeBox};
use crate::graph::BoxGraph;
use crate::union_find::UnionFind;

/// Per-cluster statistics gathered in one labeling pass.
#[derive(Clone, Debug)]
pub struct ClusterStats {
    pub volume: u32,
    pub min_x: i64,
    pub max_x: i64,
    pub min_y: i64,
    pub max_y: i64,
    /// Face-touch flags indexed [XNeg, XPos, YNeg, YPos].
    pub touches: [bool; 4],
    pub touches_boundary: bool,
}

impl ClusterStats {
    pub fn diameter(&self) -> i64 {
        (self.max_x - self.min_x).max(self.max_y - self.min_y)
    }

    pub fn spread(&self, axis: Axis) -> i64 {
        match axis {
            Axis::X => self.max_x - self.min_x,
            Axis::Y => self.max_y - self.min_y,
        }
    }

    /// Touches both faces of the given axis.
    pub fn crosses(&self, axis: Axis) -> bool {
        match axis {
            Axis::X => self.touches[0] && self.touches[1],
            Axis::Y => self.touches[2] && self.touches[3],
        }
    }

    /// Crossing cluster in the two-axis sense: contains a 1-crossing and a
    /// 2-crossing path. For a connected cluster this is exactly touching
    /// both faces of both axes.
    pub fn is_crossing(&self) -> bool {
        self.crosses(Axis::X) && self.crosses(Axis::Y)
    }

    /// Intersects all four faces (the maximal-cluster notion). Coincides
    /// with [`is_crossing`](Self::is_crossing) for connected clusters.
    pub fn touches_all_faces(&self) -> bool {
        self.touches.iter().all(|t| *t)
    }
}

#[derive(Clone, Debug)]
pub struct ClusterLabeling {
    /// Cluster id per vertex.
    pub cluster_of: Vec<u32>,
    pub clusters: Vec<ClusterStats>,
}

impl ClusterLabeling {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Labels of clusters joining both faces of the axis.
    pub fn crossing_clusters(&self, axis: Axis) -> Vec<u32> {
        (0..self.clusters.len() as u32)
            .filter(|&c| self.clusters[c as usize].crosses(axis))
            .collect()
    }

    /// Labels of clusters crossing in both axes.
    pub fn full_crossing_clusters(&self) -> Vec<u32> {
        (0..self.clusters.len() as u32)
            .filter(|&c| self.clusters[c as usize].is_crossing())
            .collect()
    }

    pub fn total_volume(&self) -> u64 {
        self.clusters.iter().map(|c| c.volume as u64).sum()
    }

    /// Index of the maximal-volume cluster, ties broken by smallest label,
    /// plus whether the maximum was strict.
    pub fn maximal_cluster(&self) -> Option<(u32, bool)> {
        if self.clusters.is_empty() {
            return None;
        }
        let mut best = 0u32;
        let mut ties = 1u32;
        for c in 1..self.clusters.len() as u32 {
            let v = self.clusters[c as usize].volume;
            let b = self.clusters[best as usize].volume;
            if v > b {
                best = c;
                ties = 1;
            } else if v == b {
                ties += 1;
            }
        }
        Some((best, ties == 1))
    }
}

/// Label the open clusters of a configuration in one union-find pass.
pub fn label_clusters(graph: &BoxGraph, bits: &[bool]) -> ClusterLabeling {
    debug_assert_eq!(bits.len(), graph.num_edges());
    let nv = graph.num_vertices();
    let mut uf = UnionFind::new(nv);
    for (e, &open) in bits.iter().enumerate() {
        if open {
            let (a, b) = graph.edge_endpoints(e as u32);
            uf.union(a, b);
        }
    }
    let mut label_of_root: Vec<u32> = vec![u32::MAX; nv];
    let mut cluster_of = vec![0u32; nv];
    let mut clusters: Vec<ClusterStats> = Vec::new();
    for v in 0..nv as u32 {
        let root = uf.find(v) as usize;
        let label = if label_of_root[root] == u32::MAX {
            let l = clusters.len() as u32;
            label_of_root[root] = l;
            let p = graph.point_of(v);
            clusters.push(ClusterStats {
                volume: 0,
                min_x: p.x,
                max_x: p.x,
                min_y: p.y,
                max_y: p.y,
                touches: [false; 4],
                touches_boundary: false,
            });
            l
        } else {
            label_of_root[root]
        };
        cluster_of[v as usize] = label;
        let p = graph.point_of(v);
        let stats = &mut clusters[label as usize];
        stats.volume += 1;
        stats.min_x = stats.min_x.min(p.x);
        stats.max_x = stats.max_x.max(p.x);
        stats.min_y = stats.min_y.min(p.y);
        stats.max_y = stats.max_y.max(p.y);
        let flags = graph.face_flags(v);
        for i in 0..4 {
            stats.touches[i] |= flags[i];
        }
        stats.touches_boundary |= graph.is_boundary(v);
    }
    let labeling = ClusterLabeling {
        cluster_of,
        clusters,
    };
    // planarity: at most one crossing cluster can exist
    debug_assert!(labeling.full_crossing_clusters().len() <= 1);
    labeling
}

/// Verdict of an event detector with the witnessing labels and diagnostics.
#[derive(Clone, Debug)]
pub struct EventOutcome {
    pub name: &'static str,
    pub holds: bool,
    pub witness: Vec<u32>,
    pub diagnostics: Vec<(&'static str, f64)>,
}

/// U: there is a unique open cluster crossing the box.
pub fn event_u(labeling: &ClusterLabeling) -> EventOutcome {
    let crossing = labeling.full_crossing_clusters();
    assert!(
        crossing.len() <= 1,
        "planarity violated: {} crossing clusters",
        crossing.len()
    );
    EventOutcome {
        name: "U",
        holds: crossing.len() == 1,
        witness: crossing.clone(),
        diagnostics: vec![("crossing_clusters", crossing.len() as f64)],
    }
}

/// R^g: U holds and every open path of diameter >= g lies in the crossing
/// cluster. A path can never leave its cluster, so the check reduces to
/// cluster diameters.
pub fn event_rg(labeling: &ClusterLabeling, g_value: f64) -> EventOutcome {
    let u = event_u(labeling);
    if !u.holds {
        return EventOutcome {
            name: "Rg",
            holds: false,
            witness: vec![],
            diagnostics: u.diagnostics,
        };
    }
    let star = u.witness[0];
    let mut max_other = 0.0f64;
    let mut holds = true;
    for (c, stats) in labeling.clusters.iter().enumerate() {
        if c as u32 == star {
            continue;
        }
        let d = stats.diameter() as f64;
        max_other = max_other.max(d);
        if d >= g_value {
            holds = false;
        }
    }
    EventOutcome {
        name: "Rg",
        holds,
        witness: vec![star],
        diagnostics: vec![("max_other_diameter", max_other), ("g", g_value)],
    }
}

/// O^g: R^g holds and the crossing cluster crosses every sub-box of class
/// B2(g) contained in the box. The scan enumerates all admissible side
/// pairs on a stride-1 grid, O(n^4) sub-boxes with early exit.
pub fn event_og(
    graph: &BoxGraph,
    bits: &[bool],
    labeling: &ClusterLabeling,
    g_value: f64,
) -> EventOutcome {
    let rg = event_rg(labeling, g_value);
    if !rg.holds {
        return EventOutcome {
            name: "Og",
            holds: false,
            witness: rg.witness,
            diagnostics: rg.diagnostics,
        };
    }
    let star = rg.witness[0];
    let bbox = graph.bounding_box();
    let min_side = crate::geometry::radius_vertex_count(g_value);
    let max_side = crate::geometry::radius_vertex_count(2.0 * g_value);
    let mut scanned = 0u64;
    for sx in min_side..=max_side {
        if sx > bbox.side(Axis::X) {
            break;
        }
        for sy in min_side..=max_side {
            if sy > bbox.side(Axis::Y) {
                break;
            }
            for x0 in bbox.lo().x..=bbox.hi().x - sx {
                for y0 in bbox.lo().y..=bbox.hi().y - sy {
                    scanned += 1;
                    let sub = LatticeBox::new(
                        crate::geometry::Point::new(x0, y0),
                        crate::geometry::Point::new(x0 + sx, y0 + sy),
                    )
                    .expect("positive sides");
                    if !star_crosses_sub_box(graph, bits, labeling, star, &sub) {
                        return EventOutcome {
                            name: "Og",
                            holds: false,
                            witness: vec![star],
                            diagnostics: vec![
                                ("sub_boxes_scanned", scanned as f64),
                                ("failed_at_x", x0 as f64),
                                ("failed_at_y", y0 as f64),
                            ],
                        };
                    }
                }
            }
        }
    }
    EventOutcome {
        name: "Og",
        holds: true,
        witness: vec![star],
        diagnostics: vec![("sub_boxes_scanned", scanned as f64)],
    }
}

/// Does the crossing cluster contain a crossing of the sub-box, using only
/// edges inside the sub-box?
fn star_crosses_sub_box(
    graph: &BoxGraph,
    bits: &[bool],
    labeling: &ClusterLabeling,
    star: u32,
    sub: &LatticeBox,
) -> bool {
    let sub_graph = BoxGraph::new(*sub);
    let mut sub_bits = vec![false; sub_graph.num_edges()];
    for e in 0..sub_graph.num_edges() as u32 {
        let (a, b) = sub_graph.edge_points(e).endpoints();
        let big = graph
            .edge_index(a, b)
            .expect("sub-box edges lie in the box");
        sub_bits[e as usize] = bits[big as usize];
    }
    let sub_labeling = label_clusters(&sub_graph, &sub_bits);
    for c in sub_labeling.full_crossing_clusters() {
        // a sub-box cluster is connected inside the box, so one
        // representative decides its global label
        let rep = (0..sub_graph.num_vertices() as u32)
            .find(|&v| sub_labeling.cluster_of[v as usize] == c)
            .expect("cluster is nonempty");
        let p = sub_graph.point_of(rep);
        let global = labeling.cluster_of[graph.vertex_index(p).unwrap() as usize];
        if global == star {
            return true;
        }
    }
    false
}

/// V: U holds and the crossing cluster has volume above (theta - delta) |V|.
pub fn event_v(labeling: &ClusterLabeling, delta: f64, theta_ref: f64) -> EventOutcome {
    let u = event_u(labeling);
    let n2 = labeling.total_volume() as f64;
    if !u.holds {
        return EventOutcome {
            name: "V",
            holds: false,
            witness: vec![],
            diagnostics: vec![("volume_fraction", 0.0)],
        };
    }
    let star = u.witness[0];
    let vol = labeling.clusters[star as usize].volume as f64;
    EventOutcome {
        name: "V",
        holds: vol > (theta_ref - delta) * n2,
        witness: vec![star],
        diagnostics: vec![("volume_fraction", vol / n2)],
    }
}

/// Total volume of clusters meeting the inner boundary.
pub fn boundary_cluster_volume(labeling: &ClusterLabeling) -> u64 {
    labeling
        .clusters
        .iter()
        .filter(|c| c.touches_boundary)
        .map(|c| c.volume as u64)
        .sum()
}

/// The l-intermediate clusters: not of maximal volume and with diameter at
/// least `l`. Ties for the maximum are broken by smallest label so the
/// detector stays total.
pub fn intermediate_set(labeling: &ClusterLabeling, l: f64) -> (Vec<u32>, u64) {
    let Some((max_label, _strict)) = labeling.maximal_cluster() else {
        return (vec![], 0);
    };
    let mut labels = Vec::new();
    let mut volume = 0u64;
    for (c, stats) in labeling.clusters.iter().enumerate() {
        if c as u32 == max_label {
            continue;
        }
        if (stats.diameter() as f64) >= l {
            labels.push(c as u32);
            volume += stats.volume as u64;
        }
    }
    (labels, volume)
}

/// K: a unique maximal-volume cluster exists, it touches all four faces,
/// its volume fraction lies in (theta - eps, theta + eps), and the
/// l-intermediate volume fraction stays below eps.
pub fn event_k(labeling: &ClusterLabeling, eps: f64, l: f64, theta_ref: f64) -> EventOutcome {
    let n2 = labeling.total_volume() as f64;
    let Some((max_label, strict)) = labeling.maximal_cluster() else {
        return EventOutcome {
            name: "K",
            holds: false,
            witness: vec![],
            diagnostics: vec![],
        };
    };
    let stats = &labeling.clusters[max_label as usize];
    let fraction = stats.volume as f64 / n2;
    let (_, inter_volume) = intermediate_set(labeling, l);
    let inter_fraction = inter_volume as f64 / n2;
    let holds = strict
        && stats.touches_all_faces()
        && fraction > theta_ref - eps
        && fraction < theta_ref + eps
        && inter_fraction < eps;
    EventOutcome {
        name: "K",
        holds,
        witness: vec![max_label],
        diagnostics: vec![
            ("max_volume_fraction", fraction),
            ("intermediate_fraction", inter_fraction),
            ("unique_max", strict as u8 as f64),
        ],
    }
}
