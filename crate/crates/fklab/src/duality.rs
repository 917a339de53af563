//! Planar duality: the dual parameter, the edge bijection between a box and
//! its dual, configuration complementation, event transport and the exact
//! duality identity.
//!
//! The identity compares the free-boundary measure on a box against the
//! wired measure on its dual at the dual parameter. Under the wired
//! partition every dual boundary vertex sits in one class, so the states of
//! edges inside the dual boundary never change the cluster count; those
//! edges therefore carry an independent Bernoulli factor that integrates to
//! one, and the dual side can be enumerated over interior dual edges only.
//! A unit test checks this marginalization against a full dual enumeration
//! on small boxes.

use crate::clusters::{label_clusters, ClusterLabeling};
use crate::error::{Error, Result};
use crate::fk_core::{exact_distribution, exact_distribution_with, BoundaryPartition, Parameters};
use crate::geometry::{dual_edge, Axis, Face, LatticeBox};
use crate::graph::BoxGraph;

/// The dual point: q(1-p) / (p + q(1-p)).
pub fn dual_parameter(params: Parameters) -> Parameters {
    let Parameters { p, q } = params;
    Parameters {
        p: q * (1.0 - p) / (p + q * (1.0 - p)),
        q,
    }
}

/// Precomputed geometry tying a box to its dual: the dual graph and the
/// bijection between primal edges and interior dual edges.
#[derive(Clone, Debug)]
pub struct DualityContext {
    primal: BoxGraph,
    dual: BoxGraph,
    /// Dual edge index per primal edge index.
    dual_of: Vec<u32>,
    /// Primal edge index per dual edge index; `None` on the dual boundary.
    primal_of: Vec<Option<u32>>,
}

impl DualityContext {
    pub fn new(bbox: LatticeBox) -> Result<DualityContext> {
        let sx = bbox.side(Axis::X);
        let sy = bbox.side(Axis::Y);
        if sx < 2 || sy < 2 {
            return Err(Error::DegenerateDual(sx, sy));
        }
        let primal = BoxGraph::new(bbox);
        let dual = BoxGraph::new(bbox.dual().as_shifted_box());
        let mut dual_of = vec![u32::MAX; primal.num_edges()];
        let mut primal_of = vec![None; dual.num_edges()];
        for e in 0..primal.num_edges() as u32 {
            let d = dual_edge(primal.edge_points(e));
            let (a, b) = d.endpoints();
            let de = dual
                .edge_index(a, b)
                .expect("the crossing edge lies in the dual box");
            dual_of[e as usize] = de;
            primal_of[de as usize] = Some(e);
        }
        Ok(DualityContext {
            primal,
            dual,
            dual_of,
            primal_of,
        })
    }

    pub fn primal_graph(&self) -> &BoxGraph {
        &self.primal
    }

    pub fn dual_graph(&self) -> &BoxGraph {
        &self.dual
    }

    pub fn dual_edge_index(&self, primal_edge: u32) -> u32 {
        self.dual_of[primal_edge as usize]
    }

    /// Whether a dual edge is interior, i.e. crosses a primal edge.
    pub fn is_interior_dual(&self, dual_edge: u32) -> bool {
        self.primal_of[dual_edge as usize].is_some()
    }

    /// The primal edge a dual edge crosses; `None` on the dual boundary.
    pub fn primal_of(&self, dual_edge: u32) -> Option<u32> {
        self.primal_of[dual_edge as usize]
    }

    /// The per-edge complement through the bijection. Dual boundary edges
    /// are left closed; they carry no primal information.
    pub fn dual_configuration(&self, primal_bits: &[bool]) -> Result<Vec<bool>> {
        if primal_bits.len() != self.primal.num_edges() {
            return Err(Error::SupportMismatch {
                got: primal_bits.len(),
                expected: self.primal.num_edges(),
            });
        }
        let mut dual_bits = vec![false; self.dual.num_edges()];
        for (e, &open) in primal_bits.iter().enumerate() {
            dual_bits[self.dual_of[e] as usize] = !open;
        }
        Ok(dual_bits)
    }

    /// Pull a dual configuration back to the primal box, inverting the
    /// complement map. Dual boundary edges are ignored.
    pub fn primal_configuration(&self, dual_bits: &[bool]) -> Result<Vec<bool>> {
        if dual_bits.len() != self.dual.num_edges() {
            return Err(Error::SupportMismatch {
                got: dual_bits.len(),
                expected: self.dual.num_edges(),
            });
        }
        let mut primal_bits = vec![false; self.primal.num_edges()];
        for (e, slot) in primal_bits.iter_mut().enumerate() {
            *slot = !dual_bits[self.dual_of[e] as usize];
        }
        Ok(primal_bits)
    }

    /// Transport a primal event to the dual side: the returned predicate
    /// holds on a dual configuration exactly when some primal configuration
    /// in the event maps to it on interior dual edges. Works semantically,
    /// so it is usable beyond the enumeration cap.
    pub fn transport_event<'a, F>(&'a self, event: F) -> impl Fn(&[bool]) -> bool + 'a
    where
        F: Fn(&[bool]) -> bool + 'a,
    {
        move |dual_bits: &[bool]| {
            let primal = self
                .primal_configuration(dual_bits)
                .expect("support checked by caller");
            event(&primal)
        }
    }

    /// Is there an open dual path joining the two `axis`-faces of the dual
    /// box that uses interior dual edges only?
    pub fn dual_crossing(&self, dual_bits: &[bool], axis: Axis) -> bool {
        let (lo_face, hi_face) = match axis {
            Axis::X => (Face::XNeg, Face::XPos),
            Axis::Y => (Face::YNeg, Face::YPos),
        };
        let mut visited = vec![false; self.dual.num_vertices()];
        let mut queue = std::collections::VecDeque::new();
        for &v in self.dual.face_vertices(lo_face) {
            visited[v as usize] = true;
            queue.push_back(v);
        }
        let mut target = vec![false; self.dual.num_vertices()];
        for &v in self.dual.face_vertices(hi_face) {
            target[v as usize] = true;
        }
        while let Some(v) = queue.pop_front() {
            if target[v as usize] {
                return true;
            }
            for &(e, u) in self.dual.neighbours(v) {
                if !visited[u as usize] && self.is_interior_dual(e) && dual_bits[e as usize] {
                    visited[u as usize] = true;
                    queue.push_back(u);
                }
            }
        }
        // sources may themselves be targets on degenerate boxes
        self.dual
            .face_vertices(lo_face)
            .iter()
            .any(|&v| target[v as usize])
    }
}

/// Max discrepancy, over all primal atoms, between the free measure on the
/// box and the wired measure on its dual at the dual parameter.
pub fn verify_duality_identity(bbox: LatticeBox, params: Parameters, cap: usize) -> Result<f64> {
    let ctx = DualityContext::new(bbox)?;
    if ctx.primal.num_edges() > cap {
        return Err(Error::EnumerationCap {
            edges: ctx.primal.num_edges(),
            cap,
        });
    }
    let free = BoundaryPartition::free(&ctx.primal);
    let primal_dist = exact_distribution(&ctx.primal, &free, params)?;

    let dual_params = dual_parameter(params);
    let wired = BoundaryPartition::wired(&ctx.dual);
    let interior: Vec<u32> = (0..ctx.dual.num_edges() as u32)
        .filter(|&e| ctx.is_interior_dual(e))
        .collect();
    let dual_dist = exact_distribution_with(
        &ctx.dual,
        &wired,
        dual_params,
        interior.clone(),
        vec![false; ctx.dual.num_edges()],
    )?;

    let mut dual_pos = std::collections::HashMap::new();
    for (pos, &de) in interior.iter().enumerate() {
        dual_pos.insert(de, pos);
    }
    let m = ctx.primal.num_edges();
    let mut max_diff = 0.0f64;
    for mask in 0..1u32 << m {
        let mut dual_mask = 0u32;
        for e in 0..m {
            let open = mask >> e & 1 == 1;
            if !open {
                let de = ctx.dual_of[e];
                dual_mask |= 1 << dual_pos[&de];
            }
        }
        let diff =
            (primal_dist.atom_probability(mask) - dual_dist.atom_probability(dual_mask)).abs();
        max_diff = max_diff.max(diff);
    }
    Ok(max_diff)
}

/// Evaluate both sides of crossing complementarity on one configuration:
/// whether a primal crossing along `axis` exists, and whether an open dual
/// path joins the faces of the perpendicular axis through interior dual
/// edges. Exactly one side holds.
pub fn primal_crossing_blocked_by_dual(
    ctx: &DualityContext,
    primal_bits: &[bool],
    axis: Axis,
) -> (bool, bool) {
    let labeling: ClusterLabeling = label_clusters(ctx.primal_graph(), primal_bits);
    let has_primal = !labeling.crossing_clusters(axis).is_empty();
    let dual_bits = ctx
        .dual_configuration(primal_bits)
        .expect("support matches");
    let perpendicular = match axis {
        Axis::X => Axis::Y,
        Axis::Y => Axis::X,
    };
    let has_dual = ctx.dual_crossing(&dual_bits, perpendicular);
    (has_primal, has_dual)
}
