//! Single-edge heat-bath MCMC for the FK measure, with seeded replicas and
//! event-probability estimation.
//!
//! Each edge update resamples the edge from its exact conditional given all
//! other edges: p when the endpoints are wired without the edge, and
//! p/(p+q(1-p)) otherwise, so detailed balance holds per update. The wiring
//! query runs a bidirectional search over open edges that may hop through
//! boundary-partition classes. At q = 1 the conditional is p regardless of
//! wiring and one full sweep already produces an exact product-Bernoulli
//! sample, so chains take that shortcut.
//!
//! Replicas are independent chains seeded as `seed ^ replica`, aggregated
//! in replica order, so estimates are identical whatever the worker count.

use crate::error::{Error, Result};
use crate::fk_core::{BoundaryPartition, EdgeConfig, Parameters};
use crate::graph::BoxGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// Sweep schedule: burn-in sweeps before the reading, then optional extra
/// sweeps. The default burn-in of 64 sweeps spends 64 |E| edge updates.
#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    pub burn_in: u64,
    pub sweeps: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            burn_in: 64,
            sweeps: 0,
        }
    }
}

/// 95% Wilson score interval. The lower end is 0 exactly when there are no
/// successes and the upper end is 1 exactly when there are no failures.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// A point estimate from independent replicas, with its provenance.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EstimateReport {
    pub trials: u64,
    pub successes: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    pub boundary: String,
    pub box_label: String,
    pub burn_in: u64,
    pub sweeps: u64,
}

impl EstimateReport {
    /// CI excludes both 0 and 1, i.e. at least one success and one failure.
    pub fn resolvable(&self) -> bool {
        self.successes > 0 && self.successes < self.trials
    }

    pub fn stderr(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        (self.point * (1.0 - self.point) / self.trials as f64).sqrt()
    }
}

/// Heat-bath chain state over a box graph with a fixed boundary partition.
pub struct Chain<'a> {
    graph: &'a BoxGraph,
    params: Parameters,
    bits: Vec<bool>,
    frozen: Vec<bool>,
    rng: ChaCha8Rng,
    sweeps_done: u64,
    // conditional probability when the endpoints are not wired without e
    p_split: f64,
    // class node bookkeeping: class id per vertex, skipping singletons
    class_of: Vec<u32>,
    class_members: Vec<Vec<u32>>,
    // scratch for the bidirectional search, stamped visit marks
    mark_a: Vec<u32>,
    mark_b: Vec<u32>,
    stamp: u32,
    queue_a: VecDeque<u32>,
    queue_b: VecDeque<u32>,
}

const NO_CLASS: u32 = u32::MAX;

impl<'a> Chain<'a> {
    pub fn new(
        graph: &'a BoxGraph,
        pi: &BoundaryPartition,
        params: Parameters,
        seed: u64,
    ) -> Chain<'a> {
        let nv = graph.num_vertices();
        // singleton classes never help connectivity, drop them
        let mut class_of = vec![NO_CLASS; nv];
        let mut class_members = Vec::new();
        for class in pi.classes() {
            if class.len() < 2 {
                continue;
            }
            let id = class_members.len() as u32;
            for &v in class {
                class_of[v as usize] = id;
            }
            class_members.push(class.clone());
        }
        let n_classes = class_members.len();
        let p_split = params.p / (params.p + params.q * (1.0 - params.p));
        Chain {
            graph,
            params,
            bits: vec![false; graph.num_edges()],
            frozen: vec![false; graph.num_edges()],
            rng: ChaCha8Rng::seed_from_u64(seed),
            sweeps_done: 0,
            p_split,
            class_of,
            class_members,
            mark_a: vec![0; nv + n_classes],
            mark_b: vec![0; nv + n_classes],
            stamp: 0,
            queue_a: VecDeque::new(),
            queue_b: VecDeque::new(),
        }
    }

    /// Force edge states that the chain must never resample.
    pub fn force_edges(&mut self, closed: &[u32], open: &[u32]) -> Result<()> {
        for &e in closed {
            if open.contains(&e) {
                return Err(Error::ContradictoryForcing(e));
            }
        }
        for &e in closed {
            self.frozen[e as usize] = true;
            self.bits[e as usize] = false;
        }
        for &e in open {
            self.frozen[e as usize] = true;
            self.bits[e as usize] = true;
        }
        Ok(())
    }

    /// Warm start: independent Bernoulli(p) on every unfrozen edge.
    pub fn init_random(&mut self) {
        for e in 0..self.bits.len() {
            if !self.frozen[e] {
                self.bits[e] = self.rng.gen_bool(self.params.p);
            }
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn set_bits(&mut self, bits: &[bool]) {
        self.bits.copy_from_slice(bits);
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps_done
    }

    pub fn into_config(self) -> EdgeConfig {
        EdgeConfig { bits: self.bits }
    }

    /// One full sweep in the fixed edge scan order.
    pub fn sweep(&mut self) {
        self.sweep_traced(|_, _| {});
    }

    /// One full sweep, calling the visitor after each edge update with
    /// (edge index, new state).
    pub fn sweep_traced<F: FnMut(u32, bool)>(&mut self, mut visit: F) {
        let q_is_one = self.params.q == 1.0;
        for e in 0..self.bits.len() as u32 {
            if self.frozen[e as usize] {
                continue;
            }
            let p_open = if q_is_one || self.wired_without(e) {
                self.params.p
            } else {
                self.p_split
            };
            let new = self.rng.gen_bool(p_open);
            self.bits[e as usize] = new;
            visit(e, new);
        }
        self.sweeps_done += 1;
    }

    /// Are the endpoints of `e` joined by open edges other than `e`,
    /// counting partition classes as pre-connected? Bidirectional search
    /// expanding the smaller frontier; node ids >= num_vertices are class
    /// nodes.
    pub fn wired_without(&mut self, e: u32) -> bool {
        let (x, y) = self.graph.edge_endpoints(e);
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark_a.fill(0);
            self.mark_b.fill(0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        self.queue_a.clear();
        self.queue_b.clear();
        self.mark_a[x as usize] = stamp;
        self.mark_b[y as usize] = stamp;
        self.queue_a.push_back(x);
        self.queue_b.push_back(y);
        let nv = self.graph.num_vertices() as u32;
        loop {
            let expand_a = match (self.queue_a.is_empty(), self.queue_b.is_empty()) {
                (true, true) => return false,
                (false, true) => true,
                (true, false) => false,
                (false, false) => self.queue_a.len() <= self.queue_b.len(),
            };
            let steps = if expand_a {
                self.queue_a.len()
            } else {
                self.queue_b.len()
            };
            for _ in 0..steps {
                let node = if expand_a {
                    self.queue_a.pop_front().unwrap()
                } else {
                    self.queue_b.pop_front().unwrap()
                };
                if node < nv {
                    let v = node;
                    for i in 0..self.graph.neighbours(v).len() {
                        let (edge, u) = self.graph.neighbours(v)[i];
                        if edge == e || !self.bits[edge as usize] {
                            continue;
                        }
                        if self.reach(expand_a, u, stamp) {
                            return true;
                        }
                    }
                    let class = self.class_of[v as usize];
                    if class != NO_CLASS && self.reach(expand_a, nv + class, stamp) {
                        return true;
                    }
                } else {
                    let class = (node - nv) as usize;
                    for i in 0..self.class_members[class].len() {
                        let u = self.class_members[class][i];
                        if self.reach(expand_a, u, stamp) {
                            return true;
                        }
                    }
                }
            }
        }
    }

    /// Mark `node` from one side; true when the other side already reached it.
    fn reach(&mut self, from_a: bool, node: u32, stamp: u32) -> bool {
        let (own, other) = if from_a {
            (&mut self.mark_a, &self.mark_b)
        } else {
            (&mut self.mark_b, &self.mark_a)
        };
        if other[node as usize] == stamp {
            return true;
        }
        if own[node as usize] != stamp {
            own[node as usize] = stamp;
            if from_a {
                self.queue_a.push_back(node);
            } else {
                self.queue_b.push_back(node);
            }
        }
        false
    }

    /// Run the schedule. At q = 1 every sweep is an independent product
    /// sample, so a single sweep replaces the whole schedule.
    pub fn run(&mut self, schedule: Schedule) {
        if self.params.q == 1.0 {
            self.sweep();
            return;
        }
        self.init_random();
        for _ in 0..schedule.burn_in + schedule.sweeps {
            self.sweep();
        }
    }
}

/// Draw one configuration from the FK measure conditioned on forced edge
/// states; forced edges are never resampled.
pub fn sample_with_forced_edges(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
    forced_closed: &[u32],
    forced_open: &[u32],
    schedule: Schedule,
    seed: u64,
) -> Result<EdgeConfig> {
    let mut chain = Chain::new(graph, pi, params, seed);
    chain.force_edges(forced_closed, forced_open)?;
    chain.run(schedule);
    Ok(chain.into_config())
}

/// Fan a per-replica computation out over the worker pool. Results come
/// back in replica order, so any reduction over them is deterministic.
#[cfg(feature = "parallel")]
pub fn run_replicas<T, F>(replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..replicas).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_replicas<T, F>(replicas: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    run_replicas_serial(replicas, f)
}

/// Sequential fallback with the same contract as [`run_replicas`].
pub fn run_replicas_serial<T, F>(replicas: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..replicas).map(f).collect()
}

/// Labels carried into estimate reports.
#[derive(Clone, Copy, Debug)]
pub struct RunLabels<'a> {
    pub boundary: &'a str,
    pub box_label: &'a str,
}

/// Estimate an event probability from independent replicas: one chain and
/// one indicator reading per replica, Wilson 95% interval.
pub fn estimate_event<F>(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
    replicas: u64,
    schedule: Schedule,
    seed: u64,
    labels: RunLabels<'_>,
    event: F,
) -> Result<EstimateReport>
where
    F: Fn(&BoxGraph, &[bool]) -> bool + Sync,
{
    estimate_event_forced(
        graph,
        pi,
        params,
        replicas,
        schedule,
        seed,
        labels,
        &[],
        &[],
        event,
    )
}

/// [`estimate_event`] with forced edge states.
#[allow(clippy::too_many_arguments)]
pub fn estimate_event_forced<F>(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
    replicas: u64,
    schedule: Schedule,
    seed: u64,
    labels: RunLabels<'_>,
    forced_closed: &[u32],
    forced_open: &[u32],
    event: F,
) -> Result<EstimateReport>
where
    F: Fn(&BoxGraph, &[bool]) -> bool + Sync,
{
    if replicas == 0 {
        return Err(Error::ZeroReplicas);
    }
    for &e in forced_closed {
        if forced_open.contains(&e) {
            return Err(Error::ContradictoryForcing(e));
        }
    }
    let outcomes = run_replicas(replicas, |i| {
        let mut chain = Chain::new(graph, pi, params, seed ^ i);
        chain
            .force_edges(forced_closed, forced_open)
            .expect("checked above");
        chain.run(schedule);
        event(graph, chain.bits())
    });
    let successes = outcomes.iter().filter(|b| **b).count() as u64;
    let point = successes as f64 / replicas as f64;
    let (ci_low, ci_high) = wilson_interval(successes, replicas);
    Ok(EstimateReport {
        trials: replicas,
        successes,
        point,
        ci_low,
        ci_high,
        seed,
        p: params.p,
        q: params.q,
        boundary: labels.boundary.to_string(),
        box_label: labels.box_label.to_string(),
        burn_in: schedule.burn_in,
        sweeps: schedule.sweeps,
    })
}

/// Occupation-measure total-variation distance between one chain and the
/// exact distribution, reading the visited state after every edge update
/// across `sweeps` sweeps (after burn-in). Needs the box within the
/// enumeration cap.
pub fn occupation_tv_vs_exact(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
    sweeps: u64,
    seed: u64,
) -> Result<f64> {
    let dist = crate::fk_core::exact_distribution(graph, pi, params)?;
    let m = graph.num_edges();
    let mut chain = Chain::new(graph, pi, params, seed);
    chain.init_random();
    for _ in 0..Schedule::default().burn_in {
        chain.sweep();
    }
    let mut mask: u32 = chain
        .bits()
        .iter()
        .enumerate()
        .fold(0, |acc, (e, &b)| acc | (u32::from(b) << e));
    let mut hist = vec![0u64; 1 << m];
    let mut readings = 0u64;
    for _ in 0..sweeps {
        chain.sweep_traced(|e, open| {
            if open {
                mask |= 1 << e;
            } else {
                mask &= !(1 << e);
            }
            hist[mask as usize] += 1;
            readings += 1;
        });
    }
    let mut tv = 0.0;
    for (atom, &count) in hist.iter().enumerate() {
        let empirical = count as f64 / readings as f64;
        tv += (empirical - dist.atom_probability(atom as u32)).abs();
    }
    Ok(tv / 2.0)
}
