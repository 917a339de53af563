//! The experiment engine behind the CLI subcommands: theta estimation,
//! dual two-point decay fitting, event-probability scans across box sizes
//! with surface-vs-volume discrimination, the crossing-failure lower
//! bound, the renormalization probe and exact-enumeration runs.

use crate::clusters::{
    boundary_cluster_volume, event_k, event_og, event_rg, event_u, event_v, label_clusters,
};
use crate::duality::{dual_parameter, verify_duality_identity};
use crate::error::{Error, Result};
use crate::fk_core::{exact_event_probability, BoundaryPartition, Parameters, ENUMERATION_CAP};
use crate::geometry::{LatticeBox, Point};
use crate::graph::BoxGraph;
use crate::harness::config::{BoundarySpec, ExperimentConfig, ThetaRefSpec};
use crate::harness::fits::{fit_decay, fit_rate, DecayFit, FitPoint, RateFit, RateModel};
use crate::renorm::{build_partition, compute_x, domination_probe, event_z, y_statistic};
use crate::sampler::{estimate_event, run_replicas, Chain, EstimateReport, RunLabels, Schedule};
use crate::stats::correlation;
use serde::Serialize;
use std::collections::BTreeMap;

/// One CSV result row; every estimate is reconstructible from the stored
/// (successes, trials) integers. Exact-enumeration rows carry trials = 0
/// and collapse the interval onto the exact value.
#[derive(Clone, Debug, Serialize)]
pub struct CsvRow {
    pub experiment: String,
    pub p: f64,
    pub q: f64,
    pub boundary: String,
    pub n: Option<u32>,
    #[serde(rename = "N")]
    pub n_block: Option<i64>,
    pub event: String,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<CsvRow>,
    pub summary: serde_json::Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Exact,
    Sample,
    DualityVerify,
    Theta,
    Decay,
    Event,
    Renorm,
    LowerBound,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Exact => "exact",
            ExperimentKind::Sample => "sample",
            ExperimentKind::DualityVerify => "duality-verify",
            ExperimentKind::Theta => "theta",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Event => "event",
            ExperimentKind::Renorm => "renorm",
            ExperimentKind::LowerBound => "lower-bound",
        }
    }

    pub fn from_name(name: &str) -> Result<ExperimentKind> {
        Ok(match name {
            "exact" => ExperimentKind::Exact,
            "sample" => ExperimentKind::Sample,
            "duality-verify" => ExperimentKind::DualityVerify,
            "theta" => ExperimentKind::Theta,
            "decay" => ExperimentKind::Decay,
            "event" => ExperimentKind::Event,
            "renorm" => ExperimentKind::Renorm,
            "lower-bound" => ExperimentKind::LowerBound,
            other => return Err(Error::Config(format!("unknown experiment `{other}`"))),
        })
    }
}

/// Where a theta reference came from.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaProvenance {
    pub source: String,
    pub value: f64,
    pub n_used: Option<u32>,
    pub trials: Option<u64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

pub fn build_boundary(graph: &BoxGraph, spec: &BoundarySpec) -> Result<BoundaryPartition> {
    match spec {
        BoundarySpec::Free => Ok(BoundaryPartition::free(graph)),
        BoundarySpec::Wired => Ok(BoundaryPartition::wired(graph)),
        BoundarySpec::File(path) => {
            let text = std::fs::read_to_string(path)?;
            BoundaryPartition::from_file_str(graph, &text)
        }
    }
}

/// Point-to-boundary connection event for the theta estimate.
fn origin_reaches_boundary(graph: &BoxGraph, bits: &[bool]) -> bool {
    let centre = graph
        .vertex_index(Point::new(0, 0))
        .expect("centred boxes contain the origin");
    let lab = label_clusters(graph, bits);
    lab.clusters[lab.cluster_of[centre as usize] as usize].touches_boundary
}

/// Per-size estimates of the point-to-boundary connection probability.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaReport {
    pub estimates: Vec<EstimateReport>,
    pub n_list: Vec<u32>,
    /// Successive estimates are nonincreasing or their CIs overlap.
    pub monotone_within_ci: bool,
    /// The two largest sizes have overlapping 95% intervals.
    pub top_two_cis_overlap: Option<bool>,
}

pub fn estimate_theta(
    params: Parameters,
    boundary: &BoundarySpec,
    n_list: &[u32],
    replicas: u64,
    schedule: Schedule,
    seed: u64,
) -> Result<ThetaReport> {
    let mut estimates = Vec::new();
    for &n in n_list {
        let graph = BoxGraph::new(LatticeBox::symmetric(n)?);
        let pi = build_boundary(&graph, boundary)?;
        let label = format!("B({n})");
        let report = estimate_event(
            &graph,
            &pi,
            params,
            replicas,
            schedule,
            // distinct streams per size
            seed ^ (u64::from(n) << 32),
            RunLabels {
                boundary: &boundary.label(),
                box_label: &label,
            },
            origin_reaches_boundary,
        )?;
        estimates.push(report);
    }
    let monotone_within_ci = estimates
        .windows(2)
        .all(|w| w[1].point <= w[0].point || w[1].ci_low <= w[0].ci_high);
    let top_two_cis_overlap = if estimates.len() >= 2 {
        let a = &estimates[estimates.len() - 2];
        let b = &estimates[estimates.len() - 1];
        Some(a.ci_low <= b.ci_high && b.ci_low <= a.ci_high)
    } else {
        None
    };
    Ok(ThetaReport {
        estimates,
        n_list: n_list.to_vec(),
        monotone_within_ci,
        top_two_cis_overlap,
    })
}

/// Resolve the theta reference an event needs: either the configured fixed
/// value or a fresh estimate at B(64) with free boundary.
pub fn resolve_theta(config: &ExperimentConfig, params: Parameters) -> Result<ThetaProvenance> {
    match config.theta_ref {
        ThetaRefSpec::Fixed(value) => Ok(ThetaProvenance {
            source: "fixed".to_string(),
            value,
            n_used: None,
            trials: None,
            ci_low: None,
            ci_high: None,
        }),
        ThetaRefSpec::Estimate => {
            let n_used = 64;
            let report = estimate_theta(
                params,
                &BoundarySpec::Free,
                &[n_used],
                config.replicas,
                config.schedule(),
                config.seed ^ 0x7468_6574,
            )?;
            let est = &report.estimates[0];
            Ok(ThetaProvenance {
                source: "estimate".to_string(),
                value: est.point,
                n_used: Some(n_used),
                trials: Some(est.trials),
                ci_low: Some(est.ci_low),
                ci_high: Some(est.ci_high),
            })
        }
    }
}

/// Two-point connection estimates at increasing distances inside one box,
/// all distances read off the same replica.
pub fn decay_scan(
    graph: &BoxGraph,
    pi: &BoundaryPartition,
    params: Parameters,
    distances: &[u32],
    replicas: u64,
    schedule: Schedule,
    seed: u64,
) -> Result<(Vec<FitPoint>, DecayFit)> {
    if replicas == 0 {
        return Err(Error::ZeroReplicas);
    }
    let anchor = graph
        .vertex_index(Point::new(0, 0))
        .ok_or_else(|| Error::Config("decay box must contain the origin".into()))?;
    let targets: Vec<u32> = distances
        .iter()
        .map(|&d| {
            graph
                .vertex_index(Point::new(d as i64, 0))
                .ok_or_else(|| Error::Config(format!("distance {d} leaves the box")))
        })
        .collect::<Result<_>>()?;
    let counts = run_replicas(replicas, |i| {
        let mut chain = Chain::new(graph, pi, params, seed ^ i);
        chain.run(schedule);
        let lab = label_clusters(graph, chain.bits());
        let a = lab.cluster_of[anchor as usize];
        let mut hits = vec![false; targets.len()];
        for (j, &t) in targets.iter().enumerate() {
            hits[j] = lab.cluster_of[t as usize] == a;
        }
        hits
    });
    let mut successes = vec![0u64; targets.len()];
    for hits in counts {
        for (j, h) in hits.into_iter().enumerate() {
            successes[j] += h as u64;
        }
    }
    let points: Vec<FitPoint> = distances
        .iter()
        .zip(successes.iter())
        .map(|(&d, &s)| FitPoint::from_counts(d as f64, s, replicas))
        .collect();
    let fit = fit_decay(points.clone());
    Ok((points, fit))
}

/// The event menu of the scan experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    U,
    Rg,
    Og,
    V,
    Z,
    K,
    BoundaryVolumeExcess,
}

#[derive(Clone, Copy, Debug)]
pub struct EventSpec {
    pub kind: EventKind,
    /// Evaluate the complement (the rare failure) instead of the event.
    pub complement: bool,
}

impl EventSpec {
    pub fn parse(name: &str) -> Result<EventSpec> {
        let (kind, complement) = match name {
            "U" => (EventKind::U, false),
            "Uc" => (EventKind::U, true),
            "Rg" => (EventKind::Rg, false),
            "Rgc" => (EventKind::Rg, true),
            "Og" => (EventKind::Og, false),
            "Ogc" => (EventKind::Og, true),
            "V" => (EventKind::V, false),
            "Vc" => (EventKind::V, true),
            "Z" => (EventKind::Z, false),
            "Zc" => (EventKind::Z, true),
            "K" => (EventKind::K, false),
            "Kc" => (EventKind::K, true),
            "boundary-volume-excess" => (EventKind::BoundaryVolumeExcess, false),
            other => {
                return Err(Error::Config(format!(
                    "unknown event `{other}`; expected one of U, Uc, Rg, Rgc, Og, Ogc, V, Vc, Z, Zc, K, Kc, boundary-volume-excess"
                )))
            }
        };
        Ok(EventSpec { kind, complement })
    }

    pub fn needs_theta(self) -> bool {
        matches!(
            self.kind,
            EventKind::V | EventKind::K | EventKind::BoundaryVolumeExcess
        )
    }
}

/// Everything an event needs at one box size, prepared before sampling.
struct EventContext {
    spec: EventSpec,
    g_value: f64,
    theta: f64,
    epsilon: f64,
    delta: f64,
    l_value: f64,
    partition: Option<crate::renorm::BlockPartition>,
}

impl EventContext {
    fn evaluate(&self, graph: &BoxGraph, bits: &[bool]) -> bool {
        let holds = match self.spec.kind {
            EventKind::U => event_u(&label_clusters(graph, bits)).holds,
            EventKind::Rg => event_rg(&label_clusters(graph, bits), self.g_value).holds,
            EventKind::Og => {
                let lab = label_clusters(graph, bits);
                event_og(graph, bits, &lab, self.g_value).holds
            }
            EventKind::V => event_v(&label_clusters(graph, bits), self.delta, self.theta).holds,
            EventKind::K => {
                event_k(
                    &label_clusters(graph, bits),
                    self.epsilon,
                    self.l_value,
                    self.theta,
                )
                .holds
            }
            EventKind::Z => {
                let partition = self.partition.as_ref().expect("Z prepared a partition");
                let realization = compute_x(partition, graph, bits);
                event_z(partition, &realization, self.delta).holds
            }
            EventKind::BoundaryVolumeExcess => {
                let lab = label_clusters(graph, bits);
                let total = boundary_cluster_volume(&lab) as f64;
                total > (self.theta + self.delta) * graph.num_vertices() as f64
            }
        };
        holds != self.spec.complement
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EventScanReport {
    pub event: String,
    pub theta: Option<ThetaProvenance>,
    pub fit: RateFit,
    pub winner: Option<String>,
}

/// Estimate the event probability across the n grid and fit both
/// log-models.
pub fn event_scan(config: &ExperimentConfig) -> Result<(Vec<CsvRow>, EventScanReport)> {
    let params = config.params()?;
    let spec = EventSpec::parse(config.require_event()?)?;
    let n_list = config.require_n_list()?.to_vec();
    let theta = if spec.needs_theta() {
        Some(resolve_theta(config, params)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in &n_list {
        let graph = BoxGraph::new(LatticeBox::symmetric(n)?);
        let pi = build_boundary(&graph, &config.boundary)?;
        let ctx = prepare_event_context(config, spec, n, theta.as_ref())?;
        let label = format!("B({n})");
        let report = estimate_event(
            &graph,
            &pi,
            params,
            config.replicas,
            config.schedule(),
            config.seed ^ u64::from(n),
            RunLabels {
                boundary: &config.boundary.label(),
                box_label: &label,
            },
            |g, bits| ctx.evaluate(g, bits),
        )?;
        rows.push(report_row(
            "event",
            config,
            Some(n),
            ctx.partition.as_ref().map(|p| p.n_block),
            config.event.as_deref().unwrap_or("?"),
            &report,
        ));
        points.push(FitPoint::from_counts(
            n as f64,
            report.successes,
            report.trials,
        ));
    }
    let fit = fit_rate(points);
    let winner = fit.winner.map(|w| match w {
        RateModel::LinearInN => "linear-in-n".to_string(),
        RateModel::QuadraticInN => "quadratic-in-n".to_string(),
    });
    Ok((
        rows,
        EventScanReport {
            event: config.event.clone().unwrap_or_default(),
            theta,
            fit,
            winner,
        },
    ))
}

fn prepare_event_context(
    config: &ExperimentConfig,
    spec: EventSpec,
    n: u32,
    theta: Option<&ThetaProvenance>,
) -> Result<EventContext> {
    let theta_value = theta.map(|t| t.value).unwrap_or(0.0);
    let mut ctx = EventContext {
        spec,
        g_value: config.g_of(n),
        theta: theta_value,
        epsilon: config.epsilon.unwrap_or(0.0),
        delta: config.delta.unwrap_or(0.0),
        l_value: 0.0,
        partition: None,
    };
    match spec.kind {
        EventKind::V | EventKind::BoundaryVolumeExcess => {
            ctx.delta = config.require_delta()?;
        }
        EventKind::K => {
            ctx.epsilon = config.require_epsilon()?;
            // L = 2N; when N is absent it is derived from sqrt(N) >= 32/eps
            let n_block = match config.n_block {
                Some(v) => v,
                None => {
                    let derived = (32.0 / ctx.epsilon).powi(2).ceil() as i64;
                    derived.max(crate::renorm::MIN_BLOCK_SCALE)
                }
            };
            ctx.l_value = 2.0 * n_block as f64;
        }
        EventKind::Z => {
            ctx.delta = config.require_delta()?;
            let n_block = config.require_n_block()?;
            ctx.partition = Some(build_partition(LatticeBox::symmetric(n)?, n_block)?);
        }
        EventKind::U | EventKind::Rg | EventKind::Og => {}
    }
    Ok(ctx)
}

fn report_row(
    experiment: &str,
    config: &ExperimentConfig,
    n: Option<u32>,
    n_block: Option<i64>,
    event: &str,
    report: &EstimateReport,
) -> CsvRow {
    CsvRow {
        experiment: experiment.to_string(),
        p: config.p,
        q: config.q,
        boundary: config.boundary.label(),
        n,
        n_block,
        event: event.to_string(),
        trials: report.trials,
        successes: report.successes,
        estimate: report.point,
        ci_low: report.ci_low,
        ci_high: report.ci_high,
        // rows echo the run seed; per-size stream derivation is internal
        seed: config.seed,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundPoint {
    pub n: u32,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub floor: f64,
    pub resolvable: bool,
    pub exact: Option<f64>,
    /// None when the point is unresolvable.
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub points: Vec<LowerBoundPoint>,
    pub all_resolvable_hold: bool,
}

/// Check the crossing-failure floor (1-p)^n against sampled estimates of
/// P[no unique crossing cluster].
pub fn lower_bound_check(config: &ExperimentConfig) -> Result<(Vec<CsvRow>, LowerBoundReport)> {
    let params = config.params()?;
    let n_list = config.require_n_list()?.to_vec();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &n in &n_list {
        let graph = BoxGraph::new(LatticeBox::symmetric(n)?);
        let pi = build_boundary(&graph, &config.boundary)?;
        let floor = (1.0 - params.p).powi(n as i32);
        let no_crossing = |g: &BoxGraph, bits: &[bool]| !event_u(&label_clusters(g, bits)).holds;
        // tiny boxes are enumerated exactly
        if graph.num_edges() <= ENUMERATION_CAP && params.p > 0.0 && params.p < 1.0 {
            let exact =
                exact_event_probability(&graph, &pi, params, |bits| no_crossing(&graph, bits))?;
            rows.push(CsvRow {
                experiment: "lower-bound".to_string(),
                p: config.p,
                q: config.q,
                boundary: config.boundary.label(),
                n: Some(n),
                n_block: None,
                event: "Uc-exact".to_string(),
                trials: 0,
                successes: 0,
                estimate: exact,
                ci_low: exact,
                ci_high: exact,
                seed: config.seed,
            });
            let resolvable = exact > 0.0 && exact < 1.0;
            points.push(LowerBoundPoint {
                n,
                estimate: Some(exact),
                stderr: Some(0.0),
                floor,
                resolvable,
                exact: Some(exact),
                holds: resolvable.then_some(exact >= floor),
            });
            continue;
        }
        let label = format!("B({n})");
        let report = estimate_event(
            &graph,
            &pi,
            params,
            config.replicas,
            config.schedule(),
            config.seed ^ u64::from(n),
            RunLabels {
                boundary: &config.boundary.label(),
                box_label: &label,
            },
            no_crossing,
        )?;
        rows.push(report_row(
            "lower-bound",
            config,
            Some(n),
            None,
            "Uc",
            &report,
        ));
        let resolvable = report.resolvable();
        points.push(LowerBoundPoint {
            n,
            estimate: Some(report.point),
            stderr: Some(report.stderr()),
            floor,
            resolvable,
            exact: None,
            holds: resolvable.then_some(report.point >= floor - 2.0 * report.stderr()),
        });
    }
    let all_resolvable_hold = points
        .iter()
        .filter(|p| p.resolvable)
        .all(|p| p.holds == Some(true));
    Ok((
        rows,
        LowerBoundReport {
            points,
            all_resolvable_hold,
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityVerifyReport {
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub cases: Vec<(String, f64, f64, f64)>,
}

/// Built-in duality grid: every box shape with both sides >= 2 and at most
/// 12 primal edges, against the acceptance parameter grid.
pub fn duality_verify_grid() -> Result<(Vec<CsvRow>, DualityVerifyReport)> {
    let shapes: [(u32, u32); 6] = [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2), (3, 3)];
    let ps = [0.3, 0.5, 0.8];
    let qs = [1.0, 1.7, 2.0, 4.0];
    let mut rows = Vec::new();
    let mut cases = Vec::new();
    let mut max_discrepancy = 0.0f64;
    for &(sx, sy) in &shapes {
        for &p in &ps {
            for &q in &qs {
                let bbox = LatticeBox::from_radii(sx as f64, sy as f64)?;
                let params = Parameters::new(p, q)?;
                let diff = verify_duality_identity(bbox, params, ENUMERATION_CAP)?;
                max_discrepancy = max_discrepancy.max(diff);
                cases.push((format!("{sx}x{sy}"), p, q, diff));
                rows.push(CsvRow {
                    experiment: "duality-verify".to_string(),
                    p,
                    q,
                    boundary: "free|wired-dual".to_string(),
                    n: Some(sx.max(sy)),
                    n_block: None,
                    event: format!("atom-discrepancy-{sx}x{sy}"),
                    trials: 0,
                    successes: 0,
                    estimate: diff,
                    ci_low: diff,
                    ci_high: diff,
                    seed: 0,
                });
            }
        }
    }
    let tolerance = 1e-10;
    Ok((
        rows.clone(),
        DualityVerifyReport {
            max_discrepancy,
            tolerance,
            pass: max_discrepancy < tolerance,
            cases,
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeabilityReport {
    pub n_block: i64,
    pub box_side: i64,
    pub interior_blocks: usize,
    pub replicas: u64,
    pub max_abs_correlation: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Close every edge leaving an interior block and test that the per-block
/// large-cluster volumes look independent across blocks.
pub fn y_exchangeability(
    params: Parameters,
    n_block: i64,
    replicas: u64,
    schedule: Schedule,
    seed: u64,
) -> Result<ExchangeabilityReport> {
    let side = 5 * n_block;
    let lambda = LatticeBox::symmetric(side as u32)?;
    let partition = build_partition(lambda, n_block)?;
    let big = BoxGraph::new(lambda);
    let pi = BoundaryPartition::free(&big);
    let interior = partition.interior_indices();
    // all edges with exactly one endpoint inside an interior block
    let mut forced_closed = Vec::new();
    for e in 0..big.num_edges() as u32 {
        let (a, b) = big.edge_points(e).endpoints();
        for &idx in &interior {
            let block = partition.blocks[idx as usize];
            if block.contains(a) != block.contains(b) {
                forced_closed.push(e);
                break;
            }
        }
    }
    let samples = run_replicas(replicas, |i| {
        let mut chain = Chain::new(&big, &pi, params, seed ^ i);
        chain
            .force_edges(&forced_closed, &[])
            .expect("no contradictions");
        chain.run(schedule);
        interior
            .iter()
            .map(|&idx| y_statistic(&partition, &big, chain.bits(), idx) as f64)
            .collect::<Vec<f64>>()
    });
    let mut max_abs = 0.0f64;
    for a in 0..interior.len() {
        for b in a + 1..interior.len() {
            let xa: Vec<f64> = samples.iter().map(|s| s[a]).collect();
            let xb: Vec<f64> = samples.iter().map(|s| s[b]).collect();
            if let Some(c) = correlation(&xa, &xb) {
                max_abs = max_abs.max(c.abs());
            }
        }
    }
    let threshold = 4.0 / (replicas as f64).sqrt();
    Ok(ExchangeabilityReport {
        n_block,
        box_side: side,
        interior_blocks: interior.len(),
        replicas,
        max_abs_correlation: max_abs,
        threshold,
        pass: max_abs < threshold,
    })
}

/// Run one experiment and assemble its rows and JSON summary.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig) -> Result<RunOutput> {
    if let Some(name) = &config.experiment {
        if name != kind.name() {
            return Err(Error::Config(format!(
                "config says experiment `{name}` but the `{}` subcommand was invoked",
                kind.name()
            )));
        }
    }
    let mut verdicts: BTreeMap<String, String> = BTreeMap::new();
    let (rows, extra) = match kind {
        ExperimentKind::Theta => {
            let params = config.params()?;
            let report = estimate_theta(
                params,
                &config.boundary,
                config.require_n_list()?,
                config.replicas,
                config.schedule(),
                config.seed,
            )?;
            let rows: Vec<CsvRow> = report
                .estimates
                .iter()
                .zip(report.n_list.iter())
                .map(|(est, &n)| report_row("theta", config, Some(n), None, "0<->boundary", est))
                .collect();
            verdicts.insert(
                "monotone_within_ci".into(),
                report.monotone_within_ci.to_string(),
            );
            if let Some(overlap) = report.top_two_cis_overlap {
                verdicts.insert("top_two_cis_overlap".into(), overlap.to_string());
            }
            (rows, serde_json::to_value(&report)?)
        }
        ExperimentKind::Decay => {
            let params = config.params()?;
            let dual = dual_parameter(params);
            let n = *config
                .require_n_list()?
                .first()
                .expect("require_n_list is nonempty");
            let graph = BoxGraph::new(LatticeBox::symmetric(n)?);
            let pi = BoundaryPartition::wired(&graph);
            let max_d = (n / 2).saturating_sub(1).min(10).max(1);
            let distances: Vec<u32> = (1..=max_d).collect();
            let (points, fit) = decay_scan(
                &graph,
                &pi,
                dual,
                &distances,
                config.replicas,
                config.schedule(),
                config.seed,
            )?;
            let rows: Vec<CsvRow> = points
                .iter()
                .map(|pt| CsvRow {
                    experiment: "decay".to_string(),
                    p: dual.p,
                    q: dual.q,
                    boundary: "wired".to_string(),
                    n: Some(n),
                    n_block: None,
                    event: format!("connect_d{}", pt.n as u32),
                    trials: pt.trials,
                    successes: pt.successes,
                    estimate: pt.estimate,
                    ci_low: pt.ci_low,
                    ci_high: pt.ci_high,
                    seed: config.seed,
                })
                .collect();
            verdicts.insert("decay_confirmed".into(), fit.decay_confirmed.to_string());
            verdicts.insert("status".into(), fit.status.clone());
            let summary = serde_json::json!({
                "primal_p": params.p,
                "dual_p": dual.p,
                "q": params.q,
                "box": n,
                "fit": fit,
            });
            (rows, summary)
        }
        ExperimentKind::Event => {
            let (rows, report) = event_scan(config)?;
            verdicts.insert("status".into(), report.fit.status.clone());
            if let Some(w) = &report.winner {
                verdicts.insert("winner".into(), w.clone());
            }
            (rows, serde_json::to_value(&report)?)
        }
        ExperimentKind::LowerBound => {
            let (rows, report) = lower_bound_check(config)?;
            verdicts.insert(
                "all_resolvable_hold".into(),
                report.all_resolvable_hold.to_string(),
            );
            (rows, serde_json::to_value(&report)?)
        }
        ExperimentKind::DualityVerify => {
            let (rows, report) = duality_verify_grid()?;
            verdicts.insert("max_discrepancy".into(), report.max_discrepancy.to_string());
            verdicts.insert("pass".into(), report.pass.to_string());
            (rows, serde_json::to_value(&report)?)
        }
        ExperimentKind::Renorm => {
            let params = config.params()?;
            let n_grid: Vec<i64> = config.require_n_list()?.iter().map(|&n| n as i64).collect();
            let wired = config.boundary == BoundarySpec::Wired;
            let report = domination_probe(
                params,
                wired,
                &n_grid,
                config.replicas,
                config.schedule(),
                config.seed,
            )?;
            let rows: Vec<CsvRow> = report
                .points
                .iter()
                .map(|pt| CsvRow {
                    experiment: "renorm".to_string(),
                    p: config.p,
                    q: config.q,
                    boundary: config.boundary.label(),
                    n: Some(pt.box_side as u32),
                    n_block: Some(pt.n_block),
                    event: "X0=0".to_string(),
                    trials: pt.report.trials,
                    successes: pt.report.successes,
                    estimate: pt.report.point,
                    ci_low: pt.report.ci_low,
                    ci_high: pt.report.ci_high,
                    seed: pt.report.seed,
                })
                .collect();
            let strictly_decreasing = report
                .points
                .windows(2)
                .all(|w| w[1].report.point < w[0].report.point);
            verdicts.insert(
                "strictly_decreasing".into(),
                strictly_decreasing.to_string(),
            );
            if let Some(fit) = &report.fit {
                verdicts.insert("slope".into(), fit.slope.to_string());
                verdicts.insert("r_squared".into(), fit.r_squared.to_string());
            }
            // i.i.d. probe for the per-block large-cluster volumes
            let exch = y_exchangeability(
                params,
                n_grid[0],
                config.replicas.min(2_000),
                config.schedule(),
                config.seed ^ 0x5944,
            )?;
            verdicts.insert("y_iid_pass".into(), exch.pass.to_string());
            let summary = serde_json::json!({
                "domination": report,
                "y_exchangeability": exch,
            });
            (rows, summary)
        }
        ExperimentKind::Sample | ExperimentKind::Exact => {
            let params = config.params()?;
            let spec = EventSpec::parse(config.require_event()?)?;
            let theta = if spec.needs_theta() {
                Some(resolve_theta(config, params)?)
            } else {
                None
            };
            let mut rows = Vec::new();
            for &n in config.require_n_list()? {
                let graph = BoxGraph::new(LatticeBox::symmetric(n)?);
                let pi = build_boundary(&graph, &config.boundary)?;
                let ctx = prepare_event_context(config, spec, n, theta.as_ref())?;
                if kind == ExperimentKind::Exact {
                    if graph.num_edges() > ENUMERATION_CAP {
                        return Err(Error::EnumerationCap {
                            edges: graph.num_edges(),
                            cap: ENUMERATION_CAP,
                        });
                    }
                    let exact = exact_event_probability(&graph, &pi, params, |bits| {
                        ctx.evaluate(&graph, bits)
                    })?;
                    rows.push(CsvRow {
                        experiment: "exact".to_string(),
                        p: config.p,
                        q: config.q,
                        boundary: config.boundary.label(),
                        n: Some(n),
                        n_block: None,
                        event: config.event.clone().unwrap_or_default(),
                        trials: 0,
                        successes: 0,
                        estimate: exact,
                        ci_low: exact,
                        ci_high: exact,
                        seed: config.seed,
                    });
                } else {
                    let label = format!("B({n})");
                    let report = estimate_event(
                        &graph,
                        &pi,
                        params,
                        config.replicas,
                        config.schedule(),
                        config.seed ^ u64::from(n),
                        RunLabels {
                            boundary: &config.boundary.label(),
                            box_label: &label,
                        },
                        |g, bits| ctx.evaluate(g, bits),
                    )?;
                    rows.push(report_row(
                        "sample",
                        config,
                        Some(n),
                        None,
                        config.event.as_deref().unwrap_or("?"),
                        &report,
                    ));
                }
            }
            let summary = serde_json::json!({ "theta": theta });
            (rows, summary)
        }
    };
    let summary = serde_json::json!({
        "experiment": kind.name(),
        "config": config.raw,
        "verdicts": verdicts,
        "report": extra,
    });
    Ok(RunOutput { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(extra: &str) -> ExperimentConfig {
        let text = format!("p = 0.6\nq = 1\nreplicas = 2000\nseed = 7\n{extra}");
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn theta_extremes() {
        // p = 1 connects everything; p = 0 nothing beyond the origin
        let report = estimate_theta(
            Parameters::new(1.0, 1.0).unwrap(),
            &BoundarySpec::Free,
            &[4, 8],
            200,
            Schedule::default(),
            3,
        )
        .unwrap();
        assert!(report.estimates.iter().all(|e| e.point == 1.0));
        let report = estimate_theta(
            Parameters::new(0.0, 1.0).unwrap(),
            &BoundarySpec::Free,
            &[4, 8],
            200,
            Schedule::default(),
            3,
        )
        .unwrap();
        assert!(report.estimates.iter().all(|e| e.point == 0.0));
    }

    #[test]
    fn decay_on_path_boxes_recovers_minus_log_p() {
        // on a 1xk path box connections decay like p^d exactly, so the
        // fitted rate is -log p on the nose; feed the fit the exact values
        let p = 0.02f64;
        let distances = [1u32, 2, 3];
        let trials = 4_000_000u64;
        let points: Vec<FitPoint> = distances
            .iter()
            .map(|&d| {
                let exact = p.powi(d as i32);
                FitPoint::from_counts(d as f64, (exact * trials as f64).round() as u64, trials)
            })
            .collect();
        let fit = fit_decay(points).c.unwrap();
        let expect = -p.ln();
        assert!(
            (fit - expect).abs() / expect < 0.2,
            "fitted c {fit} vs -log p {expect}"
        );
    }

    #[test]
    fn event_spec_parsing() {
        assert!(EventSpec::parse("Uc").unwrap().complement);
        assert!(!EventSpec::parse("U").unwrap().complement);
        assert_eq!(
            EventSpec::parse("boundary-volume-excess").unwrap().kind,
            EventKind::BoundaryVolumeExcess
        );
        assert!(EventSpec::parse("nope").is_err());
        assert!(EventSpec::parse("Kc").unwrap().needs_theta());
        assert!(!EventSpec::parse("Uc").unwrap().needs_theta());
    }

    #[test]
    fn event_scan_trivial_k_floor() {
        // with a huge epsilon the volume window is vacuous and K only needs
        // the crossing cluster; at p = 0.9 the failure is rare
        let config = base_config(
            "experiment = event\nevent = Kc\nepsilon = 2\nn_list = 8\ntheta_ref = 1.0\nN = 24\n",
        );
        let (_rows, report) = event_scan(&config).unwrap();
        let pt = &report.fit.points[0];
        assert!(
            pt.estimate < 0.5,
            "Kc with vacuous window should be rare, got {}",
            pt.estimate
        );
    }

    #[test]
    fn lower_bound_small_p() {
        // when p is tiny the failure probability is essentially 1 and far
        // above the floor
        let config =
            ExperimentConfig::parse("p = 0.05\nq = 1\nreplicas = 500\nn_list = 1,2,4\nseed = 5\n")
                .unwrap();
        let (_rows, report) = lower_bound_check(&config).unwrap();
        assert!(report.all_resolvable_hold);
        // n = 1 is exact: the single vertex always crosses, so Uc never
        // happens and the point is unresolvable
        let n1 = &report.points[0];
        assert_eq!(n1.exact, Some(0.0));
        assert!(!n1.resolvable);
        assert_eq!(n1.holds, None);
    }

    #[test]
    fn duality_grid_passes() {
        let (_rows, report) = duality_verify_grid().unwrap();
        assert!(report.pass, "max discrepancy {}", report.max_discrepancy);
        assert_eq!(report.cases.len(), 6 * 3 * 4);
    }

    #[test]
    fn run_rejects_mismatched_experiment_name() {
        let config = base_config("experiment = theta\nn_list = 4\n");
        let err = run(ExperimentKind::Decay, &config).unwrap_err();
        assert!(err.to_string().contains("theta"));
    }

    #[test]
    fn forced_block_volumes_look_independent() {
        let report = y_exchangeability(
            Parameters::new(0.6, 1.0).unwrap(),
            24,
            400,
            Schedule::default(),
            0x59,
        )
        .unwrap();
        assert_eq!(report.interior_blocks, 9);
        assert!(
            report.pass,
            "max |corr| {} above {}",
            report.max_abs_correlation, report.threshold
        );
    }

    #[test]
    fn exact_event_runs_on_small_box() {
        let config = base_config("event = U\nn_list = 2\n");
        let out = run(ExperimentKind::Exact, &config).unwrap();
        assert_eq!(out.rows.len(), 1);
        // 2x2 crossing probability at p = 0.6, q = 1: (1-(1-p)^2)^2 by the
        // horizontal/vertical pair structure
        let expect = (1.0 - 0.4f64 * 0.4) * (1.0 - 0.4 * 0.4);
        assert!((out.rows[0].estimate - expect).abs() < 1e-12);
    }
}
