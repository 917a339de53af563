//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `-- --nocapture`, or on failure).
//!
//! Criteria 6 and 10 are implemented exactly as stated and are expected to
//! fail: measured FK quantities at these parameters make them unattainable
//! at desk scale. Their failure messages carry the measured evidence; the
//! remaining nine criteria pass. See the README section on the acceptance
//! suite.

use fklab::clusters::{boundary_cluster_volume, event_og, event_rg, event_u, label_clusters};
use fklab::duality::verify_duality_identity;
use fklab::fk_core::{
    cluster_count, exact_distribution, single_edge_conditional, BoundaryPartition, Parameters,
    ENUMERATION_CAP,
};
use fklab::geometry::LatticeBox;
use fklab::graph::BoxGraph;
use fklab::harness::config::BoundarySpec;
use fklab::harness::experiments::{estimate_theta, lower_bound_check};
use fklab::harness::fits::{fit_rate, FitPoint, RateModel};
use fklab::harness::ExperimentConfig;
use fklab::renorm::{build_partition, compute_x, domination_probe};
use fklab::sampler::{occupation_tv_vs_exact, run_replicas, Chain, Schedule};
use fklab::Error;

fn criterion(num: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {num:02} {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {num:02} ({name}) failed: {detail}");
}

/// Criterion 1: the duality identity holds atom-by-atom to 1e-10 on every
/// box with at most 12 primal edges (both sides >= 2; thinner boxes have no
/// dual edge bijection) over the parameter grid.
#[test]
fn c01_duality_identity() {
    let start = std::time::Instant::now();
    let shapes: [(u32, u32); 6] = [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2), (3, 3)];
    let mut max_diff = 0.0f64;
    let mut worst = String::new();
    for &(sx, sy) in &shapes {
        for &p in &[0.3, 0.5, 0.8] {
            for &q in &[1.0, 1.7, 2.0, 4.0] {
                let bbox = LatticeBox::from_radii(sx as f64, sy as f64).unwrap();
                let diff =
                    verify_duality_identity(bbox, Parameters::new(p, q).unwrap(), ENUMERATION_CAP)
                        .unwrap();
                if diff > max_diff {
                    max_diff = diff;
                    worst = format!("{sx}x{sy} at ({p},{q})");
                }
            }
        }
    }
    let elapsed = start.elapsed();
    criterion(
        1,
        "duality identity",
        max_diff < 1e-10 && elapsed.as_secs() < 60,
        &format!("max atom discrepancy {max_diff:.3e} ({worst}) over 72 cases in {elapsed:?}"),
    );
}

/// Criterion 2: both branches of the single-edge conditional match exact
/// enumeration on single-edge and 2x2 instances to 1e-12.
#[test]
fn c02_finite_energy_conditionals() {
    let mut max_err = 0.0f64;
    let mut wired_branch_seen = false;
    let mut split_branch_seen = false;

    // single-edge box: the conditional is the marginal
    let g1 = BoxGraph::new(LatticeBox::from_radii(2.0, 1.0).unwrap());
    for (p, q) in [(0.6, 3.0), (0.3, 1.5), (0.8, 4.0)] {
        let params = Parameters::new(p, q).unwrap();
        for wired in [false, true] {
            let pi = if wired {
                BoundaryPartition::wired(&g1)
            } else {
                BoundaryPartition::free(&g1)
            };
            let dist = exact_distribution(&g1, &pi, params).unwrap();
            let enumerated = dist.atom_probability(1);
            let bits = vec![false; 1];
            let conditional = single_edge_conditional(&g1, &bits, 0, &pi, params);
            let closed_form = if wired { p } else { p / (p + q * (1.0 - p)) };
            max_err = max_err
                .max((conditional - enumerated).abs())
                .max((conditional - closed_form).abs());
        }
    }

    // 2x2 box: every edge against every configuration of the others
    let g = BoxGraph::new(LatticeBox::symmetric(2).unwrap());
    let params = Parameters::new(0.6, 2.0).unwrap();
    let boundary = g.boundary_vertices().to_vec();
    let custom = BoundaryPartition::from_index_classes(
        &g,
        vec![boundary[..2].to_vec(), boundary[2..].to_vec()],
    )
    .unwrap();
    for pi in [
        BoundaryPartition::free(&g),
        BoundaryPartition::wired(&g),
        custom,
    ] {
        let dist = exact_distribution(&g, &pi, params).unwrap();
        for e in 0..g.num_edges() as u32 {
            for rest in 0..1u32 << (g.num_edges() - 1) {
                // weave `rest` around position e
                let mut bits = vec![false; g.num_edges()];
                let mut j = 0;
                for i in 0..g.num_edges() {
                    if i as u32 != e {
                        bits[i] = rest >> j & 1 == 1;
                        j += 1;
                    }
                }
                let mask_of = |edge_state: bool| -> u32 {
                    let mut m = 0u32;
                    for (i, &b) in bits.iter().enumerate() {
                        let state = if i as u32 == e { edge_state } else { b };
                        if state {
                            m |= 1 << i;
                        }
                    }
                    m
                };
                let p1 = dist.atom_probability(mask_of(true));
                let p0 = dist.atom_probability(mask_of(false));
                let enumerated = p1 / (p0 + p1);
                let conditional = single_edge_conditional(&g, &bits, e, &pi, params);
                if (conditional - params.p).abs() < 1e-15 {
                    wired_branch_seen = true;
                } else {
                    split_branch_seen = true;
                }
                max_err = max_err.max((conditional - enumerated).abs());
            }
        }
    }
    criterion(
        2,
        "finite-energy conditionals",
        max_err < 1e-12 && wired_branch_seen && split_branch_seen,
        &format!("max |conditional - enumeration| = {max_err:.3e}, both branches exercised"),
    );
}

/// Criterion 3: occupation-measure TV distance to the exact law on the 3x3
/// box stays below 0.02 across the parameter grid, free and wired, reading
/// the chain after each edge update over 1e6 sweeps.
#[test]
fn c03_sampler_tv_gate() {
    let g = BoxGraph::new(LatticeBox::symmetric(3).unwrap());
    let mut max_tv = 0.0f64;
    let mut worst = String::new();
    for &p in &[0.3, 0.5, 0.8] {
        for &q in &[1.0, 1.7, 2.0, 4.0] {
            for wired in [false, true] {
                let pi = if wired {
                    BoundaryPartition::wired(&g)
                } else {
                    BoundaryPartition::free(&g)
                };
                let params = Parameters::new(p, q).unwrap();
                let tv = occupation_tv_vs_exact(
                    &g,
                    &pi,
                    params,
                    1_000_000,
                    0xac3_0000
                        ^ (p * 100.0) as u64
                        ^ ((q * 10.0) as u64) << 8
                        ^ (wired as u64) << 20,
                )
                .unwrap();
                if tv > max_tv {
                    max_tv = tv;
                    worst = format!("(p={p}, q={q}, wired={wired})");
                }
            }
        }
    }
    criterion(
        3,
        "sampler TV gate",
        max_tv < 0.02,
        &format!("max TV {max_tv:.4} at {worst} over 24 chains of 1e6 sweeps"),
    );
}

/// Criterion 4: at q = 1 the sampled per-edge marginals sit within four
/// standard errors of p on 1e5 samples.
#[test]
fn c04_q1_factorization() {
    let g = BoxGraph::new(LatticeBox::symmetric(4).unwrap());
    let pi = BoundaryPartition::free(&g);
    let p = 0.6;
    let params = Parameters::new(p, 1.0).unwrap();
    let samples = 100_000u64;
    let per_replica = run_replicas(samples, |i| {
        let mut chain = Chain::new(&g, &pi, params, 0xac4_0000 ^ i);
        chain.run(Schedule::default());
        chain.bits().to_vec()
    });
    let mut counts = vec![0u64; g.num_edges()];
    for bits in per_replica {
        for (e, b) in bits.into_iter().enumerate() {
            counts[e] += b as u64;
        }
    }
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    let max_z = counts
        .iter()
        .map(|&c| (c as f64 / samples as f64 - p).abs() / se)
        .fold(0.0f64, f64::max);
    criterion(
        4,
        "q=1 factorization",
        max_z < 4.0,
        &format!(
            "max |marginal - p| = {max_z:.2} standard errors over {} edges",
            g.num_edges()
        ),
    );
}

/// Criterion 5: the crossing-failure probability at (p, q) = (0.65, 1)
/// decays at surface order: the linear-in-n log-model beats quadratic by
/// information criterion with positive rate and R^2 >= 0.9.
#[test]
fn c05_surface_order_crossing_failure() {
    let params = Parameters::new(0.65, 1.0).unwrap();
    let grid: [(u32, u64); 5] = [
        (8, 200_000),
        (12, 200_000),
        (16, 200_000),
        (24, 500_000),
        (32, 1_000_000),
    ];
    let mut points = Vec::new();
    for &(n, replicas) in &grid {
        let g = BoxGraph::new(LatticeBox::symmetric(n).unwrap());
        let pi = BoundaryPartition::free(&g);
        let fails = run_replicas(replicas, |i| {
            let mut chain = Chain::new(&g, &pi, params, 0xac5_0000 ^ u64::from(n) << 32 ^ i);
            chain.run(Schedule::default());
            !event_u(&label_clusters(&g, chain.bits())).holds
        })
        .into_iter()
        .filter(|b| *b)
        .count() as u64;
        points.push(FitPoint::from_counts(n as f64, fails, replicas));
    }
    let fit = fit_rate(points);
    let linear = fit.linear.expect("enough usable points");
    let pass = fit.winner == Some(RateModel::LinearInN)
        && linear.decay_rate > 0.0
        && linear.r_squared >= 0.9;
    let q_aicc = fit.quadratic.map(|q| q.aicc).unwrap_or(f64::NAN);
    criterion(
        5,
        "surface-order decay of U(n)^c",
        pass,
        &format!(
            "winner {:?}, rate {:.3}, R^2 {:.4}, AICc linear {:.1} vs quadratic {:.1}",
            fit.winner, linear.decay_rate, linear.r_squared, linear.aicc, q_aicc
        ),
    );
}

/// Criterion 6 (faithful to the stated parameters; see the README
/// acceptance notes): boundary-volume excess at q=1, p=0.7, delta=0.15
/// over n in {6,8,10,12} should exhibit volume-order decay with the
/// quadratic model winning. With theta_ref estimated from the model itself
/// (~0.989 at p=0.7), the threshold (theta+0.15) n^2 exceeds the box
/// volume, the event is impossible, every point is below resolution and no
/// fit exists, so the criterion cannot pass as stated.
#[test]
fn c06_volume_order_boundary_excess() {
    let params = Parameters::new(0.7, 1.0).unwrap();
    // resolve theta the way every event scan does: estimate at B(64)
    let theta_report = estimate_theta(
        params,
        &BoundarySpec::Free,
        &[64],
        100_000,
        Schedule::default(),
        0xac6_7468,
    )
    .unwrap();
    let theta = theta_report.estimates[0].point;
    let delta = 0.15;
    let replicas = 100_000u64;
    let mut points = Vec::new();
    for &n in &[6u32, 8, 10, 12] {
        let g = BoxGraph::new(LatticeBox::symmetric(n).unwrap());
        let pi = BoundaryPartition::free(&g);
        let threshold = (theta + delta) * g.num_vertices() as f64;
        let hits = run_replicas(replicas, |i| {
            let mut chain = Chain::new(&g, &pi, params, 0xac6_0000 ^ u64::from(n) << 32 ^ i);
            chain.run(Schedule::default());
            let lab = label_clusters(&g, chain.bits());
            boundary_cluster_volume(&lab) as f64 > threshold
        })
        .into_iter()
        .filter(|b| *b)
        .count() as u64;
        points.push(FitPoint::from_counts(n as f64, hits, replicas));
    }
    let successes: Vec<u64> = points.iter().map(|p| p.successes).collect();
    let fit = fit_rate(points);
    let pass = fit.status == "ok" && fit.winner == Some(RateModel::QuadraticInN);
    criterion(
        6,
        "volume-order decay of boundary-volume excess",
        pass,
        &format!(
            "theta_ref estimated {theta:.4} at n=64 makes the threshold (theta+0.15) n^2 = \
             {:.3} n^2 exceed the box volume; successes {successes:?} out of {replicas} per point; \
             fit status `{}`, winner {:?} — unattainable as stated, see the README acceptance notes",
            theta + delta,
            fit.status,
            fit.winner
        ),
    );
}

/// Criterion 7: the sampled crossing-failure probability dominates the
/// (1-p)^n floor at p = 0.55 for every resolvable n <= 12.
#[test]
fn c07_lower_bound_floor() {
    let config = ExperimentConfig::parse(
        "experiment = lower-bound\np = 0.55\nq = 1\nn_list = 1,2,3,4,6,8,10,12\nreplicas = 200000\nseed = 3051\n",
    )
    .unwrap();
    let (_rows, report) = lower_bound_check(&config).unwrap();
    let resolvable: Vec<String> = report
        .points
        .iter()
        .map(|pt| {
            format!(
                "n={}: {} vs floor {:.2e}{}",
                pt.n,
                pt.estimate
                    .map(|e| format!("{e:.4}"))
                    .unwrap_or_else(|| "-".into()),
                pt.floor,
                if pt.resolvable { "" } else { " (unresolvable)" }
            )
        })
        .collect();
    criterion(
        7,
        "crossing-failure lower bound",
        report.all_resolvable_hold,
        &format!(
            "P[U^c] >= (1-p)^n - 2se at every resolvable point: {}",
            resolvable.join("; ")
        ),
    );
}

/// Criterion 8: theta estimates at n in {16,32,64}, q=1, p=0.8 agree within
/// joint 95% intervals at the two largest sizes.
#[test]
fn c08_theta_convergence() {
    let report = estimate_theta(
        Parameters::new(0.8, 1.0).unwrap(),
        &BoundarySpec::Free,
        &[16, 32, 64],
        100_000,
        Schedule::default(),
        0xac8_0000,
    )
    .unwrap();
    let overlap = report.top_two_cis_overlap == Some(true);
    let summary: Vec<String> = report
        .estimates
        .iter()
        .zip(report.n_list.iter())
        .map(|(e, n)| format!("n={n}: {:.5} [{:.5}, {:.5}]", e.point, e.ci_low, e.ci_high))
        .collect();
    criterion(
        8,
        "theta estimate convergence",
        overlap,
        &format!("top two sizes overlap: {}", summary.join("; ")),
    );
}

/// Criterion 9: renormalization geometry invariants hold exhaustively for
/// every valid (box, N) pair in {B(96), B(128), B(192)} x {24, 32, 48};
/// pairs violating the N-large precondition must fail loudly.
#[test]
fn c09_renormalization_geometry() {
    let mut checked = 0usize;
    let mut rejected = 0usize;
    let mut locality_checks = 0usize;
    let mut rng_state = 0xac9_1234u64;
    let mut rand_bit = move || {
        rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
        rng_state >> 43 & 1 == 1
    };
    for &side in &[96u32, 128, 192] {
        for &n in &[24i64, 32, 48] {
            let lambda = LatticeBox::symmetric(side).unwrap();
            if (side as i64) < 3 * n {
                match build_partition(lambda, n) {
                    Err(Error::NotNLarge(..)) => {
                        rejected += 1;
                        continue;
                    }
                    other => panic!("expected NotNLarge for B({side})/N={n}, got {other:?}"),
                }
            }
            let partition = build_partition(lambda, n).unwrap();
            // disjoint cover and side bounds
            let mut covered = 0u64;
            for b in &partition.blocks {
                for axis in [fklab::geometry::Axis::X, fklab::geometry::Axis::Y] {
                    let s = b.side(axis);
                    assert!(s >= n && s <= 2 * n, "B({side})/N={n}: side {s}");
                }
                covered += b.num_vertices();
            }
            assert_eq!(covered, lambda.num_vertices(), "blocks must tile the box");
            // connector containment is verified during the build; spot-check
            for c in &partition.connectors {
                let (va, vb) = partition.index_graph.edge_endpoints(c.index_edge);
                for p in c.dbox.vertices() {
                    assert!(
                        partition.blocks[va as usize].contains(p)
                            || partition.blocks[vb as usize].contains(p)
                    );
                }
            }
            // X locality on sampled configurations for a few interior indices
            let big = BoxGraph::new(lambda);
            let interior = partition.interior_indices();
            for &idx in interior.iter().take(3) {
                let window = partition.window_e(idx);
                let inside: Vec<bool> = (0..big.num_edges() as u32)
                    .map(|e| {
                        let (a, b) = big.edge_points(e).endpoints();
                        window.contains(&a) && window.contains(&b)
                    })
                    .collect();
                for _ in 0..12 {
                    let bits: Vec<bool> = (0..big.num_edges()).map(|_| rand_bit()).collect();
                    let x1 = compute_x(&partition, &big, &bits).x[idx as usize];
                    let mut scrambled = bits;
                    for e in 0..big.num_edges() {
                        if !inside[e] {
                            scrambled[e] = rand_bit();
                        }
                    }
                    let x2 = compute_x(&partition, &big, &scrambled).x[idx as usize];
                    assert_eq!(x1, x2, "X leaked outside its window at B({side})/N={n}");
                    locality_checks += 1;
                }
            }
            checked += 1;
        }
    }
    criterion(
        9,
        "renormalization geometry",
        checked == 7 && rejected == 2,
        &format!(
            "{checked} valid (box, N) pairs verified (tiling, side bounds, connector containment), \
             {rejected} non-N-large pairs rejected loudly, {locality_checks} X-locality recomputations"
        ),
    );
}

/// Criterion 10 (faithful to the stated parameters; see the README
/// acceptance notes): P[X_0 = 0] at p = 0.75, q = 1 should decrease
/// strictly over N in {24, 32, 48} with a negative log-slope against
/// sqrt(N). At these scales sqrt(N)/10 < 1, so the block event forbids
/// every stray open edge and its failure probability grows with the block
/// area: the measured trend is strictly increasing and the criterion
/// cannot pass as stated.
#[test]
fn c10_domination_trend() {
    let report = domination_probe(
        Parameters::new(0.75, 1.0).unwrap(),
        false,
        &[24, 32, 48],
        10_000,
        Schedule::default(),
        0xac10_0000,
    )
    .unwrap();
    let estimates: Vec<String> = report
        .points
        .iter()
        .map(|pt| format!("N={}: {:.4}", pt.n_block, pt.report.point))
        .collect();
    let strictly_decreasing = report
        .points
        .windows(2)
        .all(|w| w[1].report.point < w[0].report.point);
    let (slope, r2) = report
        .fit
        .map(|f| (f.slope, f.r_squared))
        .unwrap_or((f64::NAN, f64::NAN));
    let pass = strictly_decreasing && slope < 0.0 && r2 >= 0.8;
    criterion(
        10,
        "block-process domination trend",
        pass,
        &format!(
            "P[X0=0]: {}; log-fit slope {slope:.3} vs sqrt(N) (R^2 {r2:.3}); sqrt(N)/10 < 1 \
             at these N, so any stray open edge breaks the block event and the failure rate \
             grows with block area — unattainable as stated, see the README acceptance notes",
            estimates.join(", ")
        ),
    );
}

/// Criterion 11: structural invariants hold across exhaustive small-box
/// enumeration and sampled ensembles: at most one crossing cluster, the
/// O^g within R^g within U nesting, exact volume accounting, and cluster
/// counts monotone in the partition order.
#[test]
fn c11_structural_invariants() {
    let mut configs_checked = 0u64;

    // exhaustive enumeration on 3x3 and 2x4
    for bbox in [
        LatticeBox::symmetric(3).unwrap(),
        LatticeBox::from_radii(2.0, 4.0).unwrap(),
    ] {
        let g = BoxGraph::new(bbox);
        let free = BoundaryPartition::free(&g);
        let wired = BoundaryPartition::wired(&g);
        for mask in 0..1u64 << g.num_edges() {
            let bits: Vec<bool> = (0..g.num_edges()).map(|e| mask >> e & 1 == 1).collect();
            let lab = label_clusters(&g, &bits);
            assert!(lab.full_crossing_clusters().len() <= 1);
            assert_eq!(lab.total_volume(), g.num_vertices() as u64);
            let u = event_u(&lab).holds;
            let r = event_rg(&lab, 2.0).holds;
            let o = event_og(&g, &bits, &lab, 2.0).holds;
            assert!(!o || r, "Og must imply Rg");
            assert!(!r || u, "Rg must imply U");
            assert!(cluster_count(&g, &bits, &wired) <= cluster_count(&g, &bits, &free));
            configs_checked += 1;
        }
    }

    // sampled ensembles at scale, q = 1 and q > 1
    for (p, q, n, replicas) in [
        (0.45, 1.0, 12u32, 3000u64),
        (0.65, 1.0, 16, 3000),
        (0.55, 1.7, 8, 400),
    ] {
        let g = BoxGraph::new(LatticeBox::symmetric(n).unwrap());
        let pi = BoundaryPartition::free(&g);
        let params = Parameters::new(p, q).unwrap();
        let ok = run_replicas(replicas, |i| {
            let mut chain = Chain::new(&g, &pi, params, 0xac11_0000 ^ u64::from(n) << 24 ^ i);
            chain.run(Schedule::default());
            let lab = label_clusters(&g, chain.bits());
            let crossing_ok = lab.full_crossing_clusters().len() <= 1;
            let volume_ok = lab.total_volume() == g.num_vertices() as u64;
            let u = event_u(&lab).holds;
            let r = event_rg(&lab, 3.0).holds;
            let o = event_og(&g, chain.bits(), &lab, 3.0).holds;
            crossing_ok && volume_ok && (!o || r) && (!r || u)
        });
        assert!(
            ok.iter().all(|b| *b),
            "invariant violated at (p={p}, q={q}, n={n})"
        );
        configs_checked += replicas;
    }

    // cluster-count monotonicity along coarsening chains on random states
    let g = BoxGraph::new(LatticeBox::symmetric(4).unwrap());
    let boundary = g.boundary_vertices().to_vec();
    let mut rng_state = 77u64;
    for _ in 0..300 {
        let bits: Vec<bool> = (0..g.num_edges())
            .map(|_| {
                rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
                rng_state >> 39 & 1 == 1
            })
            .collect();
        let split = 2 + (rng_state % (boundary.len() as u64 - 2)) as usize;
        let custom = BoundaryPartition::from_index_classes(
            &g,
            vec![boundary[..split].to_vec(), boundary[split..].to_vec()],
        )
        .unwrap();
        let free = BoundaryPartition::free(&g);
        let wired = BoundaryPartition::wired(&g);
        let cf = cluster_count(&g, &bits, &free);
        let cc = cluster_count(&g, &bits, &custom);
        let cw = cluster_count(&g, &bits, &wired);
        assert!(cw <= cc && cc <= cf, "cl monotonicity violated");
        configs_checked += 1;
    }

    criterion(
        11,
        "structural invariants",
        true,
        &format!(
            "{configs_checked} configurations checked (exhaustive small boxes + sampled ensembles)"
        ),
    );
}

/// Companion to criterion 6, outside the acceptance gate: the
/// surface-vs-volume discrimination machinery does resolve volume-order
/// scaling for the same event once the threshold is feasible (a fixed
/// theta_ref placing (theta+delta) inside (typical fraction, 1)).
#[test]
fn volume_order_machinery_demonstration() {
    let params = Parameters::new(0.7, 1.0).unwrap();
    let theta = 0.845;
    let delta = 0.15;
    let replicas = 50_000u64;
    let mut points = Vec::new();
    for &n in &[6u32, 8, 10, 12] {
        let g = BoxGraph::new(LatticeBox::symmetric(n).unwrap());
        let pi = BoundaryPartition::free(&g);
        let threshold = (theta + delta) * g.num_vertices() as f64;
        let hits = run_replicas(replicas, |i| {
            let mut chain = Chain::new(&g, &pi, params, 0xdead_0000 ^ u64::from(n) << 32 ^ i);
            chain.run(Schedule::default());
            let lab = label_clusters(&g, chain.bits());
            boundary_cluster_volume(&lab) as f64 > threshold
        })
        .into_iter()
        .filter(|b| *b)
        .count() as u64;
        points.push(FitPoint::from_counts(n as f64, hits, replicas));
    }
    let fit = fit_rate(points);
    assert_eq!(fit.status, "ok");
    assert_eq!(
        fit.winner,
        Some(RateModel::QuadraticInN),
        "volume-order scaling should win at a feasible threshold"
    );
    println!(
        "volume-order demonstration: quadratic wins with rate {:.4}, R^2 {:.4}",
        fit.quadratic.unwrap().decay_rate,
        fit.quadratic.unwrap().r_squared
    );
}

/// Companion probe: the uniqueness part of the crossing event is monotone
/// in p within overlapping confidence intervals (existence is increasing).
#[test]
fn crossing_existence_monotone_in_p() {
    let g = BoxGraph::new(LatticeBox::symmetric(6).unwrap());
    let pi = BoundaryPartition::free(&g);
    let mut last: Option<(f64, f64)> = None;
    for &p in &[0.4, 0.5, 0.6, 0.7] {
        let params = Parameters::new(p, 1.5).unwrap();
        let hits = run_replicas(20_000, |i| {
            let mut chain = Chain::new(&g, &pi, params, 0x6d6f_6e6f ^ i);
            chain.run(Schedule::default());
            let lab = label_clusters(&g, chain.bits());
            !lab.full_crossing_clusters().is_empty()
        })
        .into_iter()
        .filter(|b| *b)
        .count() as u64;
        let (lo, hi) = fklab::sampler::wilson_interval(hits, 20_000);
        if let Some((_, prev_hi)) = last {
            assert!(
                hi >= prev_hi || lo <= prev_hi,
                "crossing probability dropped beyond CI overlap at p={p}"
            );
        }
        last = Some((lo, hi));
    }
}
