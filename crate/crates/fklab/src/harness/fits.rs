//! Rate-function and decay fits over Monte Carlo estimates.
//!
//! Points whose Wilson interval touches 0 or 1 carry no usable log
//! information and are excluded from fits; fits over fewer than three
//! usable points are reported as insufficient rather than extrapolated.
//! Surface versus volume scaling is decided by a small-sample-corrected
//! information criterion, which on these short grids reduces to comparing
//! weighted residuals at equal parameter count.

use crate::stats::{aicc, weighted_line_fit};
use serde::Serialize;

/// One estimate along an n-grid (or distance grid).
#[derive(Clone, Debug, Serialize)]
pub struct FitPoint {
    pub n: f64,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// CI excludes both 0 and 1.
    pub usable: bool,
}

impl FitPoint {
    pub fn from_counts(n: f64, successes: u64, trials: u64) -> FitPoint {
        let (ci_low, ci_high) = crate::sampler::wilson_interval(successes, trials);
        FitPoint {
            n,
            trials,
            successes,
            estimate: if trials > 0 {
                successes as f64 / trials as f64
            } else {
                f64::NAN
            },
            ci_low,
            ci_high,
            usable: successes > 0 && successes < trials,
        }
    }

    /// Inverse variance of log(estimate) by the delta method.
    fn log_weight(&self) -> f64 {
        let s = self.successes as f64;
        let t = self.trials as f64;
        s * t / (t - s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RateModel {
    LinearInN,
    QuadraticInN,
}

/// A fitted log-model `log p = intercept - decay_rate * x`, where x is n or
/// n^2; `decay_rate > 0` means the probability decays along the grid.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModelFit {
    pub model: RateModel,
    pub decay_rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub aicc: f64,
    pub rss: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    pub points: Vec<FitPoint>,
    pub usable_points: usize,
    pub linear: Option<ModelFit>,
    pub quadratic: Option<ModelFit>,
    pub winner: Option<RateModel>,
    pub status: String,
}

/// Fit both log-models through the usable points by weighted least squares.
pub fn fit_rate(points: Vec<FitPoint>) -> RateFit {
    let usable: Vec<&FitPoint> = points.iter().filter(|p| p.usable).collect();
    let usable_points = usable.len();
    if usable_points < 3 {
        return RateFit {
            points,
            usable_points,
            linear: None,
            quadratic: None,
            winner: None,
            status: "insufficient".to_string(),
        };
    }
    let ys: Vec<f64> = usable.iter().map(|p| p.estimate.ln()).collect();
    let ws: Vec<f64> = usable.iter().map(|p| p.log_weight()).collect();
    let fit_model = |model: RateModel| -> Option<ModelFit> {
        let xs: Vec<f64> = usable
            .iter()
            .map(|p| match model {
                RateModel::LinearInN => p.n,
                RateModel::QuadraticInN => p.n * p.n,
            })
            .collect();
        weighted_line_fit(&xs, &ys, &ws).map(|f| ModelFit {
            model,
            decay_rate: -f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            aicc: aicc(f.rss, usable_points, 2),
            rss: f.rss,
        })
    };
    let linear = fit_model(RateModel::LinearInN);
    let quadratic = fit_model(RateModel::QuadraticInN);
    let winner = match (&linear, &quadratic) {
        (Some(l), Some(q)) => Some(if l.aicc <= q.aicc {
            RateModel::LinearInN
        } else {
            RateModel::QuadraticInN
        }),
        (Some(_), None) => Some(RateModel::LinearInN),
        (None, Some(_)) => Some(RateModel::QuadraticInN),
        (None, None) => None,
    };
    RateFit {
        points,
        usable_points,
        linear,
        quadratic,
        winner,
        status: "ok".to_string(),
    }
}

/// Exponential-decay fit of connection probabilities against distance:
/// `log P[x <-> y] = log lambda - c |x - y|`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub points: Vec<FitPoint>,
    pub c: Option<f64>,
    pub lambda: Option<f64>,
    pub r_squared: Option<f64>,
    pub decay_confirmed: bool,
    pub status: String,
}

pub fn fit_decay(points: Vec<FitPoint>) -> DecayFit {
    let usable: Vec<&FitPoint> = points.iter().filter(|p| p.usable).collect();
    if usable.len() < 3 {
        return DecayFit {
            points,
            c: None,
            lambda: None,
            r_squared: None,
            decay_confirmed: false,
            status: "unresolvable at this sample size".to_string(),
        };
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.n).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.estimate.ln()).collect();
    let ws: Vec<f64> = usable.iter().map(|p| p.log_weight()).collect();
    match weighted_line_fit(&xs, &ys, &ws) {
        Some(f) => {
            let c = -f.slope;
            DecayFit {
                points,
                c: Some(c),
                lambda: Some(f.intercept.exp()),
                r_squared: Some(f.r_squared),
                decay_confirmed: c > 0.0,
                status: "ok".to_string(),
            }
        }
        None => DecayFit {
            points,
            c: None,
            lambda: None,
            r_squared: None,
            decay_confirmed: false,
            status: "degenerate grid".to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_points<F: Fn(f64) -> f64>(ns: &[f64], prob: F) -> Vec<FitPoint> {
        let trials = 1_000_000u64;
        ns.iter()
            .map(|&n| {
                let p = prob(n).clamp(0.0, 1.0);
                FitPoint::from_counts(n, (p * trials as f64).round() as u64, trials)
            })
            .collect()
    }

    #[test]
    fn linear_decay_wins_and_recovers_rate() {
        let pts = synthetic_points(&[8.0, 12.0, 16.0, 24.0], |n| (-0.25 * n).exp());
        let fit = fit_rate(pts);
        assert_eq!(fit.status, "ok");
        assert_eq!(fit.winner, Some(RateModel::LinearInN));
        let l = fit.linear.unwrap();
        assert!((l.decay_rate - 0.25).abs() < 0.02, "rate {}", l.decay_rate);
        assert!(l.r_squared > 0.99);
    }

    #[test]
    fn quadratic_decay_wins() {
        let pts = synthetic_points(&[6.0, 8.0, 10.0, 12.0], |n| (-0.01 * n * n).exp());
        let fit = fit_rate(pts);
        assert_eq!(fit.winner, Some(RateModel::QuadraticInN));
        let q = fit.quadratic.unwrap();
        assert!((q.decay_rate - 0.01).abs() < 0.002);
    }

    #[test]
    fn unusable_points_are_excluded() {
        let mut pts = synthetic_points(&[8.0, 12.0, 16.0, 24.0], |n| (-0.3 * n).exp());
        pts.push(FitPoint::from_counts(32.0, 0, 1_000_000));
        pts.push(FitPoint::from_counts(4.0, 1_000_000, 1_000_000));
        let fit = fit_rate(pts);
        assert_eq!(fit.usable_points, 4);
        assert_eq!(fit.status, "ok");
    }

    #[test]
    fn too_few_points_is_insufficient() {
        let pts = vec![
            FitPoint::from_counts(8.0, 100, 1000),
            FitPoint::from_counts(12.0, 10, 1000),
            FitPoint::from_counts(16.0, 0, 1000),
        ];
        let fit = fit_rate(pts);
        assert_eq!(fit.status, "insufficient");
        assert!(fit.winner.is_none());
    }

    #[test]
    fn decay_fit_recovers_exponential() {
        let pts = synthetic_points(&[1.0, 2.0, 3.0, 4.0, 5.0], |d| 0.8 * (-0.9 * d).exp());
        let fit = fit_decay(pts);
        assert!(fit.decay_confirmed);
        assert!((fit.c.unwrap() - 0.9).abs() < 0.03);
        assert!((fit.lambda.unwrap() - 0.8).abs() < 0.05);
    }

    #[test]
    fn decay_fit_refuses_saturated_points() {
        let pts = vec![
            FitPoint::from_counts(1.0, 1000, 1000),
            FitPoint::from_counts(2.0, 1000, 1000),
            FitPoint::from_counts(3.0, 0, 1000),
            FitPoint::from_counts(4.0, 0, 1000),
        ];
        let fit = fit_decay(pts);
        assert_eq!(fit.status, "unresolvable at this sample size");
        assert!(!fit.decay_confirmed);
    }
}
