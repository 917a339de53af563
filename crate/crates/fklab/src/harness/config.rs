//! Flat `key = value` experiment configuration.
//!
//! Unknown keys are errors, as are malformed values and out-of-range
//! numbers; everything is validated before any sampling starts.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundarySpec {
    Free,
    Wired,
    File(PathBuf),
}

impl BoundarySpec {
    pub fn label(&self) -> String {
        match self {
            BoundarySpec::Free => "free".to_string(),
            BoundarySpec::Wired => "wired".to_string(),
            BoundarySpec::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GFamily {
    /// g(n) = coeff * ln n
    Log,
    /// g(n) = coeff * sqrt(n)
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaRefSpec {
    Estimate,
    Fixed(f64),
}

/// Parsed experiment configuration with defaults applied.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub p: f64,
    pub q: f64,
    pub boundary: BoundarySpec,
    pub n_list: Vec<u32>,
    pub n_block: Option<i64>,
    pub g_family: GFamily,
    pub g_coeff: f64,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub theta_ref: ThetaRefSpec,
    pub replicas: u64,
    pub sweeps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub event: Option<String>,
    /// Raw key/value echo for the run summary.
    pub raw: BTreeMap<String, String>,
}

pub const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "p",
    "q",
    "boundary",
    "n_list",
    "N",
    "g_family",
    "g_coeff",
    "epsilon",
    "delta",
    "theta_ref",
    "replicas",
    "sweeps",
    "burn_in",
    "seed",
    "out_dir",
    "event",
];

impl ExperimentConfig {
    /// Parse the flat `key = value` format. Blank lines and lines starting
    /// with `#` are ignored.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut raw = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
            if raw.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: BTreeMap<String, String>) -> Result<ExperimentConfig> {
        let get = |key: &str| raw.get(key).map(|s| s.as_str());
        let parse_f64 = |key: &str| -> Result<Option<f64>> {
            match get(key) {
                None => Ok(None),
                Some(s) => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("key `{key}`: not a number: `{s}`"))),
            }
        };
        let parse_u64 = |key: &str| -> Result<Option<u64>> {
            match get(key) {
                None => Ok(None),
                Some(s) => s
                    .parse::<u64>()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("key `{key}`: not an integer: `{s}`"))),
            }
        };

        let p = parse_f64("p")?.ok_or_else(|| Error::Config("missing required key `p`".into()))?;
        let q = parse_f64("q")?.ok_or_else(|| Error::Config("missing required key `q`".into()))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("key `p`: {p} outside [0, 1]")));
        }
        if !(q >= 1.0) {
            return Err(Error::Config(format!("key `q`: {q} below 1")));
        }

        let boundary = match get("boundary") {
            None | Some("free") => BoundarySpec::Free,
            Some("wired") => BoundarySpec::Wired,
            Some(s) if s.starts_with("file:") => {
                BoundarySpec::File(PathBuf::from(s.trim_start_matches("file:")))
            }
            Some(other) => {
                return Err(Error::Config(format!(
                    "key `boundary`: expected free, wired or file:PATH, got `{other}`"
                )))
            }
        };

        let n_list = match get("n_list") {
            None => Vec::new(),
            Some(s) => {
                let mut out = Vec::new();
                for token in s.split(',') {
                    let token = token.trim();
                    let n: u32 = token
                        .parse()
                        .map_err(|_| Error::Config(format!("key `n_list`: bad entry `{token}`")))?;
                    if n == 0 {
                        return Err(Error::Config("key `n_list`: entries must be >= 1".into()));
                    }
                    out.push(n);
                }
                out
            }
        };

        let n_block = match parse_u64("N")? {
            None => None,
            Some(v) => Some(v as i64),
        };

        let g_family = match get("g_family") {
            None | Some("log") => GFamily::Log,
            Some("sqrt") => GFamily::Sqrt,
            Some(other) => {
                return Err(Error::Config(format!(
                    "key `g_family`: expected log or sqrt, got `{other}`"
                )))
            }
        };
        let g_coeff = parse_f64("g_coeff")?.unwrap_or(4.0);
        if !(g_coeff > 0.0) {
            return Err(Error::Config("key `g_coeff`: must be positive".into()));
        }

        let epsilon = parse_f64("epsilon")?;
        if let Some(e) = epsilon {
            if !(e > 0.0) {
                return Err(Error::Config("key `epsilon`: must be positive".into()));
            }
        }
        let delta = parse_f64("delta")?;
        if let Some(d) = delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::Config("key `delta`: must lie in (0, 1)".into()));
            }
        }

        let theta_ref = match get("theta_ref") {
            None | Some("estimate") => ThetaRefSpec::Estimate,
            Some(s) => {
                let v: f64 = s.parse().map_err(|_| {
                    Error::Config(format!(
                        "key `theta_ref`: expected `estimate` or a number, got `{s}`"
                    ))
                })?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Config(format!(
                        "key `theta_ref`: {v} outside [0, 1]"
                    )));
                }
                ThetaRefSpec::Fixed(v)
            }
        };

        let replicas = parse_u64("replicas")?.unwrap_or(10_000);
        if replicas == 0 {
            return Err(Error::Config("key `replicas`: must be >= 1".into()));
        }
        let sweeps = parse_u64("sweeps")?.unwrap_or(0);
        let burn_in = parse_u64("burn_in")?.unwrap_or(64);
        let seed = parse_u64("seed")?.unwrap_or(0);
        let out_dir = PathBuf::from(get("out_dir").unwrap_or("out"));
        let experiment = get("experiment").map(|s| s.to_string());
        let event = get("event").map(|s| s.to_string());

        Ok(ExperimentConfig {
            experiment,
            p,
            q,
            boundary,
            n_list,
            n_block,
            g_family,
            g_coeff,
            epsilon,
            delta,
            theta_ref,
            replicas,
            sweeps,
            burn_in,
            seed,
            out_dir,
            event,
            raw,
        })
    }

    pub fn params(&self) -> Result<crate::Parameters> {
        crate::Parameters::new(self.p, self.q)
    }

    pub fn schedule(&self) -> crate::sampler::Schedule {
        crate::sampler::Schedule {
            burn_in: self.burn_in,
            sweeps: self.sweeps,
        }
    }

    /// g(n) from the configured family and coefficient.
    pub fn g_of(&self, n: u32) -> f64 {
        match self.g_family {
            GFamily::Log => self.g_coeff * (n as f64).ln(),
            GFamily::Sqrt => self.g_coeff * (n as f64).sqrt(),
        }
    }

    pub fn require_n_list(&self) -> Result<&[u32]> {
        if self.n_list.is_empty() {
            return Err(Error::Config("missing required key `n_list`".into()));
        }
        Ok(&self.n_list)
    }

    pub fn require_event(&self) -> Result<&str> {
        self.event
            .as_deref()
            .ok_or_else(|| Error::Config("missing required key `event`".into()))
    }

    pub fn require_delta(&self) -> Result<f64> {
        self.delta
            .ok_or_else(|| Error::Config("missing required key `delta`".into()))
    }

    pub fn require_epsilon(&self) -> Result<f64> {
        self.epsilon
            .ok_or_else(|| Error::Config("missing required key `epsilon`".into()))
    }

    pub fn require_n_block(&self) -> Result<i64> {
        self.n_block
            .ok_or_else(|| Error::Config("missing required key `N`".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# comment
experiment = event
p = 0.65
q = 1
boundary = wired
n_list = 8, 12, 16
N = 24
g_family = log
g_coeff = 4
epsilon = 0.1
delta = 0.2
theta_ref = estimate
replicas = 1000
sweeps = 5
burn_in = 32
seed = 99
out_dir = /tmp/xyz
event = Uc
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.experiment.as_deref(), Some("event"));
        assert_eq!(cfg.p, 0.65);
        assert_eq!(cfg.boundary, BoundarySpec::Wired);
        assert_eq!(cfg.n_list, vec![8, 12, 16]);
        assert_eq!(cfg.n_block, Some(24));
        assert_eq!(cfg.replicas, 1000);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.event.as_deref(), Some("Uc"));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = ExperimentConfig::parse("p = 0.5\nq = 1\nfrobnicate = 7\n").unwrap_err();
        assert!(err.to_string().contains("frobnicate"));
    }

    #[test]
    fn missing_required_key_names_it() {
        let err = ExperimentConfig::parse("q = 1\n").unwrap_err();
        assert!(err.to_string().contains("`p`"));
    }

    #[test]
    fn range_validation() {
        assert!(ExperimentConfig::parse("p = 1.5\nq = 1\n").is_err());
        assert!(ExperimentConfig::parse("p = 0.5\nq = 0.5\n").is_err());
        assert!(ExperimentConfig::parse("p = 0.5\nq = 1\ndelta = 1.5\n").is_err());
        assert!(ExperimentConfig::parse("p = 0.5\nq = 1\nreplicas = 0\n").is_err());
        assert!(ExperimentConfig::parse("p = 0.5\nq = 1\nn_list = 4,0\n").is_err());
    }

    #[test]
    fn duplicate_key_is_an_error() {
        assert!(ExperimentConfig::parse("p = 0.5\np = 0.6\nq = 1\n").is_err());
    }

    #[test]
    fn defaults_applied() {
        let cfg = ExperimentConfig::parse("p = 0.5\nq = 2\n").unwrap();
        assert_eq!(cfg.boundary, BoundarySpec::Free);
        assert_eq!(cfg.replicas, 10_000);
        assert_eq!(cfg.burn_in, 64);
        assert_eq!(cfg.g_coeff, 4.0);
        assert!(matches!(cfg.theta_ref, ThetaRefSpec::Estimate));
        // g defaults to 4 ln n
        assert!((cfg.g_of(16) - 4.0 * 16f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn theta_ref_fixed() {
        let cfg = ExperimentConfig::parse("p = 0.5\nq = 2\ntheta_ref = 0.73\n").unwrap();
        assert!(matches!(cfg.theta_ref, ThetaRefSpec::Fixed(v) if (v - 0.73).abs() < 1e-12));
    }
}
