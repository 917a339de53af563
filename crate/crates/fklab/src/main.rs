//! Command-line front end: each subcommand runs one experiment from a flat
//! `key = value` config file and writes a CSV of rows plus a JSON summary.
//! Invalid configs exit with a machine-readable error record on stderr.

use clap::{Parser, Subcommand};
use fklab::harness::{self, ExperimentConfig, ExperimentKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fklab",
    version,
    about = "finite-box FK percolation laboratory"
)]
struct Cli {
    /// Path to the flat key = value experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for replica fan-out (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact event probability by enumeration on small boxes.
    Exact,
    /// Monte Carlo event probability estimates.
    Sample,
    /// Exhaustive check of the free/wired duality identity on a built-in grid.
    DualityVerify,
    /// Point-to-boundary connection estimates across box sizes.
    Theta,
    /// Two-point decay fit at the dual of the configured point.
    Decay,
    /// Event-probability scan across box sizes with rate-model fits.
    Event,
    /// Block-process domination probe over a grid of block scales.
    Renorm,
    /// Crossing-failure floor check against (1-p)^n.
    LowerBound,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Exact => ExperimentKind::Exact,
            Command::Sample => ExperimentKind::Sample,
            Command::DualityVerify => ExperimentKind::DualityVerify,
            Command::Theta => ExperimentKind::Theta,
            Command::Decay => ExperimentKind::Decay,
            Command::Event => ExperimentKind::Event,
            Command::Renorm => ExperimentKind::Renorm,
            Command::LowerBound => ExperimentKind::LowerBound,
        }
    }
}

fn load_config(cli: &Cli, kind: ExperimentKind) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
            ExperimentConfig::parse(&text)?
        }
        None if kind == ExperimentKind::DualityVerify => {
            // the duality grid is built in; a minimal config suffices
            ExperimentConfig::parse("p = 0.5\nq = 1\n")?
        }
        None => anyhow::bail!("--config is required for `{}`", kind.name()),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.raw.insert("seed".into(), seed.to_string());
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
        config
            .raw
            .insert("out_dir".into(), out.display().to_string());
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads > 1 {
        eprintln!("note: built without the `parallel` feature; --threads ignored");
    }

    let kind = cli.command.kind();
    let result = load_config(&cli, kind).and_then(|config| {
        let output = harness::run(kind, &config)?;
        let (csv_path, json_path) = harness::write_outputs(kind, &config.out_dir, &output)?;
        println!("wrote {}", csv_path.display());
        println!("wrote {}", json_path.display());
        if let Some(verdicts) = output.summary.get("verdicts") {
            println!("verdicts: {verdicts}");
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = serde_json::json!({ "error": err.to_string() });
            eprintln!("{record}");
            ExitCode::from(2)
        }
    }
}
