//! Deterministic result persistence: one CSV of rows and one JSON summary
//! per run, both byte-identical across reruns of the same config and seed.

use crate::error::Result;
use crate::harness::experiments::{CsvRow, ExperimentKind, RunOutput};
use std::path::{Path, PathBuf};

/// Shortest round-trip decimal for CSV cells (the default float formatting).
fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "experiment",
        "p",
        "q",
        "boundary",
        "n",
        "N",
        "event",
        "trials",
        "successes",
        "estimate",
        "ci_low",
        "ci_high",
        "seed",
    ])?;
    for row in rows {
        writer.write_record([
            row.experiment.clone(),
            fmt(row.p),
            fmt(row.q),
            row.boundary.clone(),
            row.n.map(|v| v.to_string()).unwrap_or_default(),
            row.n_block.map(|v| v.to_string()).unwrap_or_default(),
            row.event.clone(),
            row.trials.to_string(),
            row.successes.to_string(),
            fmt(row.estimate),
            fmt(row.ci_low),
            fmt(row.ci_high),
            row.seed.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Write `<experiment>.csv` and `<experiment>_summary.json` under `out_dir`.
pub fn write_outputs(
    kind: ExperimentKind,
    out_dir: &Path,
    output: &RunOutput,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", kind.name()));
    let json_path = out_dir.join(format!("{}_summary.json", kind.name()));
    write_csv(&csv_path, &output.rows)?;
    let json = serde_json::to_string_pretty(&output.summary)
        .map_err(|e| crate::error::Error::Config(format!("summary serialization: {e}")))?;
    std::fs::write(&json_path, json + "\n")?;
    Ok((csv_path, json_path))
}
