//! On-disk layout of run results.
//!
//! ```text
//! <out>/<run name>/telemetry.csv
//!                  summary.json
//!                  config.json
//!                  path.svg, health.svg, residual_*.svg
//! <out>/report.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rover_health::scenario::{RunOutput, RunSummary, ScenarioConfig};
use serde::Serialize;

use crate::config::{parse_config, write_config};
use crate::error::{CliError, Result};
use crate::plot::{emit_plots, PlotData};
use crate::report::{Report, RunEntry};
use crate::telemetry::export_csv;

pub const TELEMETRY_FILE: &str = "telemetry.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.json";
pub const REPORT_FILE: &str = "report.json";

pub fn write_json<V: Serialize>(value: &V, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes one run's files under `out/<name>/` and returns that directory.
/// An aborted run still gets its partial telemetry.
pub fn write_run(out: &Path, cfg: &ScenarioConfig, run: &RunOutput<f64>, plots: bool) -> Result<PathBuf> {
    let dir = out.join(&cfg.name);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    export_csv(&run.log, &dir.join(TELEMETRY_FILE))?;
    write_json(&run.summary, &dir.join(SUMMARY_FILE))?;
    write_config(cfg, &dir.join(CONFIG_FILE))?;
    if plots {
        emit_plots(&PlotData::from_log(&run.log, &cfg.mission.waypoints), &cfg.name, &dir)?;
    }
    Ok(dir)
}

/// Collects every `<dir>/<run>/` holding both a summary and a config,
/// ordered by directory name.
pub fn load_runs(dir: &Path) -> Result<Vec<RunEntry>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut run_dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SUMMARY_FILE).is_file() && p.join(CONFIG_FILE).is_file())
        .collect();
    run_dirs.sort();
    run_dirs
        .iter()
        .map(|d| {
            let cfg = parse_config(&d.join(CONFIG_FILE))?;
            let path = d.join(SUMMARY_FILE);
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let summary: RunSummary = serde_json::from_str(&text)?;
            Ok(RunEntry::new(&cfg, summary))
        })
        .collect()
}

pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    write_json(report, path)
}
