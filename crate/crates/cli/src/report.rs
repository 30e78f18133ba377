//! Cross-run report: per-run outcomes plus an A/B/C comparison table.

use std::collections::BTreeMap;

use rover_health::scenario::{RunSummary, ScenarioConfig, TestCase};
use serde::{Deserialize, Serialize};

use crate::config::config_hash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub name: String,
    /// SHA-256 of the config that produced this run.
    pub config_hash: String,
    pub seed: u64,
    pub summary: RunSummary,
}

impl RunEntry {
    pub fn new(cfg: &ScenarioConfig, summary: RunSummary) -> Self {
        Self {
            name: cfg.name.clone(),
            config_hash: config_hash(cfg),
            seed: cfg.noise.seed,
            summary,
        }
    }
}

/// One test case of one scenario family, flattened for side-by-side reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub case: char,
    pub run: String,
    pub adaptive_detections: usize,
    pub static_detections: usize,
    /// Earliest adaptive latency over all injected faults, s.
    pub adaptive_latency: Option<f64>,
    pub min_health: f64,
    pub health_at_end: f64,
    pub waypoints_plant: usize,
    pub waypoints_observer: usize,
    /// Plant minus observer time at the last waypoint both collected, s.
    pub final_collection_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub runs: Vec<RunEntry>,
    /// Rows keyed by scenario family (`straight`, `serpentine`, ...), each
    /// sorted A, B, C.
    pub comparison: BTreeMap<String, Vec<ComparisonRow>>,
}

fn family_and_case(name: &str) -> Option<(&str, TestCase)> {
    let (family, _) = name.rsplit_once('_')?;
    Some((family, TestCase::from_name(name)?))
}

impl ComparisonRow {
    fn new(case: TestCase, e: &RunEntry) -> Self {
        let s = &e.summary;
        Self {
            case: case.suffix(),
            run: e.name.clone(),
            adaptive_detections: s.adaptive_detections().count(),
            static_detections: s.detections.len() - s.adaptive_detections().count(),
            adaptive_latency: s.latencies.iter().filter_map(|l| l.adaptive).min_by(f64::total_cmp),
            min_health: s.min_health,
            health_at_end: s.health_at_end,
            waypoints_plant: s.plant_waypoints_collected(),
            waypoints_observer: s.observer_waypoints_collected(),
            final_collection_delta: s.collection_deltas.last().copied(),
        }
    }
}

/// Builds the report. Runs whose names do not end in `_A`, `_B` or `_C`
/// appear under `runs` only.
pub fn report(runs: Vec<RunEntry>) -> Report {
    let mut comparison: BTreeMap<String, Vec<ComparisonRow>> = BTreeMap::new();
    for e in &runs {
        if let Some((family, case)) = family_and_case(&e.name) {
            comparison
                .entry(family.to_string())
                .or_default()
                .push(ComparisonRow::new(case, e));
        }
    }
    for rows in comparison.values_mut() {
        rows.sort_by(|a, b| a.case.cmp(&b.case).then_with(|| a.run.cmp(&b.run)));
    }
    Report { runs, comparison }
}
