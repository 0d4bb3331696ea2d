//! Scenario configuration, snapshot files, the per-snapshot processing
//! chain, the scenario runner and report generation.

mod config;
mod pipeline;
mod report;
mod scenario;
pub mod snapshot;

pub use config::{CalibrationSettings, ImpairmentRanges, PathPoint, RaySpec, ScenarioConfig, TrajectorySpec};
pub use pipeline::Processor;
pub use report::{
    build_report, emit_report, read_ranges, read_records, write_ranges, write_records, write_truth,
    ExperimentReport, ReportFiles, ReportRow, SnapshotRecord, NEAR_RANGE_M, REPORT_COLUMNS,
};
pub use scenario::{process_record, simulate_and_process, Scenario, ScenarioRun};
pub use snapshot::{read_snapshot, write_snapshot};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::Result;

/// Base path of snapshot `index` inside `dir`.
pub fn snapshot_base(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("snap_{index:05}"))
}

/// Snapshot bases in `dir`, in index order.
pub fn list_snapshot_bases(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "hdr"))
        .filter(|p| p.file_stem().is_some_and(|s| s.to_string_lossy().starts_with("snap_")))
        .map(|p| p.with_extension(""))
        .collect();
    out.sort();
    Ok(out)
}

/// Reads and processes snapshot files in parallel, preserving order. A
/// file that cannot be read aborts the batch.
pub fn process_snapshot_files(processor: &Processor, bases: &[PathBuf]) -> Result<Vec<SnapshotRecord>> {
    bases
        .par_iter()
        .map(|b| read_snapshot(b).map(|cap| process_record(processor, &cap)))
        .collect()
}

/// Runs a scenario end to end and assembles its report.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(ScenarioRun, ExperimentReport)> {
    let run = simulate_and_process(config)?;
    let report = build_report(&run.records, &run.ranges, &config.truth()?, config.align_window_s);
    Ok((run, report))
}
