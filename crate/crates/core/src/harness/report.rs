use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::aoa::AoAEstimate;
use crate::fusion::{time_align, ErrorCdf, RangeMeasurement, TrajectoryTruth};
use crate::{Error, Result};

/// Fixes closer than this to the station form the near-range subset.
pub const NEAR_RANGE_M: f64 = 40.0;

/// Per-snapshot processing outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub timestamp_s: f64,
    pub estimate: Option<AoAEstimate>,
    /// `ok` or the error kind.
    pub status: String,
    pub detail: String,
}

impl SnapshotRecord {
    pub fn from_result(timestamp_s: f64, result: Result<AoAEstimate>) -> Self {
        match result {
            Ok(e) => Self {
                timestamp_s,
                estimate: Some(e),
                status: "ok".into(),
                detail: String::new(),
            },
            Err(e) => Self {
                timestamp_s,
                estimate: None,
                status: e.kind().into(),
                detail: e.to_string(),
            },
        }
    }
}

/// One report line per snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub timestamp_s: f64,
    pub estimate: Option<AoAEstimate>,
    pub range_m: Option<f64>,
    pub position: Option<(f64, f64)>,
    /// None when the timestamp lies outside the trajectory.
    pub truth: Option<(f64, f64)>,
    pub error_m: Option<f64>,
    /// `ok`, `no-range` or the processing error kind.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub cdf: Option<ErrorCdf>,
    pub near_cdf: Option<ErrorCdf>,
}

/// Pairs every successful estimate with a range, scores fixes against the
/// truth and orders rows by timestamp.
pub fn build_report(
    records: &[SnapshotRecord],
    ranges: &[RangeMeasurement],
    truth: &TrajectoryTruth,
    window_s: f64,
) -> ExperimentReport {
    let mut ranges = ranges.to_vec();
    ranges.sort_by(|a, b| a.timestamp_s.total_cmp(&b.timestamp_s));
    let mut rows: Vec<ReportRow> = records
        .iter()
        .map(|r| {
            let truth_xy = truth.position(r.timestamp_s).ok();
            let mut row = ReportRow {
                timestamp_s: r.timestamp_s,
                estimate: r.estimate.clone(),
                range_m: None,
                position: None,
                truth: truth_xy,
                error_m: None,
                status: r.status.clone(),
            };
            if let Some(est) = &r.estimate {
                match time_align(std::slice::from_ref(est), &ranges, window_s).fixes.first() {
                    Some(fix) => {
                        row.range_m = Some(fix.range_m);
                        row.position = Some((fix.x_m, fix.y_m));
                        row.error_m = truth_xy.map(|(x, y)| (fix.x_m - x).hypot(fix.y_m - y));
                    }
                    None => row.status = "no-range".into(),
                }
            }
            row
        })
        .collect();
    rows.sort_by(|a, b| a.timestamp_s.total_cmp(&b.timestamp_s));
    let errors: Vec<f64> = rows.iter().filter_map(|r| r.error_m).collect();
    let near: Vec<f64> = rows
        .iter()
        .filter(|r| r.truth.is_some_and(|(x, y)| x.hypot(y) < NEAR_RANGE_M))
        .filter_map(|r| r.error_m)
        .collect();
    ExperimentReport {
        rows,
        cdf: ErrorCdf::from_errors(errors).ok(),
        near_cdf: ErrorCdf::from_errors(near).ok(),
    }
}

fn fixed(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.digits$}"),
        _ => String::new(),
    }
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "timestamp_s",
    "channel_order",
    "angle_deg",
    "sinr_db",
    "range_m",
    "x_m",
    "y_m",
    "truth_x_m",
    "truth_y_m",
    "error_m",
    "status",
];

impl ExperimentReport {
    pub fn num_fixes(&self) -> usize {
        self.rows.iter().filter(|r| r.error_m.is_some()).count()
    }

    /// Fixes per snapshot; zero for an empty run.
    pub fn fix_yield(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.num_fixes() as f64 / self.rows.len() as f64
        }
    }

    pub fn csv_text(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            let e = r.estimate.as_ref();
            w.write_record([
                format!("{:.3}", r.timestamp_s),
                e.map_or(String::new(), |e| e.channel_order.to_string()),
                fixed(e.map(|e| e.angle_deg), 4),
                fixed(e.map(|e| e.sinr_db), 2),
                fixed(r.range_m, 3),
                fixed(r.position.map(|p| p.0), 3),
                fixed(r.position.map(|p| p.1), 3),
                fixed(r.truth.map(|p| p.0), 3),
                fixed(r.truth.map(|p| p.1), 3),
                fixed(r.error_m, 3),
                r.status.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn summary_text(&self) -> String {
        let pct = |c: &Option<ErrorCdf>, q: f64| c.as_ref().map_or("n/a".to_string(), |c| format!("{:.3}", c.percentile(q)));
        let mut s = String::new();
        let mut failures: Vec<(&str, usize)> = Vec::new();
        for r in &self.rows {
            if r.status != "ok" {
                match failures.iter_mut().find(|f| f.0 == r.status) {
                    Some(f) => f.1 += 1,
                    None => failures.push((&r.status, 1)),
                }
            }
        }
        failures.sort();
        let estimates = self.rows.iter().filter(|r| r.estimate.is_some()).count();
        let _ = writeln!(s, "snapshots = {}", self.rows.len());
        let _ = writeln!(s, "aoa_estimates = {estimates}");
        let _ = writeln!(s, "fixes = {}", self.num_fixes());
        let _ = writeln!(s, "fix_yield = {:.4}", self.fix_yield());
        let _ = writeln!(s, "p50_error_m = {}", pct(&self.cdf, 50.0));
        let _ = writeln!(s, "p90_error_m = {}", pct(&self.cdf, 90.0));
        let _ = writeln!(s, "p95_error_m = {}", pct(&self.cdf, 95.0));
        let _ = writeln!(s, "near_range_m = {NEAR_RANGE_M:.1}");
        let _ = writeln!(s, "near_fixes = {}", self.near_cdf.as_ref().map_or(0, ErrorCdf::len));
        let _ = writeln!(s, "near_p90_error_m = {}", pct(&self.near_cdf, 90.0));
        for (k, n) in failures {
            let _ = writeln!(s, "status.{k} = {n}");
        }
        s
    }

    /// (error, cumulative probability) pairs.
    pub fn cdf_text(&self) -> String {
        let mut s = String::from("error_m,probability\n");
        if let Some(c) = &self.cdf {
            for (e, p) in c.points() {
                let _ = writeln!(s, "{e:.3},{p:.6}");
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub cdf: PathBuf,
}

/// Writes `report.csv`, `summary.txt` and `cdf.csv` into `dir`.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        csv: dir.join("report.csv"),
        summary: dir.join("summary.txt"),
        cdf: dir.join("cdf.csv"),
    };
    fs::write(&files.csv, report.csv_text())?;
    fs::write(&files.summary, report.summary_text())?;
    fs::write(&files.cdf, report.cdf_text())?;
    Ok(files)
}

fn csv_err(path: &Path, e: impl std::fmt::Display, offset: u64) -> Error {
    Error::Format {
        offset,
        message: format!("{}: {e}", path.display()),
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path)?;
    Ok(csv::Reader::from_reader(file))
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let offset = rec.position().map_or(0, |p| p.byte());
    let raw = rec.get(idx).ok_or_else(|| csv_err(path, format!("missing column `{name}`"), offset))?;
    raw.parse()
        .map_err(|_| csv_err(path, format!("invalid `{name}` value `{raw}`"), offset))
}

fn check_header(path: &Path, r: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let h = r.headers().map_err(|e| csv_err(path, e, 0))?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(csv_err(path, format!("expected columns {}", expected.join(",")), 0));
    }
    Ok(())
}

const RANGE_COLUMNS: [&str; 3] = ["timestamp_s", "range_m", "valid"];

/// Full-precision range log.
pub fn write_ranges(path: &Path, ranges: &[RangeMeasurement]) -> Result<()> {
    let mut s = RANGE_COLUMNS.join(",") + "\n";
    for r in ranges {
        let range = if r.valid { format!("{:?}", r.range_m) } else { String::new() };
        let _ = writeln!(s, "{:?},{range},{}", r.timestamp_s, r.valid);
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_ranges(path: &Path) -> Result<Vec<RangeMeasurement>> {
    let mut r = csv_reader(path)?;
    check_header(path, &mut r, &RANGE_COLUMNS)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, &e, e.position().map_or(0, |p| p.byte())))?;
        let valid: bool = field(path, &rec, 2, "valid")?;
        out.push(RangeMeasurement {
            timestamp_s: field(path, &rec, 0, "timestamp_s")?,
            range_m: if valid { field(path, &rec, 1, "range_m")? } else { f64::NAN },
            valid,
        });
    }
    Ok(out)
}

const RECORD_COLUMNS: [&str; 10] = [
    "timestamp_s",
    "estimator",
    "angle_deg",
    "channel_order",
    "raw_order",
    "sinr_db",
    "low_confidence",
    "candidates_deg",
    "status",
    "detail",
];

/// Full-precision angle log; candidate lists are `;`-separated.
pub fn write_records(path: &Path, records: &[SnapshotRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(RECORD_COLUMNS).map_err(io)?;
    for r in records {
        let row = match &r.estimate {
            Some(e) => [
                format!("{:?}", r.timestamp_s),
                e.estimator.clone(),
                format!("{:?}", e.angle_deg),
                e.channel_order.to_string(),
                e.raw_order.to_string(),
                format!("{:?}", e.sinr_db),
                e.low_confidence.to_string(),
                e.candidates_deg.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(";"),
                r.status.clone(),
                r.detail.clone(),
            ],
            None => [
                format!("{:?}", r.timestamp_s),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                r.status.clone(),
                r.detail.clone(),
            ],
        };
        w.write_record(row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_records`]; 2D delays are not persisted.
pub fn read_records(path: &Path) -> Result<Vec<SnapshotRecord>> {
    let mut r = csv_reader(path)?;
    check_header(path, &mut r, &RECORD_COLUMNS)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, &e, e.position().map_or(0, |p| p.byte())))?;
        let timestamp_s: f64 = field(path, &rec, 0, "timestamp_s")?;
        let status = rec.get(8).unwrap_or_default().to_string();
        let estimate = if status == "ok" {
            let offset = rec.position().map_or(0, |p| p.byte());
            let candidates = rec
                .get(7)
                .unwrap_or_default()
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| csv_err(path, format!("invalid candidate `{s}`"), offset)))
                .collect::<Result<Vec<f64>>>()?;
            Some(AoAEstimate {
                timestamp_s,
                estimator: rec.get(1).unwrap_or_default().to_string(),
                angle_deg: field(path, &rec, 2, "angle_deg")?,
                channel_order: field(path, &rec, 3, "channel_order")?,
                raw_order: field(path, &rec, 4, "raw_order")?,
                candidates_deg: candidates,
                delays_samples: None,
                sinr_db: field(path, &rec, 5, "sinr_db")?,
                low_confidence: field(path, &rec, 6, "low_confidence")?,
            })
        } else {
            None
        };
        out.push(SnapshotRecord {
            timestamp_s,
            estimate,
            status,
            detail: rec.get(9).unwrap_or_default().to_string(),
        });
    }
    Ok(out)
}

/// Truth positions at the given timestamps.
pub fn write_truth(path: &Path, truth: &TrajectoryTruth, times: &[f64]) -> Result<()> {
    let mut s = String::from("timestamp_s,x_m,y_m\n");
    for &t in times {
        let (x, y) = truth.position(t)?;
        let _ = writeln!(s, "{t:.3},{x:.3},{y:.3}");
    }
    fs::write(path, s)?;
    Ok(())
}
