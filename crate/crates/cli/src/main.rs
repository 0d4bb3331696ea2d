//! `srspos`: simulate, calibrate, process and evaluate positioning runs.
//!
//! Exit codes: 0 success, 1 configuration error, 2 processing error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use srspos::frontend::{offline_calibrate, CalibrationTable};
use srspos::harness::{
    build_report, emit_report, list_snapshot_bases, process_snapshot_files, read_ranges, read_records,
    read_snapshot, run_scenario, snapshot_base, write_ranges, write_records, write_snapshot, write_truth, Scenario,
    ScenarioConfig,
};
use srspos::{Error, Result};

const SCENARIO_FILE: &str = "scenario.toml";
const CALIBRATION_FILE: &str = "calibration.txt";
const SPLITTER_BASE: &str = "splitter";
const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Parser)]
#[command(name = "srspos", version, about = "Single-anchor SRS positioning lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write snapshot files, the splitter capture, ranges and truth.
    Simulate(Common),
    /// Build the offline calibration table from the splitter capture.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Splitter capture base path; defaults to <out>/splitter.
        #[arg(long)]
        capture: Option<PathBuf>,
    },
    /// Estimate angles from snapshot files into aoa.csv.
    Process(Common),
    /// Fuse aoa.csv with ranges.csv and score against the truth.
    Evaluate(Common),
    /// Every stage in memory; writes the logs and the report.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario TOML; defaults to <out>/scenario.toml when present, else built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// One of: esprit, esprit-2d, music, mvdr, root-music.
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Snapshot length in slots.
    #[arg(long)]
    snapshot_len: Option<usize>,
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let saved = self.out.join(SCENARIO_FILE);
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None if saved.exists() => ScenarioConfig::load(&saved)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(e) = &self.estimator {
            cfg.estimator = e.clone();
        }
        if let Some(n) = self.snapshot_len {
            cfg.snapshot_slots = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn io_at(path: &Path) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn simulate(c: &Common) -> Result<()> {
    let cfg = c.scenario()?;
    let scenario = Scenario::new(&cfg)?;
    let snaps = c.out.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snaps).map_err(Error::from).map_err(io_at(&snaps))?;
    fs::write(c.out.join(SCENARIO_FILE), cfg.to_toml_string())?;
    write_snapshot(&scenario.splitter_capture()?, &c.out.join(SPLITTER_BASE))?;
    for i in 0..scenario.snapshot_times().len() {
        write_snapshot(&scenario.simulate_snapshot(i)?, &snapshot_base(&snaps, i))?;
    }
    write_ranges(&c.out.join("ranges.csv"), &scenario.ranges()?)?;
    write_truth(&c.out.join("truth.csv"), scenario.truth(), scenario.snapshot_times())?;
    println!("wrote {} snapshots to {}", scenario.snapshot_times().len(), snaps.display());
    Ok(())
}

fn calibrate(c: &Common, capture: Option<&Path>) -> Result<()> {
    c.scenario()?;
    let base = capture.map_or_else(|| c.out.join(SPLITTER_BASE), Path::to_path_buf);
    let table = offline_calibrate(&read_snapshot(&base).map_err(io_at(&base))?)?;
    fs::create_dir_all(&c.out)?;
    table.save(&c.out.join(CALIBRATION_FILE))?;
    println!(
        "intra-pair offsets: {:.6} rad, {:.6} rad",
        table.intra_pair_offsets_rad[0], table.intra_pair_offsets_rad[1]
    );
    Ok(())
}

fn process(c: &Common) -> Result<()> {
    let cfg = c.scenario()?;
    let path = c.out.join(CALIBRATION_FILE);
    let table = CalibrationTable::load(&path).map_err(io_at(&path))?;
    let processor = Scenario::new(&cfg)?.processor(table)?;
    let snaps = c.out.join(SNAPSHOT_DIR);
    let bases = list_snapshot_bases(&snaps).map_err(io_at(&snaps))?;
    let records = process_snapshot_files(&processor, &bases)?;
    write_records(&c.out.join("aoa.csv"), &records)?;
    let ok = records.iter().filter(|r| r.estimate.is_some()).count();
    println!("{ok}/{} snapshots produced an angle", records.len());
    Ok(())
}

fn evaluate(c: &Common) -> Result<()> {
    let cfg = c.scenario()?;
    let aoa = c.out.join("aoa.csv");
    let ranges = c.out.join("ranges.csv");
    let records = read_records(&aoa).map_err(io_at(&aoa))?;
    let ranges = read_ranges(&ranges).map_err(io_at(&ranges))?;
    let report = build_report(&records, &ranges, &cfg.truth()?, cfg.align_window_s);
    emit_report(&report, &c.out)?;
    print!("{}", report.summary_text());
    Ok(())
}

fn run(c: &Common) -> Result<()> {
    let cfg = c.scenario()?;
    let (run, report) = run_scenario(&cfg)?;
    let scenario = Scenario::new(&cfg)?;
    fs::create_dir_all(&c.out)?;
    fs::write(c.out.join(SCENARIO_FILE), cfg.to_toml_string())?;
    run.calibration.save(&c.out.join(CALIBRATION_FILE))?;
    write_records(&c.out.join("aoa.csv"), &run.records)?;
    write_ranges(&c.out.join("ranges.csv"), &run.ranges)?;
    write_truth(&c.out.join("truth.csv"), scenario.truth(), scenario.snapshot_times())?;
    emit_report(&report, &c.out)?;
    print!("{}", report.summary_text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Calibrate { common, capture } => calibrate(common, capture.as_deref()),
        Command::Process(c) => process(c),
        Command::Evaluate(c) => evaluate(c),
        Command::Run(c) => run(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
