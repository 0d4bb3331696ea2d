use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn srspos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srspos")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Ten-second static user with light noise.
fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.toml");
    fs::write(
        &p,
        "seed = 7\nsnr_db = 15.0\nrays = []\n\
         [trajectory]\ndwell_s = 9.5\n[[trajectory.points]]\nlabel = \"P\"\nx_m = 3.0\ny_m = 20.0\n",
    )
    .unwrap();
    p
}

#[test]
fn staged_pipeline_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let staged = dir.path().join("staged");
    let staged_s = staged.to_str().unwrap();
    for stage in ["simulate", "calibrate", "process", "evaluate"] {
        let o = srspos(&[stage, "--config", cfg, "--out", staged_s]);
        assert_eq!(code(&o), 0, "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read_dir(staged.join("snapshots")).unwrap().count(), 20);

    let direct = dir.path().join("direct");
    let o = srspos(&["run", "--config", cfg, "--out", direct.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.csv", "summary.txt", "cdf.csv", "aoa.csv", "ranges.csv", "truth.csv", "calibration.txt"] {
        assert_eq!(fs::read(staged.join(f)).unwrap(), fs::read(direct.join(f)).unwrap(), "{f}");
    }
    let summary = fs::read_to_string(direct.join("summary.txt")).unwrap();
    assert!(summary.contains("snapshots = 10\n"), "{summary}");
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("o");
    let o = srspos(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
        "--estimator",
        "root_music",
        "--snapshot-len",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let saved = fs::read_to_string(out.join("scenario.toml")).unwrap();
    assert!(saved.contains("seed = 99") && saved.contains("snapshot_slots = 1"), "{saved}");
    let aoa = fs::read_to_string(out.join("aoa.csv")).unwrap();
    assert!(aoa.lines().nth(1).unwrap().contains(",root-music,"), "{aoa}");
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&srspos(&["run", "--out", out, "--estimator", "capon"])), 1);
    assert_eq!(code(&srspos(&["run", "--out", out, "--snapshot-len", "0"])), 1);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "cadence_hz = -1.0\n").unwrap();
    assert_eq!(code(&srspos(&["run", "--out", out, "--config", bad.to_str().unwrap()])), 1);
    assert_eq!(code(&srspos(&["run", "--config", "/nonexistent.toml"])), 1);
    assert_eq!(code(&srspos(&["frobnicate"])), 1);
    assert_eq!(code(&srspos(&["--help"])), 0);
}

#[test]
fn processing_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // no splitter capture, calibration table or logs yet
    assert_eq!(code(&srspos(&["calibrate", "--out", out])), 2);
    assert_eq!(code(&srspos(&["process", "--out", out])), 2);
    assert_eq!(code(&srspos(&["evaluate", "--out", out])), 2);
}

#[test]
fn truncated_snapshot_is_processing_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("o");
    let args = |s| vec![s, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(code(&srspos(&args("simulate"))), 0);
    assert_eq!(code(&srspos(&args("calibrate"))), 0);
    let iq = out.join("snapshots/snap_00003.iq");
    let bytes = fs::read(&iq).unwrap();
    fs::write(&iq, &bytes[..bytes.len() - 1]).unwrap();
    let o = srspos(&args("process"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected"));
}
