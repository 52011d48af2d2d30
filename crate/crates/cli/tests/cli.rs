use std::path::Path;
use std::process::Command;

use fst_cli::{run_with_config, CommandKind, RunConfig};
use fst_core::analysis::ClockTag;

fn fst(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fst")).args(args).current_dir(cwd).output().unwrap()
}

fn small_synth(dir: &Path) {
    let mut cfg = RunConfig {
        output_dir: dir.join("s"),
        ..RunConfig::default()
    };
    cfg.synth.n_days = 200;
    run_with_config(CommandKind::Synth, &cfg).unwrap();
}

#[test]
fn fst_analysis_without_calibration_names_the_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    small_synth(tmp.path());
    let mut cfg = RunConfig {
        input: Some(tmp.path().join("s/prices.csv")),
        output_dir: tmp.path().join("a"),
        ..RunConfig::default()
    };
    cfg.analysis.clocks = vec![ClockTag::Fst];
    cfg.analysis.fit_ranges_fst = vec![(0.01, 0.3)];
    let err = format!("{:#}", run_with_config(CommandKind::Analyze, &cfg).unwrap_err());
    assert!(err.contains("calibration.json"), "{err}");

    cfg.analysis.clocks = vec![ClockTag::Physical];
    let err = format!("{:#}", run_with_config(CommandKind::Analyze, &cfg).unwrap_err());
    assert!(err.contains("fit range"), "{err}");
}

#[test]
fn strict_mode_fails_on_a_cutoff_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| fst(args, tmp.path());
    let out = run(&["synth", "--days", "400", "--ar", "0.8", "--profile", "flat", "-o", "ar"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lenient = run(&["calibrate", "--input", "ar/prices.csv", "-o", "c1"]);
    assert!(lenient.status.success());
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("cutoff violation"));
    let strict = run(&["calibrate", "--strict", "--input", "ar/prices.csv", "-o", "c2"]);
    assert_eq!(strict.status.code(), Some(2));
    // Files are still written for inspection.
    assert!(tmp.path().join("c2/calibration.json").exists());
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.json"), r#"{"seed": 3, "synth": {"n_days": 50, "amplitude": 10}}"#).unwrap();
    let out = fst(&["--config", "run.json", "synth", "--days", "30", "-o", "s"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("s/manifest.json")).unwrap()).unwrap();
    let c = &manifest["config"];
    assert_eq!(c["seed"], 3);
    assert_eq!(c["synth"]["n_days"], 30);
    assert_eq!(c["synth"]["amplitude"], 10.0);
    // Every default is materialized.
    assert_eq!(c["partition"]["min_interval_minutes"], 20.0);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("30 days"), "{stdout}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), r#"{"synth": {"dayz": 50}}"#).unwrap();
    let out = fst(&["--config", "bad.json", "synth"], tmp.path());
    assert!(!out.status.success());
}

#[test]
fn pairwise_matrix_and_clock_table() {
    let tmp = tempfile::tempdir().unwrap();
    small_synth(tmp.path());
    let input = tmp.path().join("s/prices.csv");
    let cfg = |sub: &str| RunConfig {
        input: Some(input.clone()),
        output_dir: tmp.path().join(sub),
        ..RunConfig::default()
    };
    run_with_config(CommandKind::PairwiseD, &cfg("p")).unwrap();
    let text = std::fs::read_to_string(tmp.path().join("p/table1.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][1], "first 20 min");
    for (i, row) in rows.iter().enumerate().skip(1) {
        assert_eq!(row[i], "0");
    }

    run_with_config(CommandKind::CompareClocks, &cfg("c")).unwrap();
    let text = std::fs::read_to_string(tmp.path().join("c/table3.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "class,fst_dtau,fst_D,q1_dtau,q1_D,q2_dtau,q2_D,q3_dtau,q3_D,fst_optimal");
    assert!(lines.all(|l| l.ends_with(",true")));
}

#[test]
fn ingest_writes_a_cache_that_loads_identically() {
    let tmp = tempfile::tempdir().unwrap();
    small_synth(tmp.path());
    let from_csv = RunConfig {
        input: Some(tmp.path().join("s/prices.csv")),
        output_dir: tmp.path().join("i"),
        ..RunConfig::default()
    };
    run_with_config(CommandKind::Ingest, &from_csv).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("i/ingest_report.json")).unwrap()).unwrap();
    assert_eq!(report["days_retained"], 200);

    let calibrate = |input: &Path, sub: &str| {
        let cfg = RunConfig {
            input: Some(input.to_path_buf()),
            output_dir: tmp.path().join(sub),
            ..RunConfig::default()
        };
        run_with_config(CommandKind::Calibrate, &cfg).unwrap();
        std::fs::read_to_string(tmp.path().join(sub).join("calibration.json")).unwrap()
    };
    assert_eq!(
        calibrate(&tmp.path().join("s/prices.csv"), "c1"),
        calibrate(&tmp.path().join("i/series.cache.csv"), "c2")
    );
}
