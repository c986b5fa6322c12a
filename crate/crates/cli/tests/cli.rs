use std::path::Path;
use std::process::{Command, Output};

use openbook_cli::{run_suite, ReportDocument, Suite, SuiteConfig, SCHEMA_VERSION};

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_doc(dir: &Path) -> ReportDocument {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn g1_full_run_passes() {
    let out = verify(&["--suite", "g1_s3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: ReportDocument = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.schema_version, SCHEMA_VERSION);
    assert_eq!(doc.suite, "g1_s3");
    assert!(doc.all_pass() && !doc.reports.is_empty());
}

#[test]
fn absurd_threshold_fails_every_margin_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"suite": "g2_s3", "threshold": 1e9, "samples": 40, "binding_samples": 10, "flow_starts": 2, "monodromy_samples": 3}"#,
    );
    let out_dir = dir.path().join("out");
    let out = verify(&["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = read_doc(&out_dir);
    let with_margin: Vec<_> = doc.reports.iter().filter(|r| r.margin_threshold == Some(1e9)).collect();
    assert!(with_margin.len() >= 5);
    assert!(with_margin.iter().all(|r| !r.pass));
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(verify(&["--suite", "g3_s7"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"suite\": \"g1_s3\",\n  \"sample\": 10\n}");
    let out = verify(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("sample"), "{err}");

    let cfg = write_config(dir.path(), r#"{"suite": "kernel", "threshold": -1.0}"#);
    assert_eq!(verify(&["--config", &cfg]).status.code(), Some(2));
    assert_eq!(verify(&["--suite", "kernel", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(verify(&["--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "x").unwrap();
    let out = verify(&["--suite", "kernel", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(["--suite", "kernel"])
        .env("OPENBOOK_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(["--suite", "subcritical"])
        .env("OPENBOOK_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn json_round_trip_matches_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = verify(&["--suite", "prelag", "--seed", "7", "--samples", "60", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = read_doc(dir.path());
    let cfg = SuiteConfig {
        suite: Suite::Prelag,
        seed: 7,
        samples: 60,
        out: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    assert_eq!(doc.config, cfg);
    let direct = ReportDocument::new(&cfg, run_suite(&cfg));
    assert_eq!(doc.without_timing(), direct.without_timing());
    assert!(doc.reports.iter().all(|r| r.seed == Some(7)));
}

#[test]
fn reruns_are_identical() {
    let cfg = SuiteConfig {
        suite: Suite::DiskHypersurface,
        seed: 11,
        samples: 80,
        binding_samples: 20,
        ..Default::default()
    };
    let a = ReportDocument::new(&cfg, run_suite(&cfg)).without_timing();
    let b = ReportDocument::new(&cfg, run_suite(&cfg)).without_timing();
    assert_eq!(a.to_json(), b.to_json());
    let other = SuiteConfig { seed: 12, ..cfg.clone() };
    assert_ne!(a.reports, ReportDocument::new(&other, run_suite(&other)).without_timing().reports);
}

#[test]
fn csv_sweep_of_the_filling_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"suite": "g2_s3", "samples": 40, "binding_samples": 10, "flow_starts": 2, "monodromy_samples": 3, "eps_grid": [0.0, 0.1], "t_grid": [0.0, 1.0, 10.0], "format": "csv"}"#,
    );
    let out_dir = dir.path().join("csv");
    let out = verify(&["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let summary = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(summary.starts_with("name,anchor,pass,n_samples,min_margin"));
    let sweep = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().contains("filling-polynomial"))
        .expect("filling sweep written");
    let mut rdr = csv::Reader::from_path(sweep).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["check", "eps", "T", "min_margin"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[5][1].parse::<f64>().unwrap(), 0.1);
    assert_eq!(rows[5][2].parse::<f64>().unwrap(), 10.0);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() > 0.0));
}
