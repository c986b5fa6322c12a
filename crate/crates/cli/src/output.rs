//! JSON and CSV emission of suite results.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use openbook_core::CheckReport;

use crate::config::{Format, SuiteConfig};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to re-run and compare a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub config: SuiteConfig,
    pub passed: usize,
    pub failed: usize,
    pub reports: Vec<CheckReport>,
}

impl ReportDocument {
    pub fn new(cfg: &SuiteConfig, reports: Vec<CheckReport>) -> Self {
        let passed = reports.iter().filter(|r| r.pass).count();
        Self {
            schema_version: SCHEMA_VERSION,
            suite: cfg.suite.name().to_string(),
            seed: cfg.seed,
            config: cfg.clone(),
            passed,
            failed: reports.len() - passed,
            reports,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    /// Copy with every wall time zeroed.
    pub fn without_timing(&self) -> Self {
        Self { reports: self.reports.iter().map(CheckReport::without_timing).collect(), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn io_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Io(path.to_path_buf(), e.to_string())
}

/// File-name-safe version of a check name.
pub fn slug(name: &str) -> String {
    let s: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect();
    s.trim_matches('_').to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// One summary row per check.
pub fn summary_csv(reports: &[CheckReport]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(PathBuf::from("<csv>"), e.to_string());
    w.write_record([
        "name",
        "anchor",
        "pass",
        "n_samples",
        "min_margin",
        "margin_threshold",
        "max_residual",
        "tolerance",
        "seed",
        "wall_time_ms",
        "failures",
        "notes",
    ])
    .map_err(err)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.anchor.clone(),
            r.pass.to_string(),
            r.n_samples.to_string(),
            opt(r.min_margin),
            opt(r.margin_threshold),
            opt(r.max_residual),
            opt(r.tolerance),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.wall_time_ms.to_string(),
            r.failures.join(" | "),
            r.notes.join(" | "),
        ])
        .map_err(err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(PathBuf::from("<csv>"), e.to_string()))?)
        .map_err(|e| CliError::Io(PathBuf::from("<csv>"), e.to_string()))
}

/// Rows of a report's sweep, prefixed with the check name.
pub fn sweep_csv(report: &CheckReport) -> Option<Result<String, CliError>> {
    let sweep = report.sweep.as_ref()?;
    let err = |e: csv::Error| CliError::Io(PathBuf::from("<csv>"), e.to_string());
    let run = || -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["check".to_string()];
        header.extend(sweep.columns.iter().cloned());
        w.write_record(&header).map_err(err)?;
        for row in &sweep.rows {
            let mut rec = vec![report.name.clone()];
            rec.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(PathBuf::from("<csv>"), e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(PathBuf::from("<csv>"), e.to_string()))
    };
    Some(run())
}

/// Write the document into `dir`: `report.json`, or `report.csv` plus one
/// `sweep_<check>.csv` per report carrying a sweep. Returns the files written.
pub fn emit_report(doc: &ReportDocument, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let path = dir.join("report.json");
            std::fs::write(&path, doc.to_json()).map_err(|e| io_err(&path, e))?;
            written.push(path);
        }
        Format::Csv => {
            let path = dir.join("report.csv");
            std::fs::write(&path, summary_csv(&doc.reports)?).map_err(|e| io_err(&path, e))?;
            written.push(path);
            for (i, r) in doc.reports.iter().enumerate() {
                if let Some(text) = sweep_csv(r) {
                    let path = dir.join(format!("sweep_{i:02}_{}.csv", slug(&r.name)));
                    std::fs::write(&path, text?).map_err(|e| io_err(&path, e))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}
