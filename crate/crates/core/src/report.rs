//! Verification outcomes.

use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Tabular data attached to a report (parameter sweeps, endpoint comparisons).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Result of one named check over a set of samples.
///
/// `pass` holds iff the margin (when present) exceeds its threshold, the
/// residual (when present) is within tolerance, and no failure was recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// Formula or construction the check certifies.
    pub anchor: String,
    pub n_samples: usize,
    pub min_margin: Option<f64>,
    pub margin_threshold: Option<f64>,
    pub max_residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub sweep: Option<Sweep>,
}

/// Incremental builder for [`CheckReport`].
pub struct ReportBuilder {
    report: CheckReport,
    started: Instant,
}

/// NaN-propagating minimum: a NaN sample poisons the margin.
pub fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

/// NaN-propagating maximum.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

impl CheckReport {
    pub fn builder(name: impl Into<String>, anchor: impl Into<String>) -> ReportBuilder {
        ReportBuilder {
            report: CheckReport {
                name: name.into(),
                anchor: anchor.into(),
                n_samples: 0,
                min_margin: None,
                margin_threshold: None,
                max_residual: None,
                tolerance: None,
                pass: false,
                seed: None,
                wall_time_ms: 0,
                failures: Vec::new(),
                notes: Vec::new(),
                sweep: None,
            },
            started: Instant::now(),
        }
    }

    fn evaluate(&self) -> bool {
        let margin_ok = match (self.min_margin, self.margin_threshold) {
            (Some(m), Some(t)) => m > t,
            (None, Some(_)) => false,
            _ => true,
        };
        let residual_ok = match (self.max_residual, self.tolerance) {
            (Some(r), Some(t)) => r <= t,
            (None, Some(_)) => false,
            _ => true,
        };
        margin_ok && residual_ok && self.failures.is_empty()
    }

    /// Record a failure found after the report was built.
    pub fn with_failure(mut self, msg: impl Into<String>) -> CheckReport {
        self.failures.push(msg.into());
        self.pass = false;
        self
    }

    /// Copy without timing, for determinism comparisons.
    pub fn without_timing(&self) -> CheckReport {
        CheckReport { wall_time_ms: 0, ..self.clone() }
    }

    pub fn summary(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
        format!(
            "{} {}: n={} margin={} (>{}) residual={} (<={}){}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.n_samples,
            fmt(self.min_margin),
            fmt(self.margin_threshold),
            fmt(self.max_residual),
            fmt(self.tolerance),
            if self.failures.is_empty() { String::new() } else { format!(" [{}]", self.failures.join("; ")) }
        )
    }
}

impl ReportBuilder {
    pub fn samples(mut self, n: usize) -> Self {
        self.report.n_samples = n;
        self
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.report.seed = seed;
        self
    }

    pub fn margin(mut self, min: f64, threshold: f64) -> Self {
        self.report.min_margin = Some(min);
        self.report.margin_threshold = Some(threshold);
        self
    }

    pub fn residual(mut self, max: f64, tolerance: f64) -> Self {
        self.report.max_residual = Some(max);
        self.report.tolerance = Some(tolerance);
        self
    }

    pub fn fail(mut self, msg: impl Into<String>) -> Self {
        self.report.failures.push(msg.into());
        self
    }

    pub fn fail_all(mut self, msgs: impl IntoIterator<Item = String>) -> Self {
        self.report.failures.extend(msgs);
        self
    }

    pub fn note(mut self, msg: impl Into<String>) -> Self {
        self.report.notes.push(msg.into());
        self
    }

    pub fn sweep(mut self, sweep: Sweep) -> Self {
        self.report.sweep = Some(sweep);
        self
    }

    pub fn failure_count(&self) -> usize {
        self.report.failures.len()
    }

    pub fn finish(mut self) -> CheckReport {
        self.report.wall_time_ms = self.started.elapsed().as_millis() as u64;
        self.report.pass = self.report.evaluate();
        self.report
    }
}

/// Collect per-sample error messages, keeping the first few verbatim.
#[derive(Debug, Default, Clone)]
pub(crate) struct ErrorLog {
    pub count: usize,
    pub first: Vec<String>,
}

impl ErrorLog {
    pub fn push(&mut self, msg: String) {
        self.count += 1;
        if self.first.len() < 3 {
            self.first.push(msg);
        }
    }

    pub fn merge(mut self, other: ErrorLog) -> ErrorLog {
        self.count += other.count;
        for m in other.first {
            if self.first.len() < 3 {
                self.first.push(m);
            }
        }
        self
    }

    pub fn into_failures(self, label: &str) -> Vec<String> {
        if self.count == 0 {
            return Vec::new();
        }
        let mut out = vec![format!("{label}: {} sample(s) failed", self.count)];
        out.extend(self.first);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        let r = CheckReport::builder("a", "x").margin(0.5, 1e-3).residual(1e-9, 1e-8).finish();
        assert!(r.pass);
        let r = CheckReport::builder("a", "x").margin(0.5, 1e9).finish();
        assert!(!r.pass);
        let r = CheckReport::builder("a", "x").margin(f64::NAN, 0.0).finish();
        assert!(!r.pass);
        let r = CheckReport::builder("a", "x").residual(0.0, 1.0).fail("boom").finish();
        assert!(!r.pass);
    }
}

/// Extremes of a per-sample computation.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    pub min_margin: f64,
    pub max_residual: f64,
    pub errors: ErrorLog,
}

impl Tally {
    fn empty() -> Self {
        Tally { min_margin: f64::INFINITY, max_residual: 0.0, errors: ErrorLog::default() }
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            min_margin: nan_min(self.min_margin, o.min_margin),
            max_residual: nan_max(self.max_residual, o.max_residual),
            errors: self.errors.merge(o.errors),
        }
    }
}

/// Evaluate `f` on every item in parallel; each call yields (margin, residual).
/// Use +∞ / 0 for a component that does not apply.
pub(crate) fn tally<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<(f64, f64), String> + Sync) -> Tally {
    use rayon::prelude::*;
    items
        .par_iter()
        .map(|x| match f(x) {
            Ok((m, r)) => Tally { min_margin: m, max_residual: r, errors: ErrorLog::default() },
            Err(e) => {
                let mut t = Tally::empty();
                t.errors.push(e);
                t
            }
        })
        .reduce(Tally::empty, Tally::merge)
}
