//! Check records and their JSON, CSV and text renderings.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Duration;

use clap::ValueEnum;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// One verified inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The inequality being checked, as a human-readable formula.
    pub anchor: String,
    pub measured: BTreeMap<String, f64>,
    pub bound: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: &str) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.to_string(),
            measured: BTreeMap::new(),
            bound: None,
            pass: false,
            error: None,
        }
    }

    pub fn measure(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.to_string(), value);
        self
    }

    pub fn bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    /// A check whose computation aborted.
    pub fn errored(name: impl Into<String>, anchor: &str, error: impl ToString) -> Self {
        Self {
            error: Some(error.to_string()),
            ..Self::new(name, anchor)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// At least one check aborted with a numeric or domain error.
    Internal,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Internal => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub fn new(experiment: &str, config: ExperimentConfig, checks: Vec<CheckRecord>, wall_time: Duration) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            experiment: experiment.to_string(),
            seed: config.seed,
            config,
            checks,
            pass,
            wall_time,
        }
    }

    pub fn status(&self) -> Status {
        if self.checks.iter().any(|c| c.error.is_some()) {
            Status::Internal
        } else if self.pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Writes `report` in `format`. The output excludes wall time, so identical
/// inputs give identical bytes.
pub fn emit<W: Write>(report: &Report, format: Format, mut out: W) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["name", "anchor", "pass", "bound", "measured", "error"])?;
            for c in &report.checks {
                w.write_record([
                    c.name.clone(),
                    c.anchor.clone(),
                    c.pass.to_string(),
                    c.bound.map(|b| b.to_string()).unwrap_or_default(),
                    flatten(&c.measured),
                    c.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => {
            for c in &report.checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                write!(out, "{verdict} {} [{}] {}", c.name, c.anchor, flatten(&c.measured))?;
                if let Some(b) = c.bound {
                    write!(out, " bound={b}")?;
                }
                if let Some(e) = &c.error {
                    write!(out, " error: {e}")?;
                }
                writeln!(out)?;
            }
            writeln!(
                out,
                "{}: {}/{} checks passed, overall {}",
                report.experiment,
                report.passed(),
                report.checks.len(),
                if report.pass { "PASS" } else { "FAIL" }
            )?;
        }
    }
    Ok(())
}

fn flatten(measured: &BTreeMap<String, f64>) -> String {
    measured.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let checks = vec![
            CheckRecord::new("a", "x ≤ 1").measure("x", 0.5).bound(1.0).pass(true),
            CheckRecord::new("b", "y ≤ 2").measure("y", 3.0).measure("n", 4.0).bound(2.0),
            CheckRecord::errored("c", "z ≥ 0", "did not converge"),
        ];
        Report::new("test", ExperimentConfig::default(), checks, Duration::from_secs(3))
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = Report::new("empty", ExperimentConfig::default(), vec![], Duration::ZERO);
        let mut buf = Vec::new();
        emit(&r, Format::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 0);
        assert_eq!(v["pass"], true);
        assert_eq!(r.status(), Status::Pass);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let r = sample();
        let mut buf = Vec::new();
        emit(&r, Format::Csv, &mut buf).unwrap();
        let rows = csv::Reader::from_reader(buf.as_slice()).records().count();
        assert_eq!(rows, r.checks.len());
    }

    #[test]
    fn overall_status() {
        let r = sample();
        assert!(!r.pass);
        assert_eq!(r.status(), Status::Internal);
        let r = Report::new("t", ExperimentConfig::default(), r.checks[..2].to_vec(), Duration::ZERO);
        assert_eq!(r.status().exit_code(), 1);
    }

    #[test]
    fn wall_time_not_serialized() {
        let mut a = sample();
        let mut b = sample();
        a.wall_time = Duration::from_millis(1);
        b.wall_time = Duration::from_millis(999);
        for f in [Format::Json, Format::Csv, Format::Text] {
            let (mut x, mut y) = (Vec::new(), Vec::new());
            emit(&a, f, &mut x).unwrap();
            emit(&b, f, &mut y).unwrap();
            assert_eq!(x, y);
        }
    }
}
