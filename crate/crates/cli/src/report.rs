//! Run reports and their JSON/CSV encodings.
//!
//! JSON: one object per experiment, or an array of them for `all`. Numbers
//! use the shortest representation that parses back to the same double.
//!
//! CSV columns, in this order:
//! `experiment,T,U,lhs,rhs,ratio,quad_err,wall_time,status,failed`
//! with numbers as 17 significant digits and `failed` listing the names of
//! failed checks separated by `;`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use zll_core::LadderMode;

use crate::config::Format;
use crate::CliError;

pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "T",
    "U",
    "lhs",
    "rhs",
    "ratio",
    "quad_err",
    "wall_time",
    "status",
    "failed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pass,
    BandFailure,
    Error,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Pass => "pass",
            RunStatus::BandFailure => "band_failure",
            RunStatus::Error => "error",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Pass => crate::EXIT_OK,
            RunStatus::BandFailure => crate::EXIT_BAND,
            RunStatus::Error => crate::EXIT_ERROR,
        }
    }

    /// The worse of two statuses; errors dominate band failures.
    pub fn worst(self, other: RunStatus) -> RunStatus {
        let rank = |s: RunStatus| match s {
            RunStatus::Pass => 0,
            RunStatus::BandFailure => 1,
            RunStatus::Error => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

/// A value checked against a closed band `[lo, hi]`, or an open lower bound
/// when `strict` is set. A missing bound is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(deserialize_with = "nullable")]
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub strict: bool,
    pub pass: bool,
}

impl Check {
    pub fn band(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            lo: Some(lo),
            hi: Some(hi),
            strict: false,
            pass: value >= lo && value <= hi,
        }
    }

    pub fn at_most(name: &str, value: f64, hi: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            lo: None,
            hi: Some(hi),
            strict: false,
            pass: value <= hi,
        }
    }

    pub fn above(name: &str, value: f64, lo: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            lo: Some(lo),
            hi: None,
            strict: true,
            pass: value > lo,
        }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::band(name, if ok { 1.0 } else { 0.0 }, 1.0, 1.0)
    }
}

/// JSON has no NaN; failed runs serialize their missing numbers as `null`.
fn nullable<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One experiment run. Numbers a failed run could not produce are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub mode: LadderMode,
    pub tol: f64,
    #[serde(deserialize_with = "nullable")]
    pub lhs: f64,
    #[serde(deserialize_with = "nullable")]
    pub rhs: f64,
    #[serde(deserialize_with = "nullable")]
    pub ratio: f64,
    #[serde(deserialize_with = "nullable")]
    pub quad_err: f64,
    pub checks: Vec<Check>,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Experiment-specific record from the core library.
    pub detail: serde_json::Value,
    pub wall_time: f64,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

pub fn to_json(reports: &[Report]) -> Result<String, CliError> {
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])
    } else {
        serde_json::to_string_pretty(reports)
    };
    text.map_err(|e| CliError::Input(e.to_string()))
}

pub fn to_csv(reports: &[Report]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in reports {
        w.write_record([
            r.experiment.clone(),
            fmt_num(r.t),
            fmt_num(r.u),
            fmt_num(r.lhs),
            fmt_num(r.rhs),
            fmt_num(r.ratio),
            fmt_num(r.quad_err),
            fmt_num(r.wall_time),
            r.status.as_str().to_string(),
            r.failed_checks().join(";"),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
}

/// Writes `reports` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial report.
pub fn write_reports(path: &Path, format: Format, reports: &[Report]) -> Result<(), CliError> {
    let text = match format {
        Format::Json => to_json(reports)?,
        Format::Csv => to_csv(reports)?,
    };
    write_atomic(path, text.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(to_io(&dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(to_io(&dir))?;
    tmp.write_all(bytes).map_err(to_io(path))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
