//! Columnar plot data from a series of run reports.
//!
//! Output columns: `T,U,lhs,rhs,ratio,quad_err`, 17 significant digits, one
//! row per report, ascending in `T`.

use std::path::Path;

use crate::report::{fmt_num, Report};
use crate::CliError;

pub const PLOT_HEADER: [&str; 6] = ["T", "U", "lhs", "rhs", "ratio", "quad_err"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub experiment: String,
    pub t: f64,
    pub u: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub quad_err: f64,
}

impl From<&Report> for PlotRow {
    fn from(r: &Report) -> Self {
        PlotRow {
            experiment: r.experiment.clone(),
            t: r.t,
            u: r.u,
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.ratio,
            quad_err: r.quad_err,
        }
    }
}

/// Reads the rows of one report file written by `zll run`, in either format.
pub fn read_rows(path: &Path) -> Result<Vec<PlotRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_rows(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_rows(text: &str) -> Result<Vec<PlotRow>, String> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if trimmed.starts_with('{') {
        let r: Report = serde_json::from_str(text).map_err(|e| e.to_string())?;
        return Ok(vec![PlotRow::from(&r)]);
    }
    if trimmed.starts_with('[') {
        let rs: Vec<Report> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        return Ok(rs.iter().map(PlotRow::from).collect());
    }
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let headers = rd.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("missing column `{name}`"))
    };
    let idx = ["experiment", "T", "U", "lhs", "rhs", "ratio", "quad_err"]
        .map(col)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| -> Result<f64, String> {
            let s = &rec[idx[i]];
            s.parse().map_err(|_| format!("bad number `{s}`"))
        };
        rows.push(PlotRow {
            experiment: rec[idx[0]].to_string(),
            t: num(1)?,
            u: num(2)?,
            lhs: num(3)?,
            rhs: num(4)?,
            ratio: num(5)?,
            quad_err: num(6)?,
        });
    }
    Ok(rows)
}

/// Sorts `rows` by `T` and renders them; rows from different experiments
/// are rejected.
pub fn emit_plot_data(mut rows: Vec<PlotRow>) -> Result<String, CliError> {
    if let Some(first) = rows.first() {
        if let Some(other) = rows.iter().find(|r| r.experiment != first.experiment) {
            return Err(CliError::Input(format!(
                "mixed experiments `{}` and `{}`",
                first.experiment, other.experiment
            )));
        }
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(PLOT_HEADER).map_err(err)?;
    for r in &rows {
        w.write_record([r.t, r.u, r.lhs, r.rhs, r.ratio, r.quad_err].map(fmt_num))
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
}
