//! Experiment configuration from flags or a `key=value` file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use zll_core::correlation::{FOURTH_EXPONENT, SIXTH_EXPONENT};
use zll_core::LadderMode;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Zcheck,
    Ladder,
    Transform,
    SecondMoment,
    FourthMoment,
    Correlation6,
    Correlation4,
    Predict,
    Geometry,
    All,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Zcheck => "zcheck",
            Experiment::Ladder => "ladder",
            Experiment::Transform => "transform",
            Experiment::SecondMoment => "second_moment",
            Experiment::FourthMoment => "fourth_moment",
            Experiment::Correlation6 => "correlation6",
            Experiment::Correlation4 => "correlation4",
            Experiment::Predict => "predict",
            Experiment::Geometry => "geometry",
            Experiment::All => "all",
        }
    }

    /// Window exponent used when none is configured.
    pub fn default_u_exponent(&self) -> f64 {
        match self {
            Experiment::Correlation4 | Experiment::Geometry => FOURTH_EXPONENT,
            Experiment::Transform => 0.75,
            _ => SIXTH_EXPONENT,
        }
    }

    /// Whether `U = T^{u_exponent + 2ε}` (otherwise `U = T^{u_exponent}`).
    pub fn uses_epsilon(&self) -> bool {
        !matches!(
            self,
            Experiment::Transform | Experiment::SecondMoment | Experiment::Ladder | Experiment::Zcheck
        )
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Experiment as ValueEnum>::from_str(s, false)
            .map_err(|_| CliError::Usage(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Format as ValueEnum>::from_str(s, false).map_err(|_| CliError::Usage(format!("unknown format `{s}`")))
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(rename = "T")]
    pub t: f64,
    pub epsilon: f64,
    pub u_exponent: f64,
    /// Explicit window length; overrides the exponent when set.
    #[serde(rename = "U")]
    pub u: Option<f64>,
    pub mode: LadderMode,
    pub tol: f64,
    pub threads: usize,
    pub cache_path: Option<PathBuf>,
    pub out_path: PathBuf,
    pub format: Format,
}

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Fields as given, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub experiment: Option<Experiment>,
    pub t: Option<f64>,
    pub epsilon: Option<f64>,
    pub u_exponent: Option<f64>,
    pub u: Option<f64>,
    pub mode: Option<LadderMode>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub cache_path: Option<PathBuf>,
    pub out_path: Option<PathBuf>,
    pub format: Option<Format>,
}

const KEYS: &[&str] = &[
    "experiment",
    "T",
    "epsilon",
    "u_exponent",
    "U",
    "mode",
    "tol",
    "threads",
    "cache_path",
    "out_path",
    "format",
];

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("`{key}`: cannot parse `{v}`")))
}

impl PartialConfig {
    /// Parses `key=value` lines; `#` starts a comment. Keys are those of
    /// [`ExperimentConfig`]; `t` and `u` are accepted for `T` and `U`.
    pub fn from_kv(text: &str) -> Result<Self, CliError> {
        let mut p = PartialConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "experiment" => p.experiment = Some(v.parse()?),
                "T" | "t" => p.t = Some(number(k, v)?),
                "epsilon" => p.epsilon = Some(number(k, v)?),
                "u_exponent" => p.u_exponent = Some(number(k, v)?),
                "U" | "u" => p.u = Some(number(k, v)?),
                "mode" => {
                    p.mode = Some(v.parse().map_err(|_| CliError::Usage(format!("`mode`: unknown mode `{v}`")))?)
                }
                "tol" => p.tol = Some(number(k, v)?),
                "threads" => p.threads = Some(number(k, v)?),
                "cache_path" => p.cache_path = Some(PathBuf::from(v)),
                "out_path" => p.out_path = Some(PathBuf::from(v)),
                "format" => p.format = Some(v.parse()?),
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown config key `{other}` (expected one of {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
        Self::from_kv(&text)
    }

    /// Fields set in `over` take precedence.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            experiment: over.experiment.or(self.experiment),
            t: over.t.or(self.t),
            epsilon: over.epsilon.or(self.epsilon),
            u_exponent: over.u_exponent.or(self.u_exponent),
            u: over.u.or(self.u),
            mode: over.mode.or(self.mode),
            tol: over.tol.or(self.tol),
            threads: over.threads.or(self.threads),
            cache_path: over.cache_path.or(self.cache_path),
            out_path: over.out_path.or(self.out_path),
            format: over.format.or(self.format),
        }
    }

    /// Applies defaults and validates.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let experiment = self
            .experiment
            .ok_or_else(|| CliError::Usage("`--experiment` is required".into()))?;
        let t = self.t.ok_or_else(|| CliError::Usage("`--t` is required".into()))?;
        let format = self.format.unwrap_or(Format::Json);
        let cfg = ExperimentConfig {
            experiment,
            t,
            epsilon: self.epsilon.unwrap_or(DEFAULT_EPSILON),
            u_exponent: self.u_exponent.unwrap_or(experiment.default_u_exponent()),
            u: self.u,
            mode: self.mode.unwrap_or(LadderMode::NumericHl),
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            threads: self.threads.unwrap_or(1),
            cache_path: self.cache_path,
            out_path: self
                .out_path
                .unwrap_or_else(|| PathBuf::from(format!("{}.{format}", experiment.name()))),
            format,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.t >= 100.0 && self.t.is_finite()) {
            return Err(CliError::Usage(format!("`--t` must be at least 100, got {}", self.t)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.05) {
            return Err(CliError::Usage(format!(
                "`--epsilon` must lie in (0, 0.05], got {}",
                self.epsilon
            )));
        }
        if !(self.u_exponent > 0.0 && self.u_exponent.is_finite()) {
            return Err(CliError::Usage(format!("`--u-exponent` must be positive, got {}", self.u_exponent)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("`--tol` must be positive, got {}", self.tol)));
        }
        if self.threads < 1 {
            return Err(CliError::Usage("`--threads` must be at least 1".into()));
        }
        if let Some(u) = self.u {
            if !(u > 0.0 && u <= self.t) {
                return Err(CliError::Usage(format!("`--u` must lie in (0, T], got {u}")));
            }
        }
        let u = self.window_len();
        if u > self.t {
            return Err(CliError::Usage(format!(
                "window U = {u:.6e} exceeds T = {}; lower `--epsilon` or `--u-exponent`",
                self.t
            )));
        }
        Ok(())
    }

    /// Window length for the configured experiment.
    pub fn window_len(&self) -> f64 {
        self.window_len_for(self.experiment)
    }

    /// Window length when running `exp` under this config. For `all`, each
    /// sub-experiment uses its own default exponent unless one was given.
/// `zcheck` samples a single height and has no window.
    pub fn window_len_for(&self, exp: Experiment) -> f64 {
        if exp == Experiment::Zcheck {
            return 0.0;
        }
        if let Some(u) = self.u {
            return u;
        }
        let exponent = if self.experiment == Experiment::All {
            exp.default_u_exponent()
        } else {
            self.u_exponent
        };
        let eps = if exp.uses_epsilon() { 2.0 * self.epsilon } else { 0.0 };
        self.t.powf(exponent + eps)
    }

    /// `key=value` form accepted by [`PartialConfig::from_kv`].
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("experiment={}\n", self.experiment.name()));
        s.push_str(&format!("T={:?}\n", self.t));
        s.push_str(&format!("epsilon={:?}\n", self.epsilon));
        s.push_str(&format!("u_exponent={:?}\n", self.u_exponent));
        if let Some(u) = self.u {
            s.push_str(&format!("U={u:?}\n"));
        }
        s.push_str(&format!("mode={}\n", self.mode.as_str()));
        s.push_str(&format!("tol={:?}\n", self.tol));
        s.push_str(&format!("threads={}\n", self.threads));
        if let Some(p) = &self.cache_path {
            s.push_str(&format!("cache_path={}\n", p.display()));
        }
        s.push_str(&format!("out_path={}\n", self.out_path.display()));
        s.push_str(&format!("format={}\n", self.format));
        s
    }
}
