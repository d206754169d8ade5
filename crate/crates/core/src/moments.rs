//! Second and fourth moments of `Z`: asymptotic main terms and windowed
//! numeric integrals to compare against them.
//!
//! Only the leading fourth-moment coefficient `C₀ = 1/2π²` is used; the
//! lower-order coefficients are not known in closed form, so reports show the
//! ratio and leave the drift visible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::constants;
use crate::quadrature::{integrate, Tolerance};
use crate::zeta::z_value;

/// Smallest `T` accepted by the asymptotic formulas.
pub const T_FLOOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    Second,
    Fourth,
}

impl MomentKind {
    pub fn power(&self) -> i32 {
        match self {
            MomentKind::Second => 2,
            MomentKind::Fourth => 4,
        }
    }
}

/// A numeric window integral next to its asymptotic counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub kind: MomentKind,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub numeric: f64,
    pub asymptotic_main: f64,
    pub ratio: f64,
    pub quad_err: f64,
}

impl MomentEstimate {
    pub fn new(kind: MomentKind, t: f64, u: f64, numeric: f64, asymptotic_main: f64, quad_err: f64) -> Self {
        Self {
            kind,
            t,
            u,
            numeric,
            asymptotic_main,
            ratio: numeric / asymptotic_main,
            quad_err,
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= T_FLOOR && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Range {
            what: "moment height T",
            value: t,
            lo: T_FLOOR,
            hi: f64::INFINITY,
        })
    }
}

fn check_window(t: f64, u: f64) -> Result<()> {
    check_t(t)?;
    if u > 0.0 && u <= t {
        Ok(())
    } else {
        Err(Error::Window(format!("U = {u} must lie in (0, T] for T = {t}")))
    }
}

/// `T ln T + (2c − 1 − ln 2π) T`.
pub fn second_moment_asymptotic(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(t * t.ln() + constants().hl_linear_coeff() * t)
}

/// `U ln T + (2c − ln 2π) U`.
pub fn windowed_second_asymptotic(t: f64, u: f64) -> Result<f64> {
    check_window(t, u)?;
    let k = constants();
    Ok(u * t.ln() + (2.0 * k.euler_c - k.ln_two_pi) * u)
}

/// `C₀ T ln⁴ T`.
pub fn fourth_moment_leading(t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(constants().c0 * t * t.ln().powi(4))
}

/// `C₀ U ln⁴ T`.
pub fn windowed_fourth_leading(t: f64, u: f64) -> Result<f64> {
    check_window(t, u)?;
    Ok(constants().c0 * u * t.ln().powi(4))
}

/// `∫_T^{T+U} Z^power` against the matching main term.
pub fn windowed_numeric_moment(t: f64, u: f64, kind: MomentKind, tol: Tolerance) -> Result<MomentEstimate> {
    check_window(t, u)?;
    let p = kind.power();
    let est = integrate(|x| z_value(x).powi(p), t, t + u, tol)?;
    let main = match kind {
        MomentKind::Second => windowed_second_asymptotic(t, u)?,
        MomentKind::Fourth => windowed_fourth_leading(t, u)?,
    };
    Ok(MomentEstimate::new(kind, t, u, est.value, main, est.err_est))
}
