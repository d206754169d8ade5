//! Hardy's `Z(t)` on the critical line.
//!
//! `Z(t) = e^{iθ(t)} ζ(1/2 + it)` is real for real `t` and `|Z(t)| = |ζ(1/2 + it)|`.
//! [`hardy_z`] evaluates it with the Riemann–Siegel formula
//!
//! ```text
//! Z(t) = 2 Σ_{n ≤ N} n^{-1/2} cos(θ(t) − t ln n) + R(t),   N = ⌊√(t/2π)⌋,
//! ```
//!
//! keeping the correction terms `C₀ … C₄` of `R(t)`. Above
//! [`PRECISE_FROM`] the phases `θ(t) − t ln n` are formed in multiple
//! precision, since their double-precision rounding would otherwise exceed
//! the 1e-6 accuracy target.

mod kernel;
mod mp;
pub mod oracle;
mod remainder;

use std::f64::consts::{FRAC_PI_8, TAU};
use std::sync::{OnceLock, RwLock};

use astro_float::BigFloat;
use serde::{Deserialize, Serialize};

pub use oracle::{em_zeta_half, theta_oracle, z_oracle};

use crate::error::{Error, Result};
use mp::{to_f64, Mp};

/// Lowest height served by the Riemann–Siegel evaluator.
pub const T_MIN: f64 = 10.0;
/// Heights above this use multiple-precision phases.
pub const PRECISE_FROM: f64 = 1e7;
/// Largest height accepted by [`hardy_z`].
pub const T_MAX: f64 = 1e12;

/// Main-sum table size for the double-precision path (covers `t ≤ 2π·4096²`).
const FAST_TERMS: usize = 4096;

/// One evaluation of `Z` at height `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZSample {
    pub t: f64,
    pub theta: f64,
    pub z: f64,
    /// `|ζ(1/2 + it)|`, identical to `|z|`.
    pub abs_zeta: f64,
}

fn check_height(t: f64) -> Result<()> {
    if t.is_nan() || t < T_MIN {
        return Err(Error::Domain { t, min: T_MIN });
    }
    if t > T_MAX {
        return Err(Error::Range {
            what: "height",
            value: t,
            lo: T_MIN,
            hi: T_MAX,
        });
    }
    Ok(())
}

/// Riemann–Siegel theta function from its asymptotic expansion
/// `(t/2)ln(t/2π) − t/2 − π/8 + 1/(48t) + 7/(5760t³)`.
pub fn rs_theta(t: f64) -> Result<f64> {
    check_height(t)?;
    Ok(theta_series(t))
}

#[inline]
fn theta_series(t: f64) -> f64 {
    let inv = t.recip();
    0.5 * t * (t / TAU).ln() - 0.5 * t - FRAC_PI_8 + inv * (1.0 / 48.0 + inv * inv * (7.0 / 5760.0))
}

struct TermTable {
    ln_n: Vec<f64>,
    weight: Vec<f64>,
}

fn fast_table() -> &'static TermTable {
    static TABLE: OnceLock<TermTable> = OnceLock::new();
    TABLE.get_or_init(|| TermTable {
        ln_n: (1..=FAST_TERMS).map(|n| (n as f64).ln()).collect(),
        weight: (1..=FAST_TERMS).map(|n| (n as f64).sqrt().recip()).collect(),
    })
}

/// Evaluates `Z(t)`.
pub fn hardy_z(t: f64) -> Result<ZSample> {
    check_height(t)?;
    let (theta, z) = if t > PRECISE_FROM {
        precise_z(t)
    } else {
        let theta = theta_series(t);
        (theta, fast_z(t, theta))
    };
    Ok(ZSample {
        t,
        theta,
        z,
        abs_zeta: z.abs(),
    })
}

/// `Z(t)` without the `ZSample` wrapper, for integrand loops.
///
/// Returns NaN outside `[T_MIN, T_MAX]`.
#[inline]
pub fn z_value(t: f64) -> f64 {
    if !(T_MIN..=PRECISE_FROM).contains(&t) {
        return hardy_z(t).map_or(f64::NAN, |s| s.z);
    }
    fast_z(t, theta_series(t))
}

#[inline]
fn fast_z(t: f64, theta: f64) -> f64 {
    let a = (t / TAU).sqrt();
    let n = a.floor() as usize;
    let table = fast_table();
    let main = kernel::cos_sum(theta, t, &table.ln_n[..n], &table.weight[..n]);
    2.0 * main + remainder::rs_remainder(a, n as u64)
}

const PRECISE_BITS: usize = 128;

fn precise_ln_table(n: usize) -> std::sync::RwLockReadGuard<'static, Vec<BigFloat>> {
    static TABLE: OnceLock<RwLock<Vec<BigFloat>>> = OnceLock::new();
    let lock = TABLE.get_or_init(|| RwLock::new(Vec::new()));
    {
        let guard = lock.read().expect("ln table lock");
        if guard.len() >= n {
            return guard;
        }
    }
    {
        let mut guard = lock.write().expect("ln table lock");
        let m = Mp::new(PRECISE_BITS);
        let start = guard.len();
        for k in start..n {
            let v = m.ln(&m.u(k as u64 + 1));
            guard.push(v);
        }
    }
    lock.read().expect("ln table lock")
}

fn precise_z(t: f64) -> (f64, f64) {
    let m = Mp::new(PRECISE_BITS);
    let a = (t / TAU).sqrt();
    let n = a.floor() as usize;
    let tb = m.f(t);
    let two_pi = m.mul(&m.u(2), &m.pi());
    let half_t = m.div(&tb, &m.u(2));
    let ln_ratio = m.ln(&m.div(&tb, &two_pi));
    let mut theta = m.sub(&m.mul(&half_t, &ln_ratio), &half_t);
    let pi = m.pi();
    theta = m.sub(&theta, &m.div(&pi, &m.u(8)));
    theta = m.add(&theta, &m.f((1.0 / 48.0 + 7.0 / (5760.0 * t * t)) / t));
    let theta_f64 = to_f64(&theta);

    let table = precise_ln_table(n);
    let mut terms = Vec::with_capacity(n);
    for (k, ln_k) in table[..n].iter().enumerate() {
        let phase = m.sub(&theta, &m.mul(&tb, ln_k));
        let r = to_f64(&m.reduce_two_pi(&phase));
        terms.push(r.cos() / ((k + 1) as f64).sqrt());
    }
    let main = crate::quadrature::pairwise_sum(&terms);
    (theta_f64, 2.0 * main + remainder::rs_remainder(a, n as u64))
}
