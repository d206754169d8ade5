//! Windowed experiments along the ladder: the substitution identity, the
//! sixth- and fourth-order correlations, the mean-value point with its
//! prediction of `|Z(α)|`, the image fourth moment and the segment geometry.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{phi_prime, LadderMode, LadderModel};
use crate::moments::{windowed_fourth_leading, MomentEstimate, MomentKind};
use crate::primes::{constants, pnt_defect_reference};
use crate::quadrature::{integrate, zero_gap, Tolerance};
use crate::zeta::z_value;

/// Exponent of the sixth-order window, `U = T^{7/8 + 2ε}`.
pub const SIXTH_EXPONENT: f64 = 0.875;
/// Exponent of the fourth-order window, `U = T^{1/3 + 2ε}`.
pub const FOURTH_EXPONENT: f64 = 1.0 / 3.0;
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Image values of `|Z|` below this are treated as zeros by the prediction.
pub const IMAGE_ZERO: f64 = 1e-6;
/// Required agreement `|g(α) − mean| ≤ MEAN_VALUE_REL·mean`.
pub const MEAN_VALUE_REL: f64 = 1e-9;

/// A window `[T, T + U]` and its image `[φ(T)/2, φ(T+U)/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    #[serde(rename = "T")]
    pub t: f64,
    pub epsilon: f64,
    pub u_exponent: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub image: (f64, f64),
    /// Whether `U ≤ T/ln T`, the window condition of the asymptotic theory.
    pub asymptotic_admissible: bool,
}

impl WindowSpec {
    /// Resolves `U = T^{u_exponent + 2ε}`.
    pub fn resolve(model: &LadderModel, t: f64, epsilon: f64, u_exponent: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite() && u_exponent > 0.0 && u_exponent.is_finite()) {
            return Err(Error::Window(format!(
                "exponent {u_exponent} and epsilon {epsilon} must be positive and finite"
            )));
        }
        let u = t.powf(u_exponent + 2.0 * epsilon);
        Self::with_u(model, t, epsilon, u_exponent, u)
    }

    /// Window with an explicit `U`; the exponent fields are recorded as given.
    pub fn with_u(model: &LadderModel, t: f64, epsilon: f64, u_exponent: f64, u: f64) -> Result<Self> {
        if !(t >= 100.0 && t.is_finite()) {
            return Err(Error::Window(format!("T = {t} below 100")));
        }
        if !(u > 0.0 && u <= t) {
            return Err(Error::Window(format!("U = {u} must lie in (0, T] for T = {t}")));
        }
        let a = model.ladder_phi(t)?;
        let b = model.ladder_phi(t + u)?;
        if !(b.phi_half > a.phi_half) {
            return Err(Error::Window("empty image segment".into()));
        }
        Ok(WindowSpec {
            t,
            epsilon,
            u_exponent,
            u,
            image: (a.phi_half, b.phi_half),
            asymptotic_admissible: u <= t / t.ln(),
        })
    }

    /// Window with an explicit `U`; `u_exponent` is back-solved from
    /// `U = T^{u_exponent + 2ε}`.
    pub fn explicit(model: &LadderModel, t: f64, u: f64, epsilon: f64) -> Result<Self> {
        Self::with_u(model, t, epsilon, u.ln() / t.ln() - 2.0 * epsilon, u)
    }

    pub fn end(&self) -> f64 {
        self.t + self.u
    }
}

/// Relative position of `[T, T+U]` and its image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentGeometry {
    pub source: (f64, f64),
    pub image: (f64, f64),
    pub disjoint: bool,
    /// Gap between the segments, zero when they meet.
    pub rho: f64,
    /// `(1 − c − 2ε) T/ln T`.
    pub rho_lower_bound: f64,
}

pub fn segment_geometry(model: &LadderModel, t: f64, u: f64, epsilon: f64) -> Result<SegmentGeometry> {
    let w = WindowSpec::explicit(model, t, u, epsilon)?;
    Ok(geometry_of(&w))
}

fn geometry_of(w: &WindowSpec) -> SegmentGeometry {
    let source = (w.t, w.end());
    let image = w.image;
    let rho = if image.1 < source.0 {
        source.0 - image.1
    } else if image.0 > source.1 {
        image.0 - source.1
    } else {
        0.0
    };
    let k = constants();
    SegmentGeometry {
        source,
        image,
        disjoint: image.1 < source.0 || image.0 > source.1,
        rho,
        rho_lower_bound: (k.one_minus_c - 2.0 * w.epsilon) * w.t / w.t.ln(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    ConstOne,
    Linear,
    AbsZ4,
}

impl TransformKind {
    fn apply(&self, x: f64) -> f64 {
        match self {
            TransformKind::ConstOne => 1.0,
            TransformKind::Linear => x,
            TransformKind::AbsZ4 => z_value(x).powi(4),
        }
    }
}

/// Both sides of `∫_T^{T+U} f(φ/2)·Ẑ² dt = 2∫_{φ(T)/2}^{φ(T+U)/2} f(x) dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformCheck {
    pub kind: TransformKind,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_diff: f64,
    pub lhs_err: f64,
    pub rhs_err: f64,
}

pub fn transform_identity_check(
    model: &LadderModel,
    kind: TransformKind,
    t: f64,
    u: f64,
    tol: Tolerance,
) -> Result<TransformCheck> {
    let w = WindowSpec::explicit(model, t, u, 0.0)?;
    let lhs = model.integrate_coupled(t, w.end(), tol, |n| [kind.apply(n.phi_half) * n.z_hat_sq()])?;
    let (ya, yb) = w.image;
    let (rhs, rhs_err) = match kind {
        TransformKind::ConstOne => (2.0 * (yb - ya), 0.0),
        _ => {
            let est = integrate(|x| kind.apply(x), ya, yb, tol)?;
            (2.0 * est.value, 2.0 * est.err_est)
        }
    };
    Ok(TransformCheck {
        kind,
        t,
        u,
        lhs: lhs.value[0],
        rhs,
        rel_diff: ((lhs.value[0] - rhs) / rhs).abs(),
        lhs_err: lhs.err_est[0],
        rhs_err,
    })
}

/// The point `α` where `g(t) = Z⁴(φ(t)/2)·Z²(t)` meets its window mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValuePoint {
    pub alpha: f64,
    pub g_alpha: f64,
    /// Window mean `(1/U)∫ g`.
    pub mean: f64,
    /// `(1/2π²) ln⁵ T`.
    pub target: f64,
    /// False when no crossing was found and `alpha` is the left endpoint.
    pub crossing: bool,
    /// Earlier crossings passed over because `g` moves by more than the
    /// tolerance between adjacent doubles there.
    pub skipped: u32,
}

/// `|Z(α)|` against `(1/√2π)·ln^{5/2} α / Z²(φ(α)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub alpha: f64,
    pub image_point: f64,
    pub lhs_abs_z: f64,
    pub rhs_pred: f64,
    /// `lhs_abs_z / rhs_pred − 1`.
    pub residual: f64,
    /// `α − φ(α)/2`.
    pub shift: f64,
    /// `(1 − c)·π(T)`.
    pub shift_reference: f64,
    pub shift_ratio: f64,
}

/// Full record of one correlation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub experiment: String,
    pub spec: WindowSpec,
    pub mode: LadderMode,
    pub tol: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `∫ Z^{2k}(φ/2)·Ẑ² dt`, the weighted form of the left side.
    pub intermediate_hat: f64,
    /// `intermediate_hat` over its main term (`2C₀U ln⁴T` or `2U ln T`).
    pub intermediate_ratio: f64,
    /// `Φ′(φ(T))` and `Φ′(φ(T+U))`, which bracket `lhs/intermediate_hat`.
    pub phi_prime_bounds: (f64, f64),
    pub mean_value: Option<MeanValuePoint>,
    pub prediction: Option<Prediction>,
    pub prediction_residual: Option<f64>,
    pub geometry: SegmentGeometry,
    pub quad_err: f64,
    /// Seconds.
    pub wall_time: f64,
}

impl CorrelationReport {
    /// Same report with the timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

/// `Z^power(φ(t)/2)·Z²(t)` evaluated pointwise.
fn g_at(model: &LadderModel, t: f64, power: i32) -> Result<(f64, f64)> {
    let p = model.ladder_phi(t)?;
    let zi = z_value(p.phi_half);
    Ok((zi.powi(power) * z_value(t).powi(2), zi))
}

/// First `x ≥ a` where `g(x) = level`, scanning with `step(x)` and refining
/// by bisection down to adjacent doubles. Returns the bracket end closer to
/// the level.
pub fn first_crossing<G, S>(g: &G, a: f64, b: f64, level: f64, step: S) -> Option<f64>
where
    G: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    crossing_bracket(g, a, b, level, &step).map(|c| c.0)
}

/// `(best, resume)`: the crossing and the point past it where scanning for
/// the next crossing may restart.
fn crossing_bracket<G, S>(g: &G, a: f64, b: f64, level: f64, step: &S) -> Option<(f64, f64)>
where
    G: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let mut x0 = a;
    let mut r0 = g(a) - level;
    if r0 == 0.0 {
        return Some((a, a + step(a)));
    }
    while x0 < b {
        let x1 = (x0 + step(x0)).min(b);
        let r1 = g(x1) - level;
        if r1 == 0.0 {
            return Some((x1, x1 + step(x1)));
        }
        if (r0 < 0.0) != (r1 < 0.0) {
            let (mut lo, mut hi, mut rlo, mut rhi) = (x0, x1, r0, r1);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let rm = g(mid) - level;
                if rm == 0.0 {
                    return Some((mid, hi));
                }
                if (rm < 0.0) == (rlo < 0.0) {
                    lo = mid;
                    rlo = rm;
                } else {
                    hi = mid;
                    rhi = rm;
                }
            }
            return Some((if rlo.abs() <= rhi.abs() { lo } else { hi }, hi));
        }
        x0 = x1;
        r0 = r1;
    }
    None
}

fn half_gap(t: f64) -> f64 {
    0.5 * zero_gap(t)
}

/// Mean-value point of `Z⁴(φ/2)·Z²` for a window whose integral mean is `mean`.
pub fn mean_value_point(model: &LadderModel, w: &WindowSpec, mean: f64) -> Result<MeanValuePoint> {
    mean_value_from(model, w, mean, w.t)
}

fn mean_value_from(model: &LadderModel, w: &WindowSpec, mean: f64, start: f64) -> Result<MeanValuePoint> {
    let g = |t: f64| g_at(model, t, 4).map_or(f64::NAN, |v| v.0);
    let target = constants().c0 * w.t.ln().powi(5);
    let mut from = start;
    let mut skipped = 0;
    while let Some((alpha, resume)) = crossing_bracket(&g, from, w.end(), mean, &half_gap) {
        let g_alpha = g(alpha);
        if (g_alpha - mean).abs() <= MEAN_VALUE_REL * mean {
            return Ok(MeanValuePoint {
                alpha,
                g_alpha,
                mean,
                target,
                crossing: true,
                skipped,
            });
        }
        skipped += 1;
        from = resume;
    }
    Ok(MeanValuePoint {
        alpha: w.t,
        g_alpha: g_at(model, w.t, 4)?.0,
        mean,
        target,
        crossing: false,
        skipped,
    })
}

/// Prediction of `|Z(α)|` from the image value; skips crossings whose image
/// point sits on a zero of `Z`.
pub fn prediction_check(model: &LadderModel, w: &WindowSpec, mean: f64) -> Result<(MeanValuePoint, Prediction)> {
    let mut start = w.t;
    loop {
        let mv = mean_value_from(model, w, mean, start)?;
        if !mv.crossing {
            return Err(Error::Window("no mean-value crossing away from image zeros".into()));
        }
        let alpha = mv.alpha;
        let p = model.ladder_phi(alpha)?;
        let zi = z_value(p.phi_half);
        if zi.abs() < IMAGE_ZERO {
            start = alpha + 0.25 * half_gap(alpha);
            continue;
        }
        let lhs_abs_z = z_value(alpha).abs();
        let rhs_pred = (1.0 / (std::f64::consts::SQRT_2 * std::f64::consts::PI)) * alpha.ln().powf(2.5) / (zi * zi);
        let shift = alpha - p.phi_half;
        let shift_reference = pnt_defect_reference(w.t)?;
        let pred = Prediction {
            alpha,
            image_point: p.phi_half,
            lhs_abs_z,
            rhs_pred,
            residual: lhs_abs_z / rhs_pred - 1.0,
            shift,
            shift_reference,
            shift_ratio: shift / shift_reference,
        };
        return Ok((mv, pred));
    }
}

/// `∫ Z⁴` over the image of `[T, T+U]` against `C₀ U ln⁴ T`.
pub fn image_fourth_check(model: &LadderModel, t: f64, u: f64, tol: Tolerance) -> Result<MomentEstimate> {
    let w = WindowSpec::explicit(model, t, u, 0.0)?;
    let est = integrate(|x| z_value(x).powi(4), w.image.0, w.image.1, tol)?;
    Ok(MomentEstimate::new(
        MomentKind::Fourth,
        t,
        u,
        est.value,
        windowed_fourth_leading(t, u)?,
        est.err_est,
    ))
}

fn correlation(
    model: &LadderModel,
    w: WindowSpec,
    image_power: i32,
    tol: Tolerance,
    with_mean_value: bool,
) -> Result<CorrelationReport> {
    let started = Instant::now();
    let est = model.integrate_coupled(w.t, w.end(), tol, |n| {
        let zi = z_value(n.phi_half).powi(image_power);
        [zi * n.z * n.z, zi * n.z_hat_sq()]
    })?;
    let ln_t = w.t.ln();
    let k = constants();
    let (lhs, hat) = (est.value[0], est.value[1]);
    let (rhs, hat_main, name) = if image_power == 4 {
        (k.c0 * w.u * ln_t.powi(5), 2.0 * k.c0 * w.u * ln_t.powi(4), "correlation6")
    } else {
        (w.u * ln_t.powi(2), 2.0 * w.u * ln_t, "correlation4")
    };
    let (mean_value, prediction) = if with_mean_value {
        let (mv, pred) = prediction_check(model, &w, lhs / w.u)?;
        (Some(mean_value_point(model, &w, lhs / w.u).unwrap_or(mv)), Some(pred))
    } else {
        (None, None)
    };
    Ok(CorrelationReport {
        experiment: name.to_string(),
        spec: w,
        mode: model.mode,
        tol: tol.rel.max(tol.abs),
        lhs,
        rhs,
        ratio: lhs / rhs,
        intermediate_hat: hat,
        intermediate_ratio: hat / hat_main,
        phi_prime_bounds: (phi_prime(2.0 * w.image.0), phi_prime(2.0 * w.image.1)),
        mean_value,
        prediction_residual: prediction.map(|p| p.residual),
        prediction,
        geometry: geometry_of(&w),
        quad_err: est.err_est[0],
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// `∫_T^{T+U} Z⁴(φ(t)/2)·Z²(t) dt` against `(1/2π²) U ln⁵ T` with
/// `U = T^{u_exponent + 2ε}`.
pub fn correlation6(model: &LadderModel, t: f64, epsilon: f64, u_exponent: f64, tol: Tolerance) -> Result<CorrelationReport> {
    let w = WindowSpec::resolve(model, t, epsilon, u_exponent)?;
    correlation(model, w, 4, tol, true)
}

/// `∫_T^{T+U} Z²(φ(t)/2)·Z²(t) dt` against `U ln² T`.
pub fn correlation4(model: &LadderModel, t: f64, epsilon: f64, u_exponent: f64, tol: Tolerance) -> Result<CorrelationReport> {
    let w = WindowSpec::resolve(model, t, epsilon, u_exponent)?;
    correlation(model, w, 2, tol, false)
}

/// Correlation on a window given explicitly.
pub fn correlation_on(model: &LadderModel, w: WindowSpec, sixth: bool, tol: Tolerance) -> Result<CorrelationReport> {
    if sixth {
        correlation(model, w, 4, tol, true)
    } else {
        correlation(model, w, 2, tol, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn model() -> &'static LadderModel {
        static M: OnceLock<LadderModel> = OnceLock::new();
        M.get_or_init(|| LadderModel::numeric(6000.0).unwrap())
    }

    #[test]
    fn crossing_of_synthetic_function() {
        // sin crosses 0.5 first at π/6
        let x = first_crossing(&f64::sin, 0.0, 3.0, 0.5, |_| 0.1).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_6).abs() < 1e-9);
        assert!((x.sin() - 0.5).abs() < 1e-9 * 0.5);
        assert!(first_crossing(&|_| 1.0, 0.0, 1.0, 0.5, |_| 0.1).is_none());
        assert_eq!(first_crossing(&|x| x, 0.0, 1.0, 0.0, |_| 0.1), Some(0.0));
    }

    #[test]
    fn window_resolution_and_rejection() {
        let m = model();
        let w = WindowSpec::resolve(m, 4000.0, 0.01, FOURTH_EXPONENT).unwrap();
        assert_eq!(w.u, 4000f64.powf(FOURTH_EXPONENT + 0.02));
        assert!(w.asymptotic_admissible);
        assert!(w.image.0 < w.image.1);
        assert!(WindowSpec::resolve(m, 4000.0, 0.2, SIXTH_EXPONENT).is_err());
        assert!(WindowSpec::with_u(m, 4000.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn geometry_gap_definition() {
        let m = model();
        let g = segment_geometry(m, 4000.0, 20.0, 0.01).unwrap();
        assert!(g.disjoint);
        assert_eq!(g.rho, g.source.0 - g.image.1);
    }

    #[test]
    fn constant_transform_is_exact() {
        let m = model();
        let c = transform_identity_check(m, TransformKind::ConstOne, 3000.0, 500.0, Tolerance::rel(1e-10)).unwrap();
        assert!(c.rel_diff <= 1e-9, "{c:?}");
    }

    #[test]
    fn small_correlation6_is_consistent() {
        let m = model();
        let r = correlation6(m, 4000.0, 0.01, FOURTH_EXPONENT, Tolerance::rel(1e-6)).unwrap();
        assert!((r.ratio * r.rhs - r.lhs).abs() <= 1e-15 * r.lhs);
        let q = r.lhs / r.intermediate_hat;
        assert!(q >= r.phi_prime_bounds.0 * (1.0 - 1e-12) && q <= r.phi_prime_bounds.1 * (1.0 + 1e-12));
        let mv = r.mean_value.unwrap();
        assert!(mv.crossing);
        assert!(mv.alpha > r.spec.t && mv.alpha < r.spec.end());
        assert!((mv.g_alpha - mv.mean).abs() <= 1e-9 * mv.mean, "{mv:?}");
        assert!(r.prediction.unwrap().rhs_pred > 0.0);
    }
}
