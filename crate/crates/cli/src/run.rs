//! Experiment dispatch and acceptance bands.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use zll_core::correlation::{
    correlation_on, image_fourth_check, segment_geometry, transform_identity_check, CorrelationReport,
    TransformKind, WindowSpec, MEAN_VALUE_REL,
};
use zll_core::ladder::extent_for;
use zll_core::moments::{windowed_numeric_moment, MomentKind};
use zll_core::zeta::z_value;
use zll_core::{em_zeta_half, hardy_z, LadderMode, LadderModel, Tolerance};

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{Check, Report, RunStatus};
use crate::CliError;

/// Environment variable naming the directory that holds ladder caches.
pub const CACHE_DIR_ENV: &str = "ZLL_CACHE_DIR";

pub const ZCHECK_ABS: f64 = 1e-6;
pub const FIRST_ZERO: f64 = 14.134_725_141_734_694;
pub const FIRST_ZERO_TOL: f64 = 1e-4;
pub const DEFECT_BAND: (f64, f64) = (0.8, 1.25);
/// `|slope − 1| ≤ SLOPE_FACTOR · ln ln T / ln T`.
pub const SLOPE_FACTOR: f64 = 3.0;
pub const TRANSFORM_LINEAR_REL: f64 = 1e-6;
pub const TRANSFORM_Z4_REL: f64 = 1e-4;
pub const SECOND_MOMENT_BAND: (f64, f64) = (0.95, 1.05);
pub const IMAGE_FOURTH_BAND: (f64, f64) = (0.6, 1.6);
pub const CORRELATION6_BAND: (f64, f64) = (0.5, 2.0);
pub const CORRELATION4_BAND: (f64, f64) = (0.4, 2.5);
pub const RESIDUAL_BAND: (f64, f64) = (-0.35, 0.45);
pub const SHIFT_BAND: (f64, f64) = (0.8, 1.25);

/// Sub-experiments run by `all`, in order.
pub const ALL: [Experiment; 9] = [
    Experiment::Zcheck,
    Experiment::Ladder,
    Experiment::Transform,
    Experiment::SecondMoment,
    Experiment::FourthMoment,
    Experiment::Correlation6,
    Experiment::Correlation4,
    Experiment::Predict,
    Experiment::Geometry,
];

fn needs_ladder(e: Experiment) -> bool {
    !matches!(e, Experiment::Zcheck | Experiment::SecondMoment)
}

/// Ladder cache location: the configured path, else a file in
/// `$ZLL_CACHE_DIR`, else one in the system temp directory.
pub fn cache_path(cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = &cfg.cache_path {
        return p.clone();
    }
    let dir = std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("zll"));
    dir.join(format!("zll-ladder-{}.cache", cfg.mode.as_str()))
}

/// Runs the configured experiment (each sub-experiment for `all`) on a pool
/// of `cfg.threads` workers. Module errors become reports with status
/// `error`; only pool or cache-directory failures return `Err`.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Report>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("`--threads`: {e}")))?;
    let experiments: Vec<Experiment> = if cfg.experiment == Experiment::All {
        ALL.to_vec()
    } else {
        vec![cfg.experiment]
    };
    pool.install(|| {
        let model = load_model(cfg, &experiments);
        Ok(experiments
            .iter()
            .map(|&e| {
                let started = Instant::now();
                let result = match &model {
                    Ok(m) => run_one(cfg, e, m.as_ref()),
                    Err(err) => Err(err.clone()),
                };
                finish(cfg, e, result, started)
            })
            .collect())
    })
}

fn load_model(cfg: &ExperimentConfig, experiments: &[Experiment]) -> Result<Option<LadderModel>, zll_core::Error> {
    let t_end = experiments
        .iter()
        .filter(|&&e| needs_ladder(e))
        .map(|&e| cfg.t + cfg.window_len_for(e))
        .fold(f64::NAN, f64::max);
    if t_end.is_nan() {
        return Ok(None);
    }
    if cfg.mode == LadderMode::AnalyticHl {
        return Ok(Some(LadderModel::analytic()));
    }
    let path = cache_path(cfg);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| zll_core::Error::Cache(format!("{}: {e}", dir.display())))?;
    }
    LadderModel::load_or_build(Some(&path), cfg.mode, extent_for(t_end)).map(Some)
}

/// Numbers for the summary row plus checks and the detailed record.
struct Outcome {
    u: f64,
    lhs: f64,
    rhs: f64,
    quad_err: f64,
    checks: Vec<Check>,
    detail: serde_json::Value,
}

fn detail<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).unwrap_or(serde_json::Value::Null)
}

fn finish(
    cfg: &ExperimentConfig,
    e: Experiment,
    result: Result<Outcome, zll_core::Error>,
    started: Instant,
) -> Report {
    let wall_time = started.elapsed().as_secs_f64();
    let base = |u: f64| Report {
        experiment: e.name().to_string(),
        t: cfg.t,
        u,
        mode: cfg.mode,
        tol: cfg.tol,
        lhs: f64::NAN,
        rhs: f64::NAN,
        ratio: f64::NAN,
        quad_err: f64::NAN,
        checks: Vec::new(),
        status: RunStatus::Error,
        error: None,
        detail: serde_json::Value::Null,
        wall_time,
    };
    match result {
        Ok(o) => {
            let status = if o.checks.iter().all(|c| c.pass) {
                RunStatus::Pass
            } else {
                RunStatus::BandFailure
            };
            Report {
                lhs: o.lhs,
                rhs: o.rhs,
                ratio: o.lhs / o.rhs,
                quad_err: o.quad_err,
                checks: o.checks,
                status,
                detail: o.detail,
                ..base(o.u)
            }
        }
        Err(err) => Report {
            error: Some(err.to_string()),
            ..base(cfg.window_len_for(e))
        },
    }
}

fn run_one(cfg: &ExperimentConfig, e: Experiment, model: Option<&LadderModel>) -> Result<Outcome, zll_core::Error> {
    let t = cfg.t;
    let u = cfg.window_len_for(e);
    let tol = Tolerance::rel(cfg.tol);
    let model = || model.ok_or_else(|| zll_core::Error::Invalid("ladder not built".into()));
    match e {
        Experiment::Zcheck => zcheck(t),
        Experiment::Ladder => {
            let m = model()?;
            let defect = m.ladder_defect(t)?;
            let slope = m.ladder_slope(t, u)?;
            let lt = t.ln();
            Ok(Outcome {
                u,
                lhs: defect.defect,
                rhs: defect.reference,
                quad_err: 0.0,
                checks: vec![
                    Check::above("defect_positive", defect.defect, 0.0),
                    Check::band("defect_ratio", defect.ratio, DEFECT_BAND.0, DEFECT_BAND.1),
                    Check::at_most("slope_deviation", (slope - 1.0).abs(), SLOPE_FACTOR * lt.ln() / lt),
                ],
                detail: serde_json::json!({
                    "point": m.ladder_phi(t)?,
                    "defect": defect,
                    "slope": slope,
                }),
            })
        }
        Experiment::Transform => {
            let m = model()?;
            let checks = [
                (TransformKind::ConstOne, TRANSFORM_LINEAR_REL),
                (TransformKind::Linear, TRANSFORM_LINEAR_REL),
                (TransformKind::AbsZ4, TRANSFORM_Z4_REL),
            ]
            .into_iter()
            .map(|(kind, bound)| transform_identity_check(m, kind, t, u, tol).map(|c| (c, bound)))
            .collect::<Result<Vec<_>, _>>()?;
            let (z4, _) = checks[2];
            Ok(Outcome {
                u,
                lhs: z4.lhs,
                rhs: z4.rhs,
                quad_err: z4.lhs_err + z4.rhs_err,
                checks: checks
                    .iter()
                    .map(|(c, bound)| {
                        let name = format!("rel_diff_{}", detail(&c.kind).as_str().unwrap_or("?"));
                        Check::at_most(&name, c.rel_diff, *bound)
                    })
                    .collect(),
                detail: detail(&checks.iter().map(|(c, _)| *c).collect::<Vec<_>>()),
            })
        }
        Experiment::SecondMoment => {
            let m = windowed_numeric_moment(t, u, MomentKind::Second, tol)?;
            Ok(Outcome {
                u,
                lhs: m.numeric,
                rhs: m.asymptotic_main,
                quad_err: m.quad_err,
                checks: vec![Check::band("ratio", m.ratio, SECOND_MOMENT_BAND.0, SECOND_MOMENT_BAND.1)],
                detail: detail(&m),
            })
        }
        Experiment::FourthMoment => {
            let m = model()?;
            let img = image_fourth_check(m, t, u, tol)?;
            let hat = transform_identity_check(m, TransformKind::AbsZ4, t, u, tol)?;
            let diff = (hat.lhs - 2.0 * img.numeric).abs();
            Ok(Outcome {
                u,
                lhs: img.numeric,
                rhs: img.asymptotic_main,
                quad_err: img.quad_err,
                checks: vec![
                    Check::band("ratio", img.ratio, IMAGE_FOURTH_BAND.0, IMAGE_FOURTH_BAND.1),
                    Check::at_most("hat_weighted_diff", diff, hat.lhs_err + 2.0 * img.quad_err),
                ],
                detail: serde_json::json!({ "image": img, "hat_weighted": hat }),
            })
        }
        Experiment::Correlation6 | Experiment::Correlation4 => {
            let sixth = e == Experiment::Correlation6;
            let r = correlation(cfg, model()?, e, sixth, tol)?;
            let band = if sixth { CORRELATION6_BAND } else { CORRELATION4_BAND };
            let mut checks = vec![Check::band("ratio", r.ratio, band.0, band.1)];
            if sixth {
                checks.extend(mean_value_checks(&r));
                if let Some(p) = r.prediction_residual {
                    checks.push(Check::band("prediction_residual", p, RESIDUAL_BAND.0, RESIDUAL_BAND.1));
                }
            }
            Ok(Outcome {
                u: r.spec.u,
                lhs: r.lhs,
                rhs: r.rhs,
                quad_err: r.quad_err,
                checks,
                detail: detail(&r),
            })
        }
        Experiment::Predict => {
            let r = correlation(cfg, model()?, e, true, tol)?;
            let p = r
                .prediction
                .ok_or_else(|| zll_core::Error::Invalid("no prediction point in window".into()))?;
            let mut checks = mean_value_checks(&r);
            checks.push(Check::above("rhs_pred_positive", p.rhs_pred, 0.0));
            checks.push(Check::band("prediction_residual", p.residual, RESIDUAL_BAND.0, RESIDUAL_BAND.1));
            checks.push(Check::band("shift_ratio", p.shift_ratio, SHIFT_BAND.0, SHIFT_BAND.1));
            Ok(Outcome {
                u: r.spec.u,
                lhs: p.lhs_abs_z,
                rhs: p.rhs_pred,
                quad_err: r.quad_err,
                checks,
                detail: detail(&r),
            })
        }
        Experiment::Geometry => {
            let g = segment_geometry(model()?, t, u, cfg.epsilon)?;
            Ok(Outcome {
                u,
                lhs: g.rho,
                rhs: g.rho_lower_bound,
                quad_err: 0.0,
                checks: vec![
                    Check::holds("disjoint", g.disjoint),
                    Check::above("rho_above_bound", g.rho, g.rho_lower_bound),
                ],
                detail: detail(&g),
            })
        }
        Experiment::All => Err(zll_core::Error::Invalid("`all` is not a single experiment".into())),
    }
}

fn correlation(
    cfg: &ExperimentConfig,
    model: &LadderModel,
    e: Experiment,
    sixth: bool,
    tol: Tolerance,
) -> Result<CorrelationReport, zll_core::Error> {
    let exponent = if cfg.experiment == Experiment::All {
        e.default_u_exponent()
    } else {
        cfg.u_exponent
    };
    let w = match cfg.u {
        Some(u) => WindowSpec::with_u(model, cfg.t, cfg.epsilon, exponent, u)?,
        None => WindowSpec::resolve(model, cfg.t, cfg.epsilon, exponent)?,
    };
    correlation_on(model, w, sixth, tol)
}

fn mean_value_checks(r: &CorrelationReport) -> Vec<Check> {
    match &r.mean_value {
        Some(mv) => vec![
            Check::holds("mean_value_crossing", mv.crossing),
            Check::at_most("mean_value_rel", (mv.g_alpha - mv.mean).abs() / mv.mean, MEAN_VALUE_REL),
        ],
        None => vec![Check::holds("mean_value_crossing", false)],
    }
}

fn zcheck(t: f64) -> Result<Outcome, zll_core::Error> {
    let z = hardy_z(t)?;
    let oracle = em_zeta_half(t)?.norm();
    let zero = first_sign_change(14.0, 14.3);
    Ok(Outcome {
        u: 0.0,
        lhs: z.abs_zeta,
        rhs: oracle,
        quad_err: 0.0,
        checks: vec![
            Check::at_most("abs_diff", (z.abs_zeta - oracle).abs(), ZCHECK_ABS),
            Check::at_most("first_zero_offset", (zero - FIRST_ZERO).abs(), FIRST_ZERO_TOL),
        ],
        detail: serde_json::json!({ "sample": z, "oracle_abs_zeta": oracle, "first_zero": zero }),
    })
}

/// Bisects a sign change of `Z` on `[a, b]` down to adjacent doubles.
pub fn first_sign_change(mut a: f64, mut b: f64) -> f64 {
    let mut fa = z_value(a);
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return m;
        }
        let fm = z_value(m);
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
}
