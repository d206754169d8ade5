//! Acceptance run: every criterion at its stated tolerance, one line each,
//! nonzero exit if any fails.
//!
//! The ladder to 1.24e6 is cached under `$ZLL_CACHE_DIR` (or the cargo test
//! temp dir); the first run builds it.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zll_core::correlation::{
    correlation4, correlation6, image_fourth_check, segment_geometry, transform_identity_check, CorrelationReport,
    TransformKind, FOURTH_EXPONENT, MEAN_VALUE_REL, SIXTH_EXPONENT,
};
use zll_core::ladder::extent_for;
use zll_core::moments::{windowed_numeric_moment, MomentKind};
use zll_core::quadrature::integrate;
use zll_core::zeta::z_value;
use zll_core::{em_zeta_half, hardy_z, LadderMode, LadderModel, Tolerance};

const EPS: f64 = 0.01;
const TOL: f64 = 1e-6;
const HEIGHTS: [f64; 3] = [1e4, 1e5, 1e6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cache_file() -> PathBuf {
    let dir = std::env::var_os("ZLL_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")));
    dir.join("zll-ladder-numeric_hl.cache")
}

fn in_band(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut failed = 0;
    for _ in 0..100 {
        let t = rng.gen_range(1e3..1e5);
        let diff = match (hardy_z(t), em_zeta_half(t)) {
            (Ok(z), Ok(o)) => (z.abs_zeta - o.norm()).abs(),
            _ => f64::INFINITY,
        };
        worst = worst.max(diff);
        if diff.is_nan() || diff > 1e-6 {
            failed += 1;
        }
    }
    // first sign change of Z above t = 10
    let mut a = 10.0;
    while z_value(a).signum() == z_value(a + 0.01).signum() && a < 20.0 {
        a += 0.01;
    }
    let (mut lo, mut hi) = (a, a + 0.01);
    let s = z_value(lo).signum();
    while hi - lo > 1e-12 {
        let m = 0.5 * (lo + hi);
        if z_value(m).signum() == s {
            lo = m;
        } else {
            hi = m;
        }
    }
    let zero = 0.5 * (lo + hi);
    let secs = started.elapsed().as_secs_f64();
    outcome(
        failed == 0 && (zero - 14.1347).abs() <= 1e-4 && secs <= 60.0,
        format!("max |Δ| = {worst:.2e} over 100 points ({failed} > 1e-6), first zero {zero:.7}, {secs:.1}s"),
    )
}

fn substitution_identity(m: &LadderModel) -> Outcome {
    let started = Instant::now();
    let tol = Tolerance::rel(1e-8);
    let lin = transform_identity_check(m, TransformKind::Linear, 1e4, 1e3, tol);
    let z4 = transform_identity_check(m, TransformKind::AbsZ4, 1e4, 1e3, tol);
    let secs = started.elapsed().as_secs_f64();
    match (lin, z4) {
        (Ok(l), Ok(z)) => outcome(
            l.rel_diff <= 1e-6 && z.rel_diff <= 1e-4 && secs <= 120.0,
            format!("rel_diff linear {:.2e}, |Z|^4 {:.2e}, {secs:.1}s", l.rel_diff, z.rel_diff),
        ),
        (l, z) => outcome(false, format!("error: {:?} {:?}", l.err(), z.err())),
    }
}

fn second_moment() -> Outcome {
    let started = Instant::now();
    let t: f64 = 1e5;
    match windowed_numeric_moment(t, t.powf(SIXTH_EXPONENT), MomentKind::Second, Tolerance::rel(TOL)) {
        Ok(e) => {
            let secs = started.elapsed().as_secs_f64();
            outcome(
                in_band(e.ratio, (0.95, 1.05)) && secs <= 300.0,
                format!("ratio {:.4} at T = 1e5, U = T^(7/8), {secs:.1}s", e.ratio),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn ladder_slope(m: &LadderModel) -> Outcome {
    let t: f64 = 1e5;
    let allowance = 3.0 * t.ln().ln() / t.ln();
    match m.ladder_slope(t, t.powf(SIXTH_EXPONENT)) {
        Ok(s) => outcome(
            (s - 1.0).abs() <= allowance,
            format!("slope {s:.4}, |slope - 1| = {:.4} <= {allowance:.4}", (s - 1.0).abs()),
        ),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn ladder_defect(m: &LadderModel) -> Outcome {
    match (m.ladder_defect(1e4), m.ladder_defect(1e6)) {
        (Ok(lo), Ok(hi)) => outcome(
            in_band(hi.ratio, (0.8, 1.25)) && (hi.ratio - 1.0).abs() <= (lo.ratio - 1.0).abs(),
            format!("ratio {:.4} at 1e4, {:.4} at 1e6", lo.ratio, hi.ratio),
        ),
        (a, b) => outcome(false, format!("error: {:?} {:?}", a.err(), b.err())),
    }
}

fn geometry(m: &LadderModel) -> Outcome {
    let mut rows = Vec::new();
    for t in HEIGHTS {
        match segment_geometry(m, t, t.powf(FOURTH_EXPONENT + 2.0 * EPS), EPS) {
            Ok(g) => rows.push(g),
            Err(e) => return outcome(false, format!("error at {t:e}: {e}")),
        }
    }
    let each = rows.iter().all(|g| g.disjoint && g.rho > g.rho_lower_bound);
    let increasing = rows.windows(2).all(|w| w[1].rho > w[0].rho);
    let text: Vec<String> = rows
        .iter()
        .map(|g| format!("ρ {:.1} > {:.1}", g.rho, g.rho_lower_bound))
        .collect();
    outcome(each && increasing, format!("{} (disjoint: {each}, increasing: {increasing})", text.join("; ")))
}

fn image_fourth(m: &LadderModel) -> Outcome {
    let t: f64 = 1e5;
    let u = t.powf(SIXTH_EXPONENT + 2.0 * EPS);
    let tol = Tolerance::rel(TOL);
    match (image_fourth_check(m, t, u, tol), transform_identity_check(m, TransformKind::AbsZ4, t, u, tol)) {
        (Ok(img), Ok(hat)) => {
            let diff = (hat.lhs - 2.0 * img.numeric).abs();
            let allowed = hat.lhs_err + 2.0 * img.quad_err;
            outcome(
                in_band(img.ratio, (0.6, 1.6)) && diff <= allowed,
                format!(
                    "ratio {:.4}; |hat - 2·image| = {diff:.2e} within quadrature error {allowed:.2e}",
                    img.ratio
                ),
            )
        }
        (a, b) => outcome(false, format!("error: {:?} {:?}", a.err(), b.err())),
    }
}

fn main_correlation(reports: &[Result<CorrelationReport, String>]) -> Outcome {
    println!("    trend       T          U            lhs            rhs    ratio    wall");
    for r in reports.iter().flatten() {
        println!(
            "    trend {:>9.0e} {:>10.1} {:>14.6e} {:>14.6e} {:>8.4} {:>6.1}s",
            r.spec.t, r.spec.u, r.lhs, r.rhs, r.ratio, r.wall_time
        );
    }
    match &reports[1] {
        Ok(r) => {
            let slow = reports[2].as_ref().is_ok_and(|r| r.wall_time > 1800.0);
            outcome(
                in_band(r.ratio, (0.5, 2.0)) && !slow,
                format!("ratio {:.4} at T = 1e5, U = T^(7/8+2ε)", r.ratio),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn auto_correlation(m: &LadderModel) -> Outcome {
    match correlation4(m, 1e6, EPS, FOURTH_EXPONENT, Tolerance::rel(TOL)) {
        Ok(r) => outcome(in_band(r.ratio, (0.4, 2.5)), format!("ratio {:.4} at T = 1e6", r.ratio)),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn mean_value_and_prediction(reports: &[Result<CorrelationReport, String>]) -> Outcome {
    let (r5, r6) = match (&reports[1], &reports[2]) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return outcome(false, "correlation runs failed".into()),
    };
    let mut pass = true;
    let mut worst_mean: f64 = 0.0;
    for r in reports.iter().flatten() {
        match &r.mean_value {
            Some(mv) if mv.crossing => {
                let rel = (mv.g_alpha - mv.mean).abs() / mv.mean;
                worst_mean = worst_mean.max(rel);
                pass &= rel <= MEAN_VALUE_REL;
            }
            _ => pass = false,
        }
    }
    let residual = r5.prediction_residual.unwrap_or(f64::NAN);
    let shift = r6.prediction.as_ref().map_or(f64::NAN, |p| p.shift_ratio);
    pass &= in_band(residual, (-0.35, 0.45)) && in_band(shift, (0.8, 1.25));
    outcome(
        pass,
        format!(
            "max |g(α) - mean|/mean {worst_mean:.1e}; residual {residual:.4} at 1e5; shift ratio {shift:.4} at 1e6"
        ),
    )
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut notes = Vec::new();

    // linearity and additivity of the quadrature
    let mut quad_ok = true;
    for _ in 0..20 {
        let (p, q): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let a = rng.gen_range(0.0..5.0);
        let b = a + rng.gen_range(0.5..20.0);
        let c = rng.gen_range(a..b);
        let f = |x: f64| (1.7 * x).sin() + 0.1 * x;
        let g = |x: f64| (-(x - a) / 4.0).exp();
        // |f| ≤ 1 + 0.1 b and 0 < g ≤ 1 on [a, b]
        let scale = 1.0 + (b - a) * (p.abs() * (1.0 + 0.1 * b) + q.abs());
        let tol = Tolerance::abs(1e-12 * scale);
        let i = |h: &(dyn Fn(f64) -> f64 + Sync), l, r| integrate(h, l, r, tol).map(|e| e.value).unwrap_or(f64::NAN);
        let lin = i(&|x| p * f(x) + q * g(x), a, b);
        let sep = p * i(&f, a, b) + q * i(&g, a, b);
        let add = i(&f, a, c) + i(&f, c, b);
        quad_ok &= (lin - sep).abs() <= 1e-11 * scale && (add - i(&f, a, b)).abs() <= 1e-11 * scale;
    }
    notes.push(format!("quadrature {quad_ok}"));

    // monotone φ and positive defect along a small ladder
    let model = LadderModel::numeric(5000.0);
    let (mono, defect_pos, cache_ok) = match &model {
        Ok(m) => {
            let mut ts: Vec<f64> = (0..200).map(|_| rng.gen_range(100.0..5000.0)).collect();
            ts.sort_by(f64::total_cmp);
            let phis: Vec<f64> = ts.iter().map(|&t| m.ladder_phi(t).map_or(f64::NAN, |p| p.phi)).collect();
            let mono = phis.windows(2).all(|w| w[1] > w[0]);
            let pos = ts
                .iter()
                .filter(|&&t| t >= 1000.0)
                .all(|&t| m.ladder_defect(t).is_ok_and(|d| d.defect > 0.0));
            let text = m.to_cache_string();
            let cache_ok = LadderModel::from_cache_str(&text).is_ok_and(|back| {
                let (g0, g1) = (m.hl_grid.as_ref().unwrap(), back.hl_grid.as_ref().unwrap());
                back.to_cache_string() == text
                    && back.head_constant.to_bits() == m.head_constant.to_bits()
                    && g0.prefix.len() == g1.prefix.len()
                    && g0.prefix.iter().zip(&g1.prefix).all(|(x, y)| x.to_bits() == y.to_bits())
            });
            (mono, pos, cache_ok)
        }
        Err(_) => (false, false, false),
    };
    notes.push(format!("φ monotone {mono}, defect > 0 {defect_pos}, cache round trip {cache_ok}"));

    // single- and multi-threaded reductions agree bit for bit
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| integrate(|x| z_value(x).powi(2), 1e3, 3e3, Tolerance::rel(1e-10)))
            .map(|e| (e.value.to_bits(), e.err_est.to_bits()))
    };
    let det = matches!((run(1), run(4)), (Ok(a), Ok(b)) if a == b);
    notes.push(format!("thread bit-identity {det}"));

    outcome(quad_ok && mono && defect_pos && cache_ok && det, notes.join(", "))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |id, name, o: Outcome| {
        println!("{} [{id:>2}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    record(1, "evaluator oracle equivalence", oracle_equivalence());

    let t_end = HEIGHTS[2] + HEIGHTS[2].powf(SIXTH_EXPONENT + 2.0 * EPS);
    let path = cache_file();
    let built = Instant::now();
    let model = match LadderModel::load_or_build(Some(&path), LadderMode::NumericHl, extent_for(t_end)) {
        Ok(m) => m,
        Err(e) => {
            println!("FAIL ladder construction: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!(
        "     ladder to {:.4e} ready in {:.1}s ({})",
        model.t_max,
        built.elapsed().as_secs_f64(),
        path.display()
    );

    record(2, "substitution identity", substitution_identity(&model));
    record(3, "windowed second moment", second_moment());
    record(4, "ladder slope", ladder_slope(&model));
    record(5, "ladder defect", ladder_defect(&model));
    record(6, "segment geometry", geometry(&model));
    record(7, "image fourth moment", image_fourth(&model));

    let reports: Vec<Result<CorrelationReport, String>> = HEIGHTS
        .iter()
        .map(|&t| correlation6(&model, t, EPS, SIXTH_EXPONENT, Tolerance::rel(TOL)).map_err(|e| e.to_string()))
        .collect();
    record(8, "main correlation", main_correlation(&reports));
    record(9, "auto-correlation", auto_correlation(&model));
    record(10, "mean-value point and prediction", mean_value_and_prediction(&reports));
    record(11, "property suites", property_suites());

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
