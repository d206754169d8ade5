use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use zll_core::quadrature::{cumulative_grid, integrate};
use zll_core::zeta::z_value;
use zll_core::{em_zeta_half, rs_theta, LadderModel, Tolerance};

fn model() -> &'static LadderModel {
    static M: OnceLock<LadderModel> = OnceLock::new();
    M.get_or_init(|| LadderModel::numeric(4000.0).unwrap())
}

/// `∫ f` to `1e-12·scale`, where `scale` bounds `∫ |f|`.
fn quad<F: Fn(f64) -> f64 + Sync>(f: F, a: f64, b: f64, scale: f64) -> f64 {
    integrate(f, a, b, Tolerance::abs(1e-12 * scale)).unwrap().value
}

fn f(x: f64) -> f64 {
    (1.3 * x).cos() * (1.0 + 0.05 * x)
}

/// Bound on `|f|` over `[a, b]`.
fn f_bound(a: f64, b: f64) -> f64 {
    1.0 + 0.05 * a.abs().max(b.abs())
}

fn g(x: f64) -> f64 {
    1.0 / (1.0 + 0.1 * x * x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_is_linear(p in -5.0f64..5.0, q in -5.0f64..5.0, a in -10.0f64..10.0, w in 0.1f64..30.0) {
        let b = a + w;
        let scale = 1.0 + w * (p.abs() * f_bound(a, b) + q.abs());
        let lhs = quad(|x| p * f(x) + q * g(x), a, b, scale);
        let rhs = p * quad(f, a, b, scale) + q * quad(g, a, b, scale);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn quadrature_is_additive(a in -10.0f64..10.0, w in 0.1f64..30.0, s in 0.01f64..0.99) {
        let (b, c) = (a + w, a + s * w);
        let scale = 1.0 + w * f_bound(a, b);
        let whole = quad(f, a, b, scale);
        let parts = quad(f, a, c, scale) + quad(f, c, b, scale);
        prop_assert!((whole - parts).abs() <= 1e-11 * scale);
    }

    #[test]
    fn phi_is_increasing(t in 100.0f64..3990.0, d in 1e-3f64..10.0) {
        let m = model();
        let lo = m.ladder_phi(t).unwrap();
        let hi = m.ladder_phi(t + d).unwrap();
        prop_assert!(hi.phi > lo.phi);
        prop_assert!(lo.z_hat_sq >= 0.0);
    }

    #[test]
    fn defect_is_positive(t in 100.0f64..4000.0) {
        let d = model().ladder_defect(t).unwrap();
        prop_assert!(d.defect > 0.0, "{d:?}");
        prop_assert!(d.reference > 0.0);
    }

    #[test]
    fn reduction_ignores_thread_count(a in 1000.0f64..2000.0, w in 10.0f64..500.0, threads in 2usize..6) {
        let run = |n| {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| {
                integrate(|x| z_value(x).powi(2), a, a + w, Tolerance::rel(1e-9)).unwrap()
            })
        };
        let (one, many) = (run(1), run(threads));
        prop_assert_eq!(one.value.to_bits(), many.value.to_bits());
        prop_assert_eq!(one.err_est.to_bits(), many.err_est.to_bits());
    }
}

#[test]
fn cache_round_trip_is_bit_exact() {
    use rand::{Rng, SeedableRng};
    let m = model();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ladder.cache");
    m.write_cache(&path).unwrap();
    let back = LadderModel::read_cache(&path).unwrap();
    assert_eq!(back.to_cache_string(), m.to_cache_string());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let t = rng.gen_range(100.0..4000.0);
        let (x, y) = (m.ladder_phi(t).unwrap(), back.ladder_phi(t).unwrap());
        assert_eq!(x.phi.to_bits(), y.phi.to_bits(), "t = {t}");
        assert_eq!(x.z_hat_sq.to_bits(), y.z_hat_sq.to_bits());
    }
    // a cache reaching further is reused for a shorter request
    let reused = LadderModel::load_or_build(Some(&path), zll_core::LadderMode::NumericHl, 2000.0).unwrap();
    assert_eq!(reused.t_max, m.t_max);
}

#[test]
fn corrupt_cache_is_rejected() {
    let text = model().to_cache_string();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(5, 6);
    assert!(LadderModel::from_cache_str(&lines.join("\n")).is_err());
    assert!(LadderModel::from_cache_str("not a cache\n").is_err());
}

/// `Z` from the reference evaluator: `e^{iθ} ζ(1/2 + it)` is real.
fn oracle_z(t: f64) -> f64 {
    let theta = rs_theta(t).unwrap();
    (Complex64::from_polar(1.0, theta) * em_zeta_half(t).unwrap()).re
}

#[test]
fn twenty_nine_sign_changes_below_100() {
    let grid: Vec<f64> = (0..=1800).map(|i| 10.0 + 0.05 * i as f64).collect();
    let count = |z: &dyn Fn(f64) -> f64| {
        let v: Vec<f64> = grid.iter().map(|&t| z(t)).collect();
        v.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
    };
    assert_eq!(count(&z_value), 29);
    assert_eq!(count(&oracle_z), 29);
}

#[test]
fn cumulative_grid_matches_one_shot_integral() {
    let grid = cumulative_grid(|x| z_value(x).powi(2), 10.0, 1e4, 0.25).unwrap();
    let total = *grid.prefix.last().unwrap();
    let direct = integrate(|x| z_value(x).powi(2), 10.0, 1e4, Tolerance::rel(1e-11)).unwrap();
    assert!(((total - direct.value) / direct.value).abs() <= 1e-9, "{total} vs {}", direct.value);
}
