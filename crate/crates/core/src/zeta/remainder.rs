//! Riemann–Siegel correction terms `C₀ … C₄`.
//!
//! Each `Cₖ` is a fixed linear combination of derivatives of
//! `Ψ(p) = cos 2π(p² − p − 1/16) / cos 2πp`. Writing `p = (1 + z)/2` gives
//! `Ψ = −cos(πz²/2 − 5π/8) / cos πz`, an even entire function of `z`. Its
//! Taylor coefficients are read off once from a trapezoidal Cauchy integral
//! on `|z| = 2`, after which every `Cₖ` is a plain polynomial in `z` and the
//! removable singularities of the quotient never have to be evaluated.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const SAMPLES: usize = 256;
const RADIUS: f64 = 2.0;
const TAYLOR_LEN: usize = 72;
const TERMS: usize = 5;

struct CorrectionPolys {
    /// Coefficients in `z²`; `Cₖ(z) = z^parity[k] · Σ coeffs[k][j] z^{2j}`.
    coeffs: [Vec<f64>; TERMS],
    parity: [bool; TERMS],
}

fn psi(z: Complex64) -> Complex64 {
    let num = (z * z * (PI / 2.0) - 5.0 * PI / 8.0).cos();
    let den = (z * PI).cos();
    -num / den
}

fn taylor_coeffs() -> Vec<f64> {
    let samples: Vec<Complex64> = (0..SAMPLES)
        .map(|j| psi(Complex64::from_polar(RADIUS, 2.0 * PI * j as f64 / SAMPLES as f64)))
        .collect();
    (0..TAYLOR_LEN)
        .map(|m| {
            if m % 2 == 1 {
                return 0.0;
            }
            let s: f64 = samples
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let angle = -2.0 * PI * ((j * m) % SAMPLES) as f64 / SAMPLES as f64;
                    (v * Complex64::from_polar(1.0, angle)).re
                })
                .sum();
            s / SAMPLES as f64 / RADIUS.powi(m as i32)
        })
        .collect()
}

/// `(derivative order, weight)` pairs defining `C₀ … C₄` in terms of `Ψ⁽ᵈ⁾(p)`.
fn weights() -> [Vec<(usize, f64)>; TERMS] {
    let p2 = PI * PI;
    let p4 = p2 * p2;
    let p6 = p4 * p2;
    let p8 = p4 * p4;
    [
        vec![(0, 1.0)],
        vec![(3, -1.0 / (96.0 * p2))],
        vec![(2, 1.0 / (64.0 * p2)), (6, 1.0 / (18_432.0 * p4))],
        vec![
            (1, -1.0 / (64.0 * p2)),
            (5, -1.0 / (3_840.0 * p4)),
            (9, -1.0 / (5_308_416.0 * p6)),
        ],
        vec![
            (0, 1.0 / (128.0 * p2)),
            (4, 19.0 / (24_576.0 * p4)),
            (8, 11.0 / (5_898_240.0 * p6)),
            (12, 1.0 / (2_038_431_744.0 * p8)),
        ],
    ]
}

fn build() -> CorrectionPolys {
    let a = taylor_coeffs();
    let degree = TAYLOR_LEN - 12;
    let mut coeffs: [Vec<f64>; TERMS] = Default::default();
    let mut parity = [false; TERMS];
    for (k, terms) in weights().iter().enumerate() {
        let mut poly = vec![0.0; degree];
        for &(d, c) in terms {
            // Ψ⁽ᵈ⁾(p) = 2ᵈ Σᵢ a_{i+d} (i+d)!/i! zⁱ
            let scale = c * 2f64.powi(d as i32);
            for (i, slot) in poly.iter_mut().enumerate() {
                let falling: f64 = (i + 1..=i + d).map(|v| v as f64).product();
                *slot += scale * a[i + d] * falling;
            }
        }
        let odd = terms[0].0 % 2 == 1;
        let mut reduced: Vec<f64> = poly.iter().skip(odd as usize).step_by(2).copied().collect();
        while reduced.len() > 1 && reduced.last().is_some_and(|c| c.abs() < 1e-24) {
            reduced.pop();
        }
        coeffs[k] = reduced;
        parity[k] = odd;
    }
    CorrectionPolys { coeffs, parity }
}

fn polys() -> &'static CorrectionPolys {
    static POLYS: OnceLock<CorrectionPolys> = OnceLock::new();
    POLYS.get_or_init(build)
}

/// `Cₖ(p)` for `k = 0..5`, `p ∈ [0, 1)`.
pub(crate) fn correction_coeffs(p: f64) -> [f64; TERMS] {
    let z = 2.0 * p - 1.0;
    let z2 = z * z;
    let polys = polys();
    let mut out = [0.0; TERMS];
    for (k, slot) in out.iter_mut().enumerate() {
        let c = &polys.coeffs[k];
        let mut acc = 0.0;
        for &v in c.iter().rev() {
            acc = acc * z2 + v;
        }
        *slot = if polys.parity[k] { acc * z } else { acc };
    }
    out
}

/// Riemann–Siegel remainder `(−1)^{N−1} (t/2π)^{−1/4} Σₖ Cₖ(p) (t/2π)^{−k/2}`.
pub(crate) fn rs_remainder(a: f64, n: u64) -> f64 {
    let p = a - n as f64;
    let c = correction_coeffs(p);
    let u = a.recip();
    let series = c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * c[4])));
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * series / a.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_coefficient_matches_direct_quotient() {
        for &p in &[0.0, 0.1, 0.3, 0.5, 0.6, 0.9, 0.99] {
            let direct = (2.0 * PI * (p * p - p - 1.0 / 16.0)).cos() / (2.0 * PI * p).cos();
            let c0 = correction_coeffs(p)[0];
            assert!((c0 - direct).abs() < 1e-13, "p = {p}: {c0} vs {direct}");
        }
        // removable singularity at p = 1/4: the series is smooth through it
        let left = correction_coeffs(0.25 - 1e-9)[0];
        let right = correction_coeffs(0.25 + 1e-9)[0];
        assert!((left - right).abs() < 1e-8);
        assert!((correction_coeffs(0.5)[0] - 0.382_683_432_365_089_8).abs() < 1e-15);
    }

    #[test]
    fn third_derivative_weight_against_finite_differences() {
        // C₁ = −Ψ'''(p)/(96π²); compare with a central difference of C₀.
        let h = 1e-3;
        for &p in &[0.2, 0.45, 0.7] {
            let f = |x: f64| correction_coeffs(x)[0];
            let d3 = (f(p + 2.0 * h) - 2.0 * f(p + h) + 2.0 * f(p - h) - f(p - 2.0 * h)) / (2.0 * h * h * h);
            let c1 = -d3 / (96.0 * PI * PI);
            assert!((c1 - correction_coeffs(p)[1]).abs() < 1e-6, "p = {p}");
        }
    }
}
