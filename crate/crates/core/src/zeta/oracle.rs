//! Slow multiple-precision reference evaluators.
//!
//! [`em_zeta_half`] sums `ζ(1/2 + it)` by Euler–Maclaurin summation in
//! 160-bit arithmetic; [`theta_oracle`] computes `θ(t)` from the complex
//! log-Gamma function. Neither shares code with the Riemann–Siegel path.

use std::sync::OnceLock;

use astro_float::BigFloat;
use num_complex::Complex64;

use super::mp::{to_f64, Cx, Mp};
use crate::error::{Error, Result};

/// Working precision in bits (about 48 significant decimal digits).
pub const ORACLE_BITS: usize = 160;
/// Absolute error bound the Euler–Maclaurin evaluation must certify.
pub const ORACLE_TARGET: f64 = 1e-20;
/// Largest `|t|` accepted by [`em_zeta_half`].
pub const ORACLE_T_MAX: f64 = 1e6;

/// Euler–Maclaurin correction terms used.
const EM_TERMS: usize = 130;
/// Ratio `|s + 2K| / (2πN)` the cut-off `N` is chosen for.
const EM_RATIO: f64 = 0.8;

/// `B₂ₖ/(2k)!` for `k = 0..=EM_TERMS + 1`, from the series identity
/// `cosh(x/2) = (x/2)coth(x/2) · sinh(x/2)/(x/2)`.
fn bernoulli_ratios() -> &'static [BigFloat] {
    static TABLE: OnceLock<Vec<BigFloat>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let m = Mp::new(ORACLE_BITS + 64);
        let kmax = EM_TERMS + 2;
        // h[j] = (1/2)^{2j}/(2j)!, s[j] = (1/2)^{2j}/(2j+1)!
        let mut h = Vec::with_capacity(kmax);
        let mut s = Vec::with_capacity(kmax);
        let mut quarter_pow = m.u(1);
        let mut fact = m.u(1); // (2j)!
        let quarter = m.div(&m.u(1), &m.u(4));
        for j in 0..kmax {
            if j > 0 {
                quarter_pow = m.mul(&quarter_pow, &quarter);
                fact = m.mul(&fact, &m.u((2 * j * (2 * j - 1)) as u64));
            }
            let hj = m.div(&quarter_pow, &fact);
            s.push(m.div(&hj, &m.u(2 * j as u64 + 1)));
            h.push(hj);
        }
        let mut c: Vec<BigFloat> = Vec::with_capacity(kmax);
        for k in 0..kmax {
            let mut acc = h[k].clone();
            for j in 0..k {
                acc = m.sub(&acc, &m.mul(&c[j], &s[k - j]));
            }
            c.push(acc);
        }
        c
    })
}

/// Smallest-prime-factor table for `0..=n`.
fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

fn prime_power(m: &Mp, p: u64, t: &BigFloat) -> Cx {
    let lp = m.ln(&m.u(p));
    let half = m.div(&lp, &m.u(2));
    let mag = m.exp(&half.neg());
    let angle = m.mul(t, &lp);
    let angle = m.reduce_two_pi(&angle);
    let re = m.mul(&mag, &m.cos(&angle));
    let im = m.mul(&mag, &m.sin(&angle)).neg();
    Cx::new(re, im)
}

/// `ζ(1/2 + it)` by Euler–Maclaurin summation.
///
/// The cut-off `N` and the number of correction terms are chosen so the
/// truncation bound `|T_{K+1}|·|s + 2K + 1|/(σ + 2K + 1)` plus a rounding
/// allowance stays below [`ORACLE_TARGET`]; otherwise a precision error is
/// returned.
pub fn em_zeta_half(t: f64) -> Result<Complex64> {
    if !t.is_finite() || t.abs() > ORACLE_T_MAX {
        return Err(Error::Range {
            what: "oracle height",
            value: t,
            lo: -ORACLE_T_MAX,
            hi: ORACLE_T_MAX,
        });
    }
    let m = Mp::new(ORACLE_BITS);
    let k_terms = EM_TERMS;
    let n_cut = ((t.abs() + 2.0 * k_terms as f64 + 2.0) / (std::f64::consts::TAU * EM_RATIO))
        .ceil()
        .max(16.0) as usize;

    let tb = m.f(t);
    let s = Cx::new(m.div(&m.u(1), &m.u(2)), tb.clone());

    // n^{-s} for n = 1..=N, multiplicatively from prime powers
    let spf = spf_table(n_cut);
    let mut powers: Vec<Cx> = Vec::with_capacity(n_cut + 1);
    powers.push(Cx::new(m.u(0), m.u(0)));
    powers.push(Cx::new(m.u(1), m.u(0)));
    for n in 2..=n_cut {
        let p = spf[n] as usize;
        let v = if p == n {
            prime_power(&m, n as u64, &tb)
        } else {
            powers[p].mul(&powers[n / p], &m)
        };
        powers.push(v);
    }

    let mut sum = Cx::new(m.u(0), m.u(0));
    for v in &powers[1..n_cut] {
        sum = sum.add(v, &m);
    }
    let n_big = m.u(n_cut as u64);
    let pn = &powers[n_cut];
    // N^{1-s}/(s-1) + N^{-s}/2
    let s_minus_one = Cx::new(m.sub(&s.re, &m.u(1)), s.im.clone());
    sum = sum.add(&pn.scale(&n_big, &m).div(&s_minus_one, &m), &m);
    sum = sum.add(&pn.scale(&m.div(&m.u(1), &m.u(2)), &m), &m);

    // Σ_k B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let c = bernoulli_ratios();
    let inv_n = m.div(&m.u(1), &n_big);
    let inv_n2 = m.mul(&inv_n, &inv_n);
    let mut rising = s.mul(pn, &m).scale(&inv_n, &m);
    for (k, ck) in c.iter().enumerate().take(k_terms + 1).skip(1) {
        sum = sum.add(&rising.scale(ck, &m), &m);
        let a = Cx::new(m.add(&s.re, &m.u(2 * k as u64 - 1)), s.im.clone());
        let b = Cx::new(m.add(&s.re, &m.u(2 * k as u64)), s.im.clone());
        rising = rising.mul(&a, &m).mul(&b, &m).scale(&inv_n2, &m);
    }
    let next = to_f64(&c[k_terms + 1]).abs() * rising.abs_f64();
    let sigma_term = 0.5 + 2.0 * k_terms as f64 + 1.0;
    let truncation = next * (0.5f64.hypot(t) + 2.0 * k_terms as f64 + 1.0) / sigma_term;
    // phase arguments t ln n lose log10(t ln N) digits before reduction
    let rounding = 2.0 * (n_cut as f64).sqrt()
        * (t.abs() * (n_cut as f64).ln()).max(1.0)
        * 2f64.powi(-(ORACLE_BITS as i32) + 8);
    let estimate = truncation + rounding;
    if estimate > ORACLE_TARGET {
        return Err(Error::Precision {
            estimate,
            target: ORACLE_TARGET,
        });
    }
    Ok(Complex64::new(to_f64(&sum.re), to_f64(&sum.im)))
}

/// `θ(t) = Im log Γ(1/4 + it/2) − (t/2) ln π`, via Stirling's series after
/// shifting the argument to `|w| ≥ 40`.
pub fn theta_oracle(t: f64) -> f64 {
    let m = Mp::new(ORACLE_BITS);
    to_f64(&theta_mp(&m, t))
}

fn theta_mp(m: &Mp, t: f64) -> BigFloat {
    let shift = (40.0 - 0.5 * t.abs()).max(0.0).ceil() as u64;
    let x0 = m.div(&m.u(1), &m.u(4));
    let y = m.div(&m.f(t), &m.u(2));
    // arg of the factors Γ(z+k) = (z+k)Γ... removed by the shift
    let mut arg_sum = m.u(0);
    for k in 0..shift {
        let re = m.add(&x0, &m.u(k));
        let q = m.div(&y, &re);
        arg_sum = m.add(&arg_sum, &m.atan(&q));
    }
    let wr = m.add(&x0, &m.u(shift));
    let w = Cx::new(wr.clone(), y.clone());
    let modulus_sq = m.add(&m.mul(&wr, &wr), &m.mul(&y, &y));
    let ln_mod = m.div(&m.ln(&modulus_sq), &m.u(2));
    let arg_w = m.atan(&m.div(&y, &wr));
    // Im[(w − 1/2) ln w − w] = (wr − 1/2) arg w + y ln|w| − y
    let half = m.div(&m.u(1), &m.u(2));
    let mut im = m.add(&m.mul(&m.sub(&wr, &half), &arg_w), &m.mul(&y, &ln_mod));
    im = m.sub(&im, &y);
    // Σ_j B_{2j} / (2j(2j−1) w^{2j−1})
    let c = bernoulli_ratios();
    let one = Cx::new(m.u(1), m.u(0));
    let inv_w = one.div(&w, m);
    let inv_w2 = inv_w.mul(&inv_w, m);
    let mut pow = inv_w;
    let mut fact = m.u(2); // (2j)!
    for j in 1..=30u64 {
        if j > 1 {
            fact = m.mul(&fact, &m.u((2 * j) * (2 * j - 1)));
        }
        // B_{2j} = c_j (2j)!
        let b = m.mul(&c[j as usize], &fact);
        let coef = m.div(&b, &m.u((2 * j) * (2 * j - 1)));
        im = m.add(&im, &m.mul(&coef, &pow.im));
        pow = pow.mul(&inv_w2, m);
    }
    let pi = m.pi();
    let ln_pi = m.ln(&pi);
    let log_gamma_im = m.sub(&im, &arg_sum);
    m.sub(&log_gamma_im, &m.mul(&y, &ln_pi))
}

/// `Z(t) = Re(e^{iθ(t)} ζ(1/2 + it))` from the two reference evaluators.
pub fn z_oracle(t: f64) -> Result<f64> {
    let zeta = em_zeta_half(t)?;
    let m = Mp::new(ORACLE_BITS);
    let theta = theta_mp(&m, t);
    let theta = m.reduce_two_pi(&theta);
    let th = to_f64(&theta);
    Ok(th.cos() * zeta.re - th.sin() * zeta.im)
}
