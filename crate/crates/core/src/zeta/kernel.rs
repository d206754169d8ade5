//! Inner loop of the Riemann–Siegel main sum, `Σ wₙ cos(θ − t ln n)`.
//!
//! The cosine is computed inline (Cody–Waite reduction by π followed by a
//! degree-24 even polynomial) so that the loop vectorizes. The same scalar
//! code is compiled twice, once with AVX2 enabled, and picked at runtime;
//! neither variant contracts to FMA, so both produce bit-identical sums.

use std::sync::OnceLock;

const MAGIC: f64 = 6_755_399_441_055_744.0; // 1.5 · 2^52
const INV_PI: f64 = std::f64::consts::FRAC_1_PI;
// π split so that k·PI_A and k·PI_B are exact for |k| < 2^26.
const PI_A: f64 = 3.141_592_651_605_606;
const PI_B: f64 = 1.984_187_147_918_703_4e-9;
const PI_C: f64 = 1.144_237_745_221_966_4e-17;

const COS_COEFFS: [f64; 12] = [
    -0.5,
    0.041_666_666_666_666_664,
    -0.001_388_888_888_888_889,
    2.480_158_730_158_73e-5,
    -2.755_731_922_398_589e-7,
    2.087_675_698_786_81e-9,
    -1.147_074_559_772_972_5e-11,
    4.779_477_332_387_385e-14,
    -1.561_920_696_858_622_5e-16,
    4.110_317_623_312_165e-19,
    -8.896_791_392_450_574e-22,
    1.611_737_571_096_118_4e-24,
];

/// Largest phase magnitude for which the reduction above stays exact.
pub(crate) const MAX_PHASE: f64 = 2.0e8;

#[inline(always)]
fn cos_reduced(x: f64) -> f64 {
    let y = x * INV_PI + MAGIC;
    let k = y - MAGIC;
    let parity = y.to_bits() << 63;
    let r = ((x - k * PI_A) - k * PI_B) - k * PI_C;
    let r2 = r * r;
    let mut p = COS_COEFFS[11];
    for &c in COS_COEFFS[..11].iter().rev() {
        p = p * r2 + c;
    }
    let c = 1.0 + r2 * p;
    f64::from_bits(c.to_bits() ^ parity)
}

#[inline(always)]
fn cos_sum_generic(theta: f64, t: f64, ln_n: &[f64], w: &[f64]) -> f64 {
    const LANES: usize = 8;
    debug_assert_eq!(ln_n.len(), w.len());
    let mut acc = [0.0f64; LANES];
    let split = ln_n.len() / LANES * LANES;
    for (lc, wc) in ln_n[..split]
        .chunks_exact(LANES)
        .zip(w[..split].chunks_exact(LANES))
    {
        for j in 0..LANES {
            acc[j] += wc[j] * cos_reduced(theta - t * lc[j]);
        }
    }
    let mut tail = 0.0;
    for (l, wn) in ln_n[split..].iter().zip(&w[split..]) {
        tail += wn * cos_reduced(theta - t * l);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn cos_sum_avx2(theta: f64, t: f64, ln_n: &[f64], w: &[f64]) -> f64 {
    cos_sum_generic(theta, t, ln_n, w)
}

fn has_avx2() -> bool {
    static DETECTED: OnceLock<bool> = OnceLock::new();
    *DETECTED.get_or_init(|| {
        #[cfg(target_arch = "x86_64")]
        {
            std::is_x86_feature_detected!("avx2")
        }
        #[cfg(not(target_arch = "x86_64"))]
        {
            false
        }
    })
}

/// `Σ w[i]·cos(θ − t·ln_n[i])`.
pub(crate) fn cos_sum(theta: f64, t: f64, ln_n: &[f64], w: &[f64]) -> f64 {
    debug_assert!(t * ln_n.last().copied().unwrap_or(0.0) + theta.abs() < MAX_PHASE);
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: the CPU supports AVX2, checked at runtime above.
        return unsafe { cos_sum_avx2(theta, t, ln_n, w) };
    }
    cos_sum_generic(theta, t, ln_n, w)
}

/// Scalar-path variant, exposed so tests can compare both dispatch arms.
#[cfg(test)]
pub(crate) fn cos_sum_portable(theta: f64, t: f64, ln_n: &[f64], w: &[f64]) -> f64 {
    cos_sum_generic(theta, t, ln_n, w)
}
