//! Gauss–Legendre panel quadrature for integrands built from `Z(t)`.
//!
//! Panels are laid out a priori from the local zero gap `2π/ln(t/2π)` of
//! `Z`, each integrated with a 16-point rule. Adjacent panels are evaluated in
//! pairs: the two 16-point results are compared against one 16-point rule on
//! their union, which gives the error estimate. Panel results are reduced in
//! fixed index order by pairwise summation, so the outcome does not depend on
//! the number of worker threads.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ORDER: usize = 16;
/// Panels per block handed to the thread pool.
const BLOCK: usize = 10_000;
const DEFAULT_MAX_DEPTH: u32 = 6;

/// Result of one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Absolute error estimate, `≥ 0`.
    pub err_est: f64,
    pub panels: usize,
    pub evals: usize,
}

/// Absolute and relative error target; the effective bound is the larger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn rel(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub fn bound(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }

    fn is_valid(&self) -> bool {
        self.abs >= 0.0 && self.rel >= 0.0 && (self.abs > 0.0 || self.rel > 0.0)
    }
}

impl From<f64> for Tolerance {
    fn from(abs: f64) -> Self {
        Tolerance::abs(abs)
    }
}

/// Where panel boundaries go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelPolicy {
    /// Width `κ·2π/ln(|t|/2π)` (with the logarithm floored at 1).
    ZeroGap { kappa: f64 },
    /// Constant width.
    Fixed(f64),
}

impl Default for PanelPolicy {
    fn default() -> Self {
        PanelPolicy::ZeroGap { kappa: 0.5 }
    }
}

impl PanelPolicy {
    pub fn width_at(&self, t: f64) -> f64 {
        match *self {
            PanelPolicy::ZeroGap { kappa } => kappa * zero_gap(t),
            PanelPolicy::Fixed(w) => w,
        }
    }
}

/// Mean spacing of the zeros of `Z` near height `t`.
pub fn zero_gap(t: f64) -> f64 {
    std::f64::consts::TAU / (t.abs() / std::f64::consts::TAU).ln().max(1.0)
}

/// 16-point Gauss–Legendre rule on `[−1, 1]` plus its indefinite-integration
/// matrix: `Σₖ integ[j][k]·f(xₖ) ≈ ∫_{−1}^{xⱼ} f`.
pub struct GaussLegendre {
    pub nodes: [f64; ORDER],
    pub weights: [f64; ORDER],
    pub integ: [[f64; ORDER]; ORDER],
}

/// `(P₀(x), …, P_{n}(x))`.
fn legendre_all(x: f64, n: usize) -> Vec<f64> {
    let mut p = vec![1.0, x];
    for m in 1..n {
        let next = ((2 * m + 1) as f64 * x * p[m] - m as f64 * p[m - 1]) / (m + 1) as f64;
        p.push(next);
    }
    p.truncate(n + 1);
    p
}

fn build_rule() -> GaussLegendre {
    let n = ORDER;
    let mut nodes = [0.0; ORDER];
    let mut weights = [0.0; ORDER];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let p = legendre_all(x, n);
            let dp = n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0);
            let dx = p[n] / dp;
            x -= dx;
            if dx.abs() < 1e-17 {
                break;
            }
        }
        let p = legendre_all(x, n);
        let dp = n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ∫_{−1}^{x} P_m = (P_{m+1}(x) − P_{m−1}(x))/(2m+1), Lagrange basis
    // ℓ_k = Σ_m (2m+1)/2 · w_k P_m(x_k) P_m.
    let mut integ = [[0.0; ORDER]; ORDER];
    let pk: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(x, n)).collect();
    for j in 0..n {
        let pj = &pk[j];
        for k in 0..n {
            let mut s = 0.5 * (nodes[j] + 1.0);
            for m in 1..n {
                s += 0.5 * pk[k][m] * (pj[m + 1] - pj[m - 1]);
            }
            integ[j][k] = weights[k] * s;
        }
    }
    GaussLegendre {
        nodes,
        weights,
        integ,
    }
}

pub fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(build_rule)
}

impl GaussLegendre {
    /// Nodes mapped to `[a, b]`.
    pub fn mapped_nodes(&self, a: f64, b: f64) -> [f64; ORDER] {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.map(|x| c + h * x)
    }

    /// `(∫ₐᵇ f, ∫ₐᵇ |f|)` from values at [`Self::mapped_nodes`].
    pub fn apply(&self, a: f64, b: f64, values: &[f64; ORDER]) -> (f64, f64) {
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        let mut abs = 0.0;
        for (w, v) in self.weights.iter().zip(values) {
            s += w * v;
            abs += w * v.abs();
        }
        (h * s, h * abs)
    }

    /// `∫ₐ^{xⱼ} f` at every mapped node `xⱼ`.
    pub fn partial_integrals(&self, a: f64, b: f64, values: &[f64; ORDER]) -> [f64; ORDER] {
        let h = 0.5 * (b - a);
        let mut out = [0.0; ORDER];
        for (o, row) in out.iter_mut().zip(&self.integ) {
            let mut s = 0.0;
            for (m, v) in row.iter().zip(values) {
                s += m * v;
            }
            *o = h * s;
        }
        out
    }

    /// Row `r` with `Σₖ rₖ·f(xₖ) ≈ ∫_{−1}^{u} f` for any `u ∈ [−1, 1]`.
    pub fn partial_row(&self, u: f64) -> [f64; ORDER] {
        let pu = legendre_all(u, ORDER);
        let mut row = [0.0; ORDER];
        for (k, r) in row.iter_mut().enumerate() {
            let pk = legendre_all(self.nodes[k], ORDER - 1);
            let mut s = 0.5 * (u + 1.0);
            for m in 1..ORDER {
                s += 0.5 * pk[m] * (pu[m + 1] - pu[m - 1]);
            }
            *r = self.weights[k] * s;
        }
        row
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> (f64, f64) {
        let vals = self.mapped_nodes(a, b).map(f);
        self.apply(a, b, &vals)
    }
}

/// Pairwise (cascade) summation; `O(log n)` rounding growth.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Summed output of a run of panels, with `K` integrand components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partial<const K: usize> {
    pub value: [f64; K],
    pub err: [f64; K],
    pub panels: usize,
    pub evals: usize,
}

impl<const K: usize> Partial<K> {
    pub fn zero() -> Self {
        Self {
            value: [0.0; K],
            err: [0.0; K],
            panels: 0,
            evals: 0,
        }
    }

    pub fn combine(a: &Self, b: &Self) -> Self {
        let mut out = *a;
        for k in 0..K {
            out.value[k] += b.value[k];
            out.err[k] += b.err[k];
        }
        out.panels += b.panels;
        out.evals += b.evals;
        out
    }
}

fn pairwise_partial<const K: usize>(xs: &[Partial<K>]) -> Partial<K> {
    match xs.len() {
        0 => Partial::zero(),
        1 => xs[0],
        n => {
            let mid = n / 2;
            Partial::combine(&pairwise_partial(&xs[..mid]), &pairwise_partial(&xs[mid..]))
        }
    }
}

/// Evaluates `count` independent units in parallel and reduces them in index
/// order. The tree shape depends only on `count`.
pub fn reduce_ordered<const K: usize, F>(count: usize, unit: F) -> Partial<K>
where
    F: Fn(usize) -> Partial<K> + Sync,
{
    let blocks: Vec<Partial<K>> = (0..count.div_ceil(BLOCK))
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(count);
            let parts: Vec<Partial<K>> = (lo..hi).into_par_iter().map(&unit).collect();
            pairwise_partial(&parts)
        })
        .collect();
    pairwise_partial(&blocks)
}

/// Ordered parallel map in blocks of [`BLOCK`].
pub fn map_ordered<T: Send, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync,
{
    let mut out = Vec::with_capacity(count);
    for b in 0..count.div_ceil(BLOCK) {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(count);
        let mut part: Vec<T> = (lo..hi).into_par_iter().map(&f).collect();
        out.append(&mut part);
    }
    out
}

/// Rounding allowance added to each panel-pair error estimate.
pub(crate) const ROUNDING_FLOOR: f64 = 16.0 * f64::EPSILON;

/// Panel boundaries covering `[a, b]` under `policy`, each base panel split
/// into `2^depth` equal parts.
pub fn panel_edges(a: f64, b: f64, policy: PanelPolicy, depth: u32) -> Vec<f64> {
    let mut base = vec![a];
    let mut x = a;
    while x < b {
        let w = policy.width_at(x);
        // width evaluated at the far end as well, since the gap shrinks with t
        let w = w.min(policy.width_at(x + w));
        let next = if x + w >= b - 1e-12 * w { b } else { x + w };
        base.push(next);
        x = next;
    }
    let split = 1usize << depth;
    let mut edges = Vec::with_capacity((base.len() - 1) * split + 1);
    edges.push(a);
    for pair in base.windows(2) {
        let (l, r) = (pair[0], pair[1]);
        for s in 1..split {
            edges.push(l + (r - l) * s as f64 / split as f64);
        }
        edges.push(r);
    }
    edges
}

/// Integrates `f` over the fine panels `[l, m]`, `[m, r]` and compares with
/// the rule on `[l, r]`.
fn pair_unit<F: Fn(f64) -> f64>(rule: &GaussLegendre, f: &F, l: f64, m: f64, r: f64) -> Partial<1> {
    let (v1, a1) = rule.integrate(f, l, m);
    let (v2, a2) = rule.integrate(f, m, r);
    let (vc, _) = rule.integrate(f, l, r);
    let fine = v1 + v2;
    Partial {
        value: [fine],
        err: [(fine - vc).abs() + ROUNDING_FLOOR * (a1 + a2)],
        panels: 2,
        evals: 3 * ORDER,
    }
}

/// Splits panel edges into units of two adjacent panels (the last unit may
/// consist of one panel bisected).
pub fn pair_units(edges: &[f64]) -> Vec<(f64, f64, f64)> {
    let panels = edges.len() - 1;
    let mut units = Vec::with_capacity(panels.div_ceil(2));
    let mut i = 0;
    while i + 2 <= panels {
        units.push((edges[i], edges[i + 1], edges[i + 2]));
        i += 2;
    }
    if i < panels {
        let (l, r) = (edges[i], edges[i + 1]);
        units.push((l, 0.5 * (l + r), r));
    }
    units
}

/// `∫ₐᵇ f` to within `tol`, using zero-gap panels.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: impl Into<Tolerance>) -> Result<IntegralEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_with(f, a, b, tol.into(), PanelPolicy::default(), DEFAULT_MAX_DEPTH)
}

pub fn integrate_with<F>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    policy: PanelPolicy,
    max_depth: u32,
) -> Result<IntegralEstimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Invalid(format!("integration bounds [{a}, {b}]")));
    }
    if !tol.is_valid() {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let rule = gauss_legendre();
    let mut depth = 0;
    let mut spent = 0;
    loop {
        let units = pair_units(&panel_edges(a, b, policy, depth));
        let part = reduce_ordered(units.len(), |i| {
            let (l, m, r) = units[i];
            pair_unit(rule, &f, l, m, r)
        });
        spent += part.evals;
        let (value, err) = (part.value[0], part.err[0]);
        if err <= tol.bound(value) {
            return Ok(IntegralEstimate {
                value,
                err_est: err,
                panels: part.panels,
                evals: spent,
            });
        }
        if depth >= max_depth {
            return Err(Error::NonConvergence {
                a,
                b,
                err,
                tol: tol.bound(value),
                depth,
            });
        }
        depth += 1;
    }
}

/// Prefix integrals `∫ₐ^{tᵢ} f` on the equispaced nodes `tᵢ = a + i·step`,
/// the last node clamped to `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeGrid {
    pub a: f64,
    pub b: f64,
    pub step: f64,
    pub prefix: Vec<f64>,
    pub err_est: f64,
}

impl CumulativeGrid {
    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.prefix.len() {
            self.b
        } else {
            self.a + i as f64 * self.step
        }
    }

    /// `(tᵢ, ∫ₐ^{tᵢ} f)` pairs.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.prefix.iter().enumerate().map(|(i, &v)| (self.node(i), v))
    }

    /// Index `i` of the cell `[tᵢ, tᵢ₊₁]` containing `t` (clamped to the grid).
    pub fn cell_of(&self, t: f64) -> usize {
        let i = ((t - self.a) / self.step).floor();
        let last_cell = self.prefix.len().saturating_sub(2);
        if i < 0.0 {
            0
        } else {
            (i as usize).min(last_cell)
        }
    }

    /// Node count for `[a, b]` at spacing `step`.
    pub fn node_count(a: f64, b: f64, step: f64) -> usize {
        let cells = ((b - a) / step * (1.0 - 1e-12)).ceil() as usize;
        cells.max(1) + 1
    }
}

/// Builds a [`CumulativeGrid`] of `f`; each cell is one quadrature panel.
pub fn cumulative_grid<F>(f: F, a: f64, b: f64, step: f64) -> Result<CumulativeGrid>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Invalid(format!("grid bounds [{a}, {b}]")));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Invalid(format!("grid step {step} outside (0, 1]")));
    }
    let n = CumulativeGrid::node_count(a, b, step);
    let node = |i: usize| if i + 1 == n { b } else { a + i as f64 * step };
    let edges: Vec<f64> = (0..n).map(node).collect();
    let rule = gauss_legendre();
    let units = pair_units(&edges);
    let cells: Vec<([f64; 2], f64)> = map_ordered(units.len(), |u| {
        let (l, m, r) = units[u];
        let (v1, a1) = rule.integrate(&f, l, m);
        let (v2, a2) = rule.integrate(&f, m, r);
        let (vc, _) = rule.integrate(&f, l, r);
        ([v1, v2], (v1 + v2 - vc).abs() + ROUNDING_FLOOR * (a1 + a2))
    });
    let mut prefix = Vec::with_capacity(n);
    let mut sum = NeumaierSum::default();
    prefix.push(0.0);
    let cell_count = n - 1;
    let mut err = 0.0;
    let mut filled = 0;
    for (vals, e) in &cells {
        err += e;
        let take = if filled + 2 <= cell_count { 2 } else { 1 };
        if take == 1 {
            // lone last cell was bisected; both halves belong to it
            sum.add(vals[0]);
            sum.add(vals[1]);
            prefix.push(sum.value());
        } else {
            for v in vals {
                sum.add(*v);
                prefix.push(sum.value());
            }
        }
        filled += take;
    }
    Ok(CumulativeGrid {
        a,
        b,
        step,
        prefix,
        err_est: err,
    })
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = gauss_legendre();
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..32 {
            let (v, _) = rule.integrate(&|x: f64| x.powi(deg), -1.0, 1.0);
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn indefinite_matrix_is_exact_to_degree_fifteen() {
        let rule = gauss_legendre();
        let (a, b) = (0.5, 1.5);
        let xs = rule.mapped_nodes(a, b);
        for deg in 0..16 {
            let vals = xs.map(|x| x.powi(deg));
            let got = rule.partial_integrals(a, b, &vals);
            for (j, &x) in xs.iter().enumerate() {
                let d = deg as f64 + 1.0;
                let exact = (x.powf(d) - a.powf(d)) / d;
                assert!((got[j] - exact).abs() < 1e-12 * exact.abs().max(1.0), "deg {deg} node {j}");
            }
        }
    }

    #[test]
    fn partial_row_agrees_with_matrix_at_nodes() {
        let rule = gauss_legendre();
        for j in 0..ORDER {
            let row = rule.partial_row(rule.nodes[j]);
            for (x, y) in row.iter().zip(&rule.integ[j]) {
                assert!((x - y).abs() < 1e-14);
            }
        }
        let full = rule.partial_row(1.0);
        for (x, w) in full.iter().zip(&rule.weights) {
            assert!((x - w).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_and_full_period() {
        let one = integrate(|_| 1.0, 0.0, 5.0, 1e-12).unwrap();
        assert!((one.value - 5.0).abs() < 1e-12);
        assert!(one.err_est >= 0.0);
        assert!(one.evals >= one.panels * ORDER);
        let c = integrate(f64::cos, 0.0, TAU, 1e-12).unwrap();
        assert!(c.value.abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integrate(|x| x, 1.0, 1.0, 1e-6).is_err());
        assert!(integrate(|x| x, 2.0, 1.0, 1e-6).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
        assert!(cumulative_grid(|x| x, 0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // discontinuous integrand with an unreachable tolerance
        let r = integrate_with(
            |x: f64| if x < PI / 3.0 { 0.0 } else { 1.0 },
            0.0,
            2.0,
            Tolerance::abs(1e-15),
            PanelPolicy::Fixed(0.5),
            2,
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn cumulative_constant() {
        let g = cumulative_grid(|_| 1.0, 0.0, 10.0, 1.0).unwrap();
        assert_eq!(g.len(), 11);
        for (i, (t, v)) in g.nodes().enumerate() {
            assert_eq!(t, i as f64);
            assert!((v - i as f64).abs() < 1e-13);
        }
        // odd cell count and a last node clamped to b
        let g = cumulative_grid(|x| 2.0 * x, 0.0, 2.5, 1.0).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.node(3), 2.5);
        assert!((g.prefix[3] - 6.25).abs() < 1e-13);
        assert!((g.prefix[2] - 4.0).abs() < 1e-13);
    }

    #[test]
    fn pairwise_sum_small_and_large() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        let xs: Vec<f64> = (0..10_001).map(|i| 0.1 * i as f64).collect();
        assert!((pairwise_sum(&xs) - 0.1 * 10_000.0 * 10_001.0 / 2.0).abs() < 1e-6);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let f = |x: f64| (x * 1.3).sin() * (x / 70.0).exp();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| integrate(f, 0.0, 400.0, Tolerance::rel(1e-10)).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.err_est.to_bits(), b.err_est.to_bits());
    }
}
