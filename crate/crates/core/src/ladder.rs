//! A concrete Jacob's ladder.
//!
//! With `hl(t) = ∫₀ᵗ Z²` and `F(y) = y ln y + (c − ln 2π) y`, the ladder is
//! defined through its half `y = φ(t)/2` by `F(y) = hl(t)`. Differentiating
//! gives `Z²(t) = Φ′(φ(t))·φ′(t)` with `Φ′(x) = ½F′(x/2)`, so
//! `Ẑ²(t) = Z²(t)/Φ′(φ(t)) = φ′(t)` and the substitution
//! `∫ f(φ/2)·Ẑ² dt = 2∫ f(x) dx` holds exactly for the constructed `φ`.
//!
//! In numeric mode `hl` is the oracle integral over `[0, t_head]` plus a
//! cumulative Gauss–Legendre grid of `Z²` from `t_head` on. In analytic mode
//! `hl(t) = t ln t + (2c − 1 − ln 2π) t`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{self, constants};
use crate::quadrature::{
    self, cumulative_grid, gauss_legendre, pair_units, reduce_ordered, CumulativeGrid, PanelPolicy,
    Partial, Tolerance, ORDER, ROUNDING_FLOOR,
};
use crate::zeta::{self, z_value};

pub const DEFAULT_T_HEAD: f64 = 10.0;
pub const DEFAULT_STEP: f64 = 0.25;
/// Smallest height at which `φ` is evaluated.
pub const PHI_MIN: f64 = 100.0;

const CACHE_MAGIC: &str = "# zeta-ladder-cache v1";

/// Grid end covering heights up to `t_end`, rounded up to the next multiple
/// of 1000 plus one more, so nearby requests share one cache.
pub fn extent_for(t_end: f64) -> f64 {
    ((t_end / 1e3).ceil() + 1.0) * 1e3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderMode {
    NumericHl,
    AnalyticHl,
}

impl LadderMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LadderMode::NumericHl => "numeric_hl",
            LadderMode::AnalyticHl => "analytic_hl",
        }
    }
}

impl std::str::FromStr for LadderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric_hl" => Ok(LadderMode::NumericHl),
            "analytic_hl" => Ok(LadderMode::AnalyticHl),
            other => Err(Error::Invalid(format!("unknown ladder mode `{other}`"))),
        }
    }
}

/// One evaluated point of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub t: f64,
    pub phi: f64,
    pub phi_half: f64,
    pub z_hat_sq: f64,
    /// `t − φ(t)/2`.
    pub defect: f64,
}

/// `t − φ(t)/2` against `(1 − c)·π(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub t: f64,
    pub defect: f64,
    pub reference: f64,
    pub ratio: f64,
}

/// Everything an integrand along the ladder may need at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledNode {
    pub t: f64,
    pub z: f64,
    /// `φ(t)/2`.
    pub phi_half: f64,
    /// `F′(φ(t)/2) = 2Φ′(φ(t))`.
    pub f_prime: f64,
}

impl CoupledNode {
    /// `Ẑ²(t) = Z²(t)/Φ′(φ(t))`.
    pub fn z_hat_sq(&self) -> f64 {
        2.0 * self.z * self.z / self.f_prime
    }
}

/// Vector-valued integral along the ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledEstimate<const K: usize> {
    pub value: [f64; K],
    pub err_est: [f64; K],
    pub panels: usize,
    pub evals: usize,
}

/// The constructed ladder. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderModel {
    pub mode: LadderMode,
    pub t_head: f64,
    pub head_constant: f64,
    pub step: f64,
    pub t_max: f64,
    /// Cumulative `∫_{t_head}^{tᵢ} Z²`; absent in analytic mode.
    pub hl_grid: Option<CumulativeGrid>,
}

/// `F(y) = y ln y + (c − ln 2π) y`.
pub fn f_of(y: f64) -> f64 {
    let k = constants();
    y * (y.ln() + k.euler_c - k.ln_two_pi)
}

/// `F′(y) = ln y + 1 + c − ln 2π`.
pub fn f_prime(y: f64) -> f64 {
    let k = constants();
    y.ln() + 1.0 + k.euler_c - k.ln_two_pi
}

/// `Φ′(x) = ½(ln(x/2) + 1 + c − ln 2π)`.
pub fn phi_prime(x: f64) -> f64 {
    0.5 * f_prime(0.5 * x)
}

/// `t ln t + (2c − 1 − ln 2π) t`.
pub fn hl_analytic(t: f64) -> f64 {
    t * t.ln() + constants().hl_linear_coeff() * t
}

/// Solves `F(y) = h` on the increasing branch `y ≥ 2`, starting from `seed`.
pub fn invert_f(h: f64, seed: f64) -> Result<f64> {
    let mut lo = 2.0;
    if !h.is_finite() || f_of(lo) >= h {
        return Err(Error::Bracket { target: h });
    }
    let mut hi = seed.max(2.0 * lo);
    let mut grow = 0;
    while f_of(hi) < h {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 1100 || !hi.is_finite() {
            return Err(Error::Bracket { target: h });
        }
    }
    let mut y = if seed > lo && seed < hi { seed } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let r = f_of(y) - h;
        if r == 0.0 {
            return Ok(y);
        }
        if r < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let newton = y - r / f_prime(y);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == y || next == lo || next == hi {
            break;
        }
        y = next;
    }
    let best = [y, lo, hi]
        .into_iter()
        .min_by(|a, b| (f_of(*a) - h).abs().total_cmp(&(f_of(*b) - h).abs()))
        .unwrap_or(y);
    Ok(best)
}

/// Starting guess `t − (1 − c) t/ln t` for `φ(t)/2`.
fn seed(t: f64) -> f64 {
    t - constants().one_minus_c * t / t.ln()
}

/// `∫₀^{t_head} |ζ(1/2 + it)|² dt` by the reference evaluator.
pub fn compute_head_constant(t_head: f64) -> Result<f64> {
    if !(t_head >= zeta::T_MIN) {
        return Err(Error::Range {
            what: "t_head",
            value: t_head,
            lo: zeta::T_MIN,
            hi: f64::INFINITY,
        });
    }
    let f = |t: f64| zeta::em_zeta_half(t).map_or(f64::NAN, |z| z.norm_sqr());
    let est = quadrature::integrate_with(
        f,
        0.0,
        t_head,
        Tolerance::rel(1e-13),
        PanelPolicy::Fixed(1.0),
        4,
    )?;
    Ok(est.value)
}

/// Head constant for the default `t_head`, computed once per process.
pub fn default_head_constant() -> Result<f64> {
    static HEAD: OnceLock<Result<f64>> = OnceLock::new();
    HEAD.get_or_init(|| compute_head_constant(DEFAULT_T_HEAD)).clone()
}

impl LadderModel {
    /// Analytic-mode ladder, valid from [`PHI_MIN`] up to the evaluator limit.
    pub fn analytic() -> Self {
        LadderModel {
            mode: LadderMode::AnalyticHl,
            t_head: DEFAULT_T_HEAD,
            head_constant: default_head_constant().unwrap_or(f64::NAN),
            step: DEFAULT_STEP,
            t_max: zeta::T_MAX,
            hl_grid: None,
        }
    }

    /// Numeric-mode ladder on `[t_head, t_max]` with the default head and step.
    pub fn numeric(t_max: f64) -> Result<Self> {
        Self::numeric_with(t_max, DEFAULT_T_HEAD, DEFAULT_STEP)
    }

    pub fn numeric_with(t_max: f64, t_head: f64, step: f64) -> Result<Self> {
        if !(t_max > PHI_MIN && t_max <= zeta::T_MAX) {
            return Err(Error::Range {
                what: "ladder t_max",
                value: t_max,
                lo: PHI_MIN,
                hi: zeta::T_MAX,
            });
        }
        let head_constant = if t_head == DEFAULT_T_HEAD {
            default_head_constant()?
        } else {
            compute_head_constant(t_head)?
        };
        let grid = cumulative_grid(|t| z_value(t).powi(2), t_head, t_max, step)?;
        Ok(LadderModel {
            mode: LadderMode::NumericHl,
            t_head,
            head_constant,
            step,
            t_max,
            hl_grid: Some(grid),
        })
    }

    pub fn build(mode: LadderMode, t_max: f64) -> Result<Self> {
        match mode {
            LadderMode::NumericHl => Self::numeric(t_max),
            LadderMode::AnalyticHl => Ok(Self::analytic()),
        }
    }

    fn t_lo(&self) -> f64 {
        match self.mode {
            LadderMode::NumericHl => self.t_head,
            LadderMode::AnalyticHl => PHI_MIN,
        }
    }

    fn check_range(&self, what: &'static str, t: f64, lo: f64) -> Result<()> {
        if t >= lo && t <= self.t_max {
            Ok(())
        } else {
            Err(Error::Range {
                what,
                value: t,
                lo,
                hi: self.t_max,
            })
        }
    }

    /// `∫₀ᵀ Z²` (numeric mode) or its main terms (analytic mode).
    pub fn hl_integral(&self, t: f64) -> Result<f64> {
        self.check_range("hl_integral height", t, self.t_lo())?;
        Ok(match &self.hl_grid {
            None => hl_analytic(t),
            Some(grid) => {
                let i = grid.cell_of(t);
                let start = grid.node(i);
                let base = self.head_constant + grid.prefix[i];
                if t == start {
                    base
                } else if t == grid.node(i + 1) {
                    self.head_constant + grid.prefix[i + 1]
                } else {
                    let rule = gauss_legendre();
                    base + rule.integrate(&|x: f64| z_value(x).powi(2), start, t).0
                }
            }
        })
    }

    /// `φ(t)/2` from a known value of `hl(t)`.
    fn phi_half_from(&self, t: f64, hl: f64) -> Result<f64> {
        invert_f(hl, seed(t))
    }

    pub fn ladder_phi(&self, t: f64) -> Result<LadderPoint> {
        self.check_range("ladder height", t, PHI_MIN)?;
        let y = self.phi_half_from(t, self.hl_integral(t)?)?;
        let z = z_value(t);
        Ok(LadderPoint {
            t,
            phi: 2.0 * y,
            phi_half: y,
            z_hat_sq: 2.0 * z * z / f_prime(y),
            defect: t - y,
        })
    }

    pub fn ladder_defect(&self, t: f64) -> Result<DefectReport> {
        let p = self.ladder_phi(t)?;
        let reference = primes::pnt_defect_reference(t)?;
        Ok(DefectReport {
            t,
            defect: p.defect,
            reference,
            ratio: p.defect / reference,
        })
    }

    /// `(φ(T + U) − φ(T))/(2U)`.
    pub fn ladder_slope(&self, t: f64, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= t) {
            return Err(Error::Window(format!("U = {u} must lie in (0, T] for T = {t}")));
        }
        let a = self.ladder_phi(t)?;
        let b = self.ladder_phi(t + u)?;
        Ok((b.phi - a.phi) / (2.0 * u))
    }

    /// Panel edges for `[a, b]`: `a`, the lattice `t_head + i·step` inside,
    /// then `b`.
    fn lattice_edges(&self, a: f64, b: f64) -> Vec<f64> {
        let first = ((a - self.t_head) / self.step).floor() as i64 + 1;
        let mut edges = vec![a];
        let mut i = first.max(0);
        loop {
            let x = self.t_head + i as f64 * self.step;
            if x >= b {
                break;
            }
            if x > a {
                edges.push(x);
            }
            i += 1;
        }
        edges.push(b);
        edges
    }

    /// `hl` at a panel's left end; bit-identical to the grid for lattice nodes.
    fn hl_at_edge(&self, x: f64) -> Result<f64> {
        self.hl_integral(x)
    }

    /// `∫ₐᵇ g(node)` where each node carries `Z(t)` and `φ(t)/2`, with
    /// panels aligned to the `hl` grid so that `φ` at the quadrature nodes
    /// comes from integrating the same `Z²` samples. Errors with
    /// `NonConvergence` when the estimate of component 0 misses `tol`.
    pub fn integrate_coupled<const K: usize, G>(
        &self,
        a: f64,
        b: f64,
        tol: Tolerance,
        g: G,
    ) -> Result<CoupledEstimate<K>>
    where
        G: Fn(&CoupledNode) -> [f64; K] + Sync,
    {
        if !(a < b) {
            return Err(Error::Invalid(format!("integration bounds [{a}, {b}]")));
        }
        self.check_range("ladder window start", a, PHI_MIN)?;
        self.check_range("ladder window end", b, PHI_MIN)?;
        let units = pair_units(&self.lattice_edges(a, b));
        let local = UnitTolerance { tol, width: b - a };
        let failed = std::sync::Mutex::new(None);
        let part = reduce_ordered(units.len(), |i| {
            let (l, m, r) = units[i];
            match self.coupled_unit(l, m, r, &g, &local) {
                Ok(p) => p,
                Err(e) => {
                    failed.lock().expect("error slot").get_or_insert(e);
                    Partial::zero()
                }
            }
        });
        if let Some(e) = failed.into_inner().expect("error slot") {
            return Err(e);
        }
        let est = CoupledEstimate {
            value: part.value,
            err_est: part.err,
            panels: part.panels,
            evals: part.evals,
        };
        let bound = tol.bound(est.value[0]);
        if est.err_est[0] > bound {
            return Err(Error::NonConvergence {
                a,
                b,
                err: est.err_est[0],
                tol: bound,
                depth: 0,
            });
        }
        Ok(est)
    }

    fn coupled_unit<const K: usize, G>(
        &self,
        l: f64,
        m: f64,
        r: f64,
        g: &G,
        local: &UnitTolerance,
    ) -> Result<Partial<K>>
    where
        G: Fn(&CoupledNode) -> [f64; K],
    {
        let rule = gauss_legendre();
        let hl_l = self.hl_at_edge(l)?;
        let hl_m = self.hl_at_edge(m)?;
        let left = self.coupled_panel(l, m, hl_l, g)?;
        let right = self.coupled_panel(m, r, hl_m, g)?;

        // one rule over [l, r]; hl at its nodes from the two fine interpolants
        let xs = rule.mapped_nodes(l, r);
        let mut coarse = [0.0; K];
        for (x, w) in xs.iter().zip(&rule.weights) {
            let hl = match &self.hl_grid {
                None => hl_analytic(*x),
                Some(_) => {
                    let (start, end, base, zsq) = if *x <= m {
                        (l, m, hl_l, &left.zsq)
                    } else {
                        (m, r, hl_m, &right.zsq)
                    };
                    interpolated_hl(start, end, base, zsq, *x)
                }
            };
            let y = self.phi_half_from(*x, hl)?;
            let node = CoupledNode {
                t: *x,
                z: z_value(*x),
                phi_half: y,
                f_prime: f_prime(y),
            };
            let v = g(&node);
            for k in 0..K {
                coarse[k] += w * v[k];
            }
        }
        let coarse = coarse.map(|c| 0.5 * (r - l) * c);
        let mut out = self.refine(l, m, r, hl_l, hl_m, left, right, coarse, g, local, 0)?;
        out.evals += ORDER;
        Ok(out)
    }

    /// Accepts `left + right` when it agrees with `coarse` on `[l, r]`,
    /// otherwise bisects both halves, each half becoming the coarse rule of
    /// its own pair. `Z²` is smooth on a grid cell, so `hl` at new midpoints
    /// comes from the parent panel's interpolant.
    #[allow(clippy::too_many_arguments)]
    fn refine<const K: usize, G>(
        &self,
        l: f64,
        m: f64,
        r: f64,
        hl_l: f64,
        hl_m: f64,
        left: PanelOut<K>,
        right: PanelOut<K>,
        coarse: [f64; K],
        g: &G,
        local: &UnitTolerance,
        depth: u32,
    ) -> Result<Partial<K>>
    where
        G: Fn(&CoupledNode) -> [f64; K],
    {
        let mut out = Partial::zero();
        #[allow(clippy::needless_range_loop)]
        for k in 0..K {
            let fine = left.value[k] + right.value[k];
            out.value[k] = fine;
            out.err[k] = (fine - coarse[k]).abs() + ROUNDING_FLOOR * (left.abs[k] + right.abs[k]);
        }
        out.panels = 2;
        out.evals = 2 * ORDER;
        if depth >= MAX_REFINE || out.err[0] <= local.bound(r - l, left.abs[0] + right.abs[0]) {
            return Ok(out);
        }
        let mut acc = Partial::zero();
        for (a, b, hl_a, parent) in [(l, m, hl_l, left), (m, r, hl_m, right)] {
            let mid = 0.5 * (a + b);
            let hl_mid = match &self.hl_grid {
                None => hl_analytic(mid),
                Some(_) => interpolated_hl(a, b, hl_a, &parent.zsq, mid),
            };
            let p1 = self.coupled_panel(a, mid, hl_a, g)?;
            let p2 = self.coupled_panel(mid, b, hl_mid, g)?;
            let sub = self.refine(a, mid, b, hl_a, hl_mid, p1, p2, parent.value, g, local, depth + 1)?;
            acc = Partial::combine(&acc, &sub);
        }
        acc.evals += 2 * ORDER;
        Ok(acc)
    }

    fn coupled_panel<const K: usize, G>(&self, l: f64, r: f64, hl_l: f64, g: &G) -> Result<PanelOut<K>>
    where
        G: Fn(&CoupledNode) -> [f64; K],
    {
        let rule = gauss_legendre();
        let xs = rule.mapped_nodes(l, r);
        let zs = xs.map(z_value);
        let zsq = zs.map(|z| z * z);
        let hls = match &self.hl_grid {
            None => xs.map(hl_analytic),
            Some(_) => rule.partial_integrals(l, r, &zsq).map(|p| hl_l + p),
        };
        let h = 0.5 * (r - l);
        let mut value = [0.0; K];
        let mut abs = [0.0; K];
        for j in 0..ORDER {
            let y = self.phi_half_from(xs[j], hls[j])?;
            let node = CoupledNode {
                t: xs[j],
                z: zs[j],
                phi_half: y,
                f_prime: f_prime(y),
            };
            let v = g(&node);
            for k in 0..K {
                value[k] += rule.weights[j] * v[k];
                abs[k] += rule.weights[j] * v[k].abs();
            }
        }
        Ok(PanelOut {
            value: value.map(|v| h * v),
            abs: abs.map(|v| h * v),
            zsq,
        })
    }

    /// Serializes the model in the line-oriented cache format.
    pub fn to_cache_string(&self) -> String {
        let mut out = format!(
            "{CACHE_MAGIC} mode={} t_head={} head_constant={:.16e} step={}\n",
            self.mode.as_str(),
            self.t_head,
            self.head_constant,
            self.step
        );
        if let Some(grid) = &self.hl_grid {
            for (t, v) in grid.nodes() {
                let _ = writeln!(out, "{t:.16e},{v:.16e}");
            }
        }
        out
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_cache_string())
            .and_then(|_| std::fs::rename(&tmp, path))
            .map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
    }

    pub fn from_cache_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Cache(why.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty cache"))?;
        let fields = header
            .strip_prefix(CACHE_MAGIC)
            .ok_or_else(|| bad("missing cache header"))?;
        let mut mode = None;
        let mut t_head = None;
        let mut head = None;
        let mut step = None;
        for kv in fields.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("malformed header field"))?;
            let num = || v.parse::<f64>().map_err(|_| bad("malformed header number"));
            match k {
                "mode" => mode = Some(v.parse::<LadderMode>()?),
                "t_head" => t_head = Some(num()?),
                "head_constant" => head = Some(num()?),
                "step" => step = Some(num()?),
                _ => return Err(bad("unknown header field")),
            }
        }
        let (Some(mode), Some(t_head), Some(head_constant), Some(step)) = (mode, t_head, head, step)
        else {
            return Err(bad("incomplete cache header"));
        };
        if mode == LadderMode::AnalyticHl {
            return Ok(LadderModel {
                head_constant,
                t_head,
                step,
                ..LadderModel::analytic()
            });
        }
        let mut ts = Vec::new();
        let mut prefix = Vec::new();
        for line in lines {
            let (t, v) = line.split_once(',').ok_or_else(|| bad("malformed cache row"))?;
            let t: f64 = t.trim().parse().map_err(|_| bad("malformed cache t"))?;
            let v: f64 = v.trim().parse().map_err(|_| bad("malformed cache value"))?;
            ts.push(t);
            prefix.push(v);
        }
        let n = ts.len();
        if n < 2 || ts[0] != t_head || prefix[0] != 0.0 {
            return Err(bad("cache grid does not start at t_head"));
        }
        for i in 1..n {
            let expect_lattice = i + 1 < n;
            if expect_lattice && ts[i] != t_head + i as f64 * step {
                return Err(bad("cache nodes off the step lattice"));
            }
            if ts[i] <= ts[i - 1] || prefix[i] < prefix[i - 1] {
                return Err(bad("cache grid not increasing"));
            }
        }
        let t_max = ts[n - 1];
        if CumulativeGrid::node_count(t_head, t_max, step) != n {
            return Err(bad("cache node count inconsistent with step"));
        }
        Ok(LadderModel {
            mode,
            t_head,
            head_constant,
            step,
            t_max,
            hl_grid: Some(CumulativeGrid {
                a: t_head,
                b: t_max,
                step,
                prefix,
                err_est: 0.0,
            }),
        })
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
        Self::from_cache_str(&text)
    }

    /// Reuses the cache at `path` when its mode, head and step match and it
    /// reaches `t_max`; otherwise builds a fresh ladder and rewrites the file.
    pub fn load_or_build(path: Option<&Path>, mode: LadderMode, t_max: f64) -> Result<Self> {
        if mode == LadderMode::AnalyticHl {
            return Ok(Self::analytic());
        }
        if let Some(p) = path {
            if let Ok(m) = Self::read_cache(p) {
                if m.mode == mode
                    && m.t_head == DEFAULT_T_HEAD
                    && m.step == DEFAULT_STEP
                    && m.t_max >= t_max
                {
                    return Ok(m);
                }
            }
        }
        let model = Self::numeric(t_max)?;
        if let Some(p) = path {
            model.write_cache(p)?;
        }
        Ok(model)
    }
}

/// Depth limit for bisecting one panel pair (`0.25/2¹⁴` wide at the bottom).
const MAX_REFINE: u32 = 14;

/// Share of the global tolerance allotted to one panel pair.
struct UnitTolerance {
    tol: Tolerance,
    width: f64,
}

impl UnitTolerance {
    fn bound(&self, width: f64, abs: f64) -> f64 {
        (self.tol.abs * width / self.width).max(self.tol.rel * abs)
    }
}

/// `hl` at `x ∈ [start, end]` from `hl(start)` and the panel's `Z²` samples.
fn interpolated_hl(start: f64, end: f64, base: f64, zsq: &[f64; ORDER], x: f64) -> f64 {
    let u = (2.0 * x - start - end) / (end - start);
    let row = gauss_legendre().partial_row(u);
    let h = 0.5 * (end - start);
    base + h * row.iter().zip(zsq).map(|(a, b)| a * b).sum::<f64>()
}

#[derive(Clone, Copy)]
struct PanelOut<const K: usize> {
    value: [f64; K],
    abs: [f64; K],
    zsq: [f64; ORDER],
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> &'static LadderModel {
        static M: OnceLock<LadderModel> = OnceLock::new();
        M.get_or_init(|| LadderModel::numeric(3000.0).unwrap())
    }

    #[test]
    fn head_constant_matches_independent_quadrature() {
        // ∫₀¹⁰ |ζ(1/2+it)|² dt from a 30-digit mpmath quadrature
        let h = default_head_constant().unwrap();
        assert!((h - 9.982_734_637_918_993).abs() < 1e-11, "{h}");
    }

    #[test]
    fn grid_increment_matches_independent_quadrature() {
        // ∫₁₀₀₀¹¹⁰⁰ Z² dt from a 25-digit mpmath quadrature of siegelz²
        let m = small();
        let v = m.hl_integral(1100.0).unwrap() - m.hl_integral(1000.0).unwrap();
        assert!((v - 666.965_731_208_532_7).abs() < 1e-7, "{v}");
        // below t = 100 the evaluator error (~1e-4 near t = 10) dominates
        let low = m.hl_integral(100.0).unwrap() - m.head_constant;
        assert!((low - 285.652_364_416_800_1).abs() < 1e-3, "{low}");
        assert_eq!(m.hl_integral(m.t_head).unwrap(), m.head_constant);
    }

    #[test]
    fn analytic_value_at_ten_thousand() {
        let v = hl_analytic(1e4);
        assert!((v - 7.5269e4).abs() < 1.0, "{v}");
    }

    #[test]
    fn inversion_round_trip() {
        let m = small();
        for t in [100.0, 137.3, 1000.0, 2999.9] {
            let p = m.ladder_phi(t).unwrap();
            let h = m.hl_integral(t).unwrap();
            assert!((f_of(p.phi_half) - h).abs() <= 1e-9 * h);
            assert_eq!(p.phi_half, p.phi / 2.0);
            assert!(p.z_hat_sq >= 0.0);
        }
        assert!(invert_f(f64::NAN, 10.0).is_err());
        assert!(invert_f(-5.0, 10.0).is_err());
    }

    #[test]
    fn range_checks() {
        let m = small();
        assert!(m.ladder_phi(99.0).is_err());
        assert!(m.ladder_phi(3000.5).is_err());
        assert!(m.hl_integral(9.0).is_err());
        assert!(m.ladder_slope(1000.0, 0.0).is_err());
        assert!(LadderModel::numeric(50.0).is_err());
    }

    #[test]
    fn coupled_constant_integrand_recovers_phi_difference() {
        let m = small();
        let (a, b) = (1000.0, 1234.567);
        let est = m
            .integrate_coupled(a, b, Tolerance::rel(1e-9), |n| [n.z_hat_sq()])
            .unwrap();
        let exact = m.ladder_phi(b).unwrap().phi - m.ladder_phi(a).unwrap().phi;
        assert!(((est.value[0] - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn cache_text_round_trip() {
        let m = small();
        let back = LadderModel::from_cache_str(&m.to_cache_string()).unwrap();
        assert_eq!(back.head_constant.to_bits(), m.head_constant.to_bits());
        assert_eq!(back.t_max, m.t_max);
        for t in [100.0, 555.55, 2999.0] {
            assert_eq!(
                back.ladder_phi(t).unwrap().phi.to_bits(),
                m.ladder_phi(t).unwrap().phi.to_bits()
            );
        }
        let broken = m.to_cache_string().replace("step=0.25", "step=0.5");
        assert!(LadderModel::from_cache_str(&broken).is_err());
        assert!(LadderModel::from_cache_str("# something else\n").is_err());
    }
}
