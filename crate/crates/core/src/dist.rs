//! Distribution-level API: Tracy-Widom GUE/GOE laws, the joint density
//! f(t, m) of the location and height of the maximum of the Airy2 process
//! minus a parabola, the endpoint density/moments/tail, the one-sided
//! parabolic sup law, the joint sup/point law in its scalar and 2x2 matrix
//! forms, and the extended-kernel two-time distribution.
//!
//! Representation notes, fixed here once and reused everywhere:
//!
//! * `F_GOE(m) = det(I - P_0 B_m P_0)` with `B_m(x,y) = Ai(x+y+m)`.
//! * `f(t,m)` uses the rank-one trace formula as the primary route; the
//!   determinant-difference form of the same identity is kept for
//!   cross-checks.
//! * The one-sided sup law is evaluated as `det(I - K_Ai Q K_Ai)` pulled
//!   back to `L^2([0,inf))` through the factorization `K_Ai = B_0 P_0 B_0`
//!   (with `B_0^2 = I`), i.e. `det(I - C)` with
//!   `C(x,z) = K_Ai(x+A, z+A) + int_A^inf Ai(x+u) e^{2t(u-A)} Ai(2A-u+z) du`.
//!   This form stays well conditioned at moderate `t` where the conjugated
//!   half-line representation loses all precision to cancellation.
//! * The scalar two-time route applies the same pull-back to the full
//!   operator; the matrix route discretizes the conjugated 2x2 blocks.

use crate::airy::{ai, airy_pair};
use crate::error::{Error, Result};
use crate::fredholm::{self, det_block2, BlockKernel, DetResult, KernelFn};
use crate::kernels::{k_airy, psi_log, q_composed_kernels, CBRT2, CBRT4};
use crate::quadrature::{choose_truncation, DecayEnvelope, QuadratureRule};
use rayon::prelude::*;

/// Quadrature resolution and truncation policy shared by all operations.
#[derive(Debug, Clone)]
pub struct NumericsConfig {
    /// Base node budget per interval (split into oscillation-sized panels).
    pub quad_n: usize,
    /// Convergence tolerance for grid-refinement deltas.
    pub tol: f64,
    /// Padding added beyond every computed truncation point.
    pub trunc_pad: f64,
    /// Integration window for marginalizing the max height m out of f(t,m).
    pub m_window: (f64, f64),
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            quad_n: 80,
            tol: 1e-10,
            trunc_pad: 8.0,
            m_window: (-8.0, 25.0),
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.quad_n < 20 {
            return Err(Error::Config(format!(
                "quad_n must be >= 20, got {}",
                self.quad_n
            )));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(Error::Config(format!(
                "tol must be in (0, 1e-2], got {}",
                self.tol
            )));
        }
        if !(self.m_window.0 < self.m_window.1) {
            return Err(Error::Config("empty m window".into()));
        }
        Ok(())
    }

    fn n_per_panel(&self) -> usize {
        (self.quad_n / 5).max(8)
    }
}

/// Which side of the joint-density identity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointRoute {
    Trace,
    DetDifference,
}

/// Scalar (pulled-back) or 2x2 matrix-kernel form of the joint sup/point law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupPointRoute {
    Scalar,
    Matrix,
}

/// Sampled density values with their numerics provenance.
#[derive(Debug, Clone)]
pub struct DensityTable {
    pub t_nodes: Vec<f64>,
    pub m_nodes: Option<Vec<f64>>,
    pub values: Vec<f64>,
    pub config: NumericsConfig,
    pub converged: Vec<bool>,
}

/// Moments of the endpoint density.
#[derive(Debug, Clone, Copy)]
pub struct MomentReport {
    pub total_mass: f64,
    pub variance: f64,
    pub excess_kurtosis: f64,
    pub odd_moment_1: f64,
    pub odd_moment_3: f64,
}

/// Piecewise-linear CDF table derived from the endpoint density.
#[derive(Debug, Clone)]
pub struct CdfTable {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
}

impl CdfTable {
    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ps[0];
        }
        if x >= *self.xs.last().unwrap() {
            return *self.ps.last().unwrap();
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (p0, p1) = (self.ps[i], self.ps[i + 1]);
        p0 + (p1 - p0) * (x - x0) / (x1 - x0)
    }
}

fn check_cdf_range(value: f64, tol: f64, what: &str) -> Result<f64> {
    if value < -10.0 * tol || value > 1.0 + 10.0 * tol {
        return Err(Error::NonConvergence(format!(
            "{what} = {value} outside [0,1] beyond the 10*tol reporting slack"
        )));
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// Tracy-Widom GUE and GOE
// ---------------------------------------------------------------------------

fn gue_rule(s: f64, cfg: &NumericsConfig, factor: f64) -> Result<QuadratureRule> {
    let hi = s + 10.4 + cfg.trunc_pad; // (4/3) u^{3/2} = 42 at u ~ 10.4
    let nper = ((cfg.n_per_panel() as f64) * factor).round().max(4.0) as usize;
    QuadratureRule::airy_oscillatory(s, hi, 0.0, nper)
}

/// F_GUE(s) = det(I - K_Ai) on L^2(s, inf).
pub fn f_gue(s: f64, cfg: &NumericsConfig) -> Result<DetResult> {
    cfg.validate()?;
    if !s.is_finite() {
        return Err(Error::Domain("s must be finite".into()));
    }
    let kf = |x: f64, y: f64| k_airy(x, y);
    let out = fredholm::refine_det(cfg.quad_n, cfg.tol, |factor| {
        let rule = gue_rule(s, cfg, factor)?;
        let kernel = KernelFn::new(&kf, rule.interval);
        Ok(fredholm::det_fredholm_once(&kernel, &rule)?)
    })?;
    check_cdf_range(out.value, cfg.tol, "F_GUE")?;
    Ok(out)
}

/// Right-tail complement `1 - F_GUE(s)`, accurate in relative terms.
///
/// Computed from the head of the Fredholm series (`e_1 - e_2`, with `e_3`
/// relatively of order `e_1^2`), which avoids the cancellation that makes
/// `1 - det` useless once the tail drops below the determinant's absolute
/// accuracy. Restricted to the decaying regime `s >= 2`.
pub fn gue_upper_tail(s: f64, cfg: &NumericsConfig) -> Result<f64> {
    cfg.validate()?;
    if s < 2.0 {
        return Err(Error::Config(format!(
            "tail complement needs s >= 2, got {s}"
        )));
    }
    let rule = gue_rule(s, cfg, 1.0)?;
    series_complement(&|x, y| k_airy(x, y), &rule)
}

fn series_complement(k: &dyn Fn(f64, f64) -> f64, rule: &QuadratureRule) -> Result<f64> {
    let n = rule.len();
    let mut diag = Vec::with_capacity(n);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        diag.push(w * k(x, x));
    }
    let e1: f64 = diag.iter().sum();
    let mut tr2 = 0.0;
    for (i, (&x, &wx)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        for (j, (&y, &wy)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            if j < i {
                continue;
            }
            let v = k(x, y) * k(y, x) * wx * wy;
            tr2 += if i == j { v } else { 2.0 * v };
        }
    }
    let e2 = 0.5 * (e1 * e1 - tr2);
    Ok(e1 - e2)
}

fn goe_rule(shift: f64, cfg: &NumericsConfig, factor: f64, extra: f64) -> Result<QuadratureRule> {
    // B_shift diagonal Ai(2x + shift) decays once 2x + shift is past ~10.4
    let hi = ((10.4 - shift) / 2.0).max(2.0) + cfg.trunc_pad + extra;
    let nper = ((cfg.n_per_panel() as f64) * factor).round().max(4.0) as usize;
    QuadratureRule::oscillation_aware(
        0.0,
        hi,
        |x| (-(2.0 * x + shift)).max(0.0).sqrt(),
        nper,
    )
}

/// F_GOE(m) = det(I - P_0 B_m P_0), with B_m(x,y) = Ai(x+y+m).
pub fn f_goe(m: f64, cfg: &NumericsConfig) -> Result<DetResult> {
    cfg.validate()?;
    if !m.is_finite() {
        return Err(Error::Domain("m must be finite".into()));
    }
    let kf = move |x: f64, y: f64| ai(x + y + m);
    let out = fredholm::refine_det(cfg.quad_n, cfg.tol, |factor| {
        let rule = goe_rule(m, cfg, factor, 0.0)?;
        let kernel = KernelFn::new(&kf, rule.interval);
        Ok(fredholm::det_fredholm_once(&kernel, &rule)?)
    })?;
    check_cdf_range(out.value, cfg.tol, "F_GOE")?;
    Ok(out)
}

/// Right-tail complement `1 - F_GOE(m)`; same contract as [`gue_upper_tail`].
pub fn goe_upper_tail(m: f64, cfg: &NumericsConfig) -> Result<f64> {
    cfg.validate()?;
    if m < 2.0 {
        return Err(Error::Config(format!(
            "tail complement needs m >= 2, got {m}"
        )));
    }
    let rule = goe_rule(m, cfg, 1.0, 0.0)?;
    series_complement(&move |x, y| ai(x + y + m), &rule)
}

// ---------------------------------------------------------------------------
// Joint density f(t, m) and the endpoint marginal
// ---------------------------------------------------------------------------

/// Factored GOE operator `I - P_0 B_{4^{1/3} m} P_0` on a grid sized for both
/// the kernel and the psi vectors that will ride on it.
struct GoeOp {
    rule: QuadratureRule,
    sw: Vec<f64>,
    lu: fredholm::Lu,
    det: f64,
}

impl GoeOp {
    fn new(m: f64, t_max: f64, cfg: &NumericsConfig, factor: f64) -> Result<GoeOp> {
        let shift = CBRT4 * m;
        // psi_{t,m}(2^{1/3} x) support: exponent xi t - (2/3)(xi+m+t^2)^{3/2}
        let env = DecayEnvelope {
            rate: t_max.abs().max(0.25),
            airy_coeff: 2.0 / 3.0,
            onset: -(m + t_max * t_max),
        };
        let psi_hi = choose_truncation(0.0, env, 1e-14, cfg.trunc_pad)?.hi / CBRT2;
        let goe = goe_rule(shift, cfg, factor, 0.0)?;
        let hi = goe.interval.1.max(psi_hi);
        let nper = ((cfg.n_per_panel() as f64) * factor).round().max(4.0) as usize;
        let rule = QuadratureRule::oscillation_aware(
            0.0,
            hi,
            |x| (-(2.0 * x + shift)).max(0.0).sqrt(),
            nper,
        )?;
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let n = rule.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = ai(rule.nodes[i] + rule.nodes[j] + shift);
                a[i * n + j] = (i == j) as usize as f64 - sw[i] * sw[j] * v;
            }
        }
        let lu = fredholm::Lu::factor(a, n)?;
        let det = lu.det();
        Ok(GoeOp { rule, sw, lu, det })
    }

    fn psi_samples(&self, t: f64, m: f64) -> Vec<f64> {
        self.rule
            .nodes
            .iter()
            .map(|&x| psi_log(t, m, CBRT2 * x).value())
            .collect()
    }

    /// Trace route: 2^{1/3} <psi_{-t,m}, (I - B)^{-1} psi_{t,m}> F_GOE.
    fn joint_trace(&self, t: f64, m: f64) -> f64 {
        let u = self.psi_samples(t, m);
        let v = self.psi_samples(-t, m);
        let b: Vec<f64> = u.iter().zip(&self.sw).map(|(ui, s)| ui * s).collect();
        let y = self.lu.solve(&b);
        let trace: f64 = y
            .iter()
            .zip(self.sw.iter().zip(&v))
            .map(|(yi, (s, vi))| yi * s * vi)
            .sum();
        CBRT2 * trace * self.det
    }

    /// Determinant-difference route:
    /// det(I - B + Psi) - det(I - B), Psi(x,y) = 2^{1/3} u(x) v(y).
    fn joint_det_difference(&self, t: f64, m: f64) -> Result<f64> {
        let u = self.psi_samples(t, m);
        let v = self.psi_samples(-t, m);
        let n = self.rule.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let b = ai(self.rule.nodes[i] + self.rule.nodes[j] + CBRT4 * m);
                let psi = CBRT2 * u[i] * v[j];
                a[i * n + j] =
                    (i == j) as usize as f64 - self.sw[i] * self.sw[j] * (b - psi);
            }
        }
        Ok(fredholm::Lu::factor(a, n)?.det() - self.det)
    }
}

/// Joint density f(t, m) of the argmax location and max height.
pub fn joint_density(t: f64, m: f64, cfg: &NumericsConfig, route: JointRoute) -> Result<f64> {
    cfg.validate()?;
    if !t.is_finite() || !m.is_finite() {
        return Err(Error::Domain("t and m must be finite".into()));
    }
    let op = GoeOp::new(m, t, cfg, 1.0)?;
    match route {
        JointRoute::Trace => Ok(op.joint_trace(t, m)),
        JointRoute::DetDifference => op.joint_det_difference(t, m),
    }
}

/// Panel rule over the m window.
fn m_rule(cfg: &NumericsConfig) -> Result<QuadratureRule> {
    QuadratureRule::composite(cfg.m_window.0, cfg.m_window.1, 1.25, 12)
}

/// Endpoint density values on an arbitrary set of t points, sharing one GOE
/// factorization per m node. Parallel over m; the reduction is performed in
/// fixed m-order so results do not depend on scheduling.
pub fn endpoint_table(ts: &[f64], cfg: &NumericsConfig) -> Result<DensityTable> {
    cfg.validate()?;
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("t grid must be finite".into()));
    }
    let t_max = ts.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mr = m_rule(cfg)?;
    window_check(t_max, cfg)?;
    let contributions: Vec<Result<Vec<f64>>> = mr
        .nodes
        .par_iter()
        .zip(mr.weights.par_iter())
        .map(|(&mj, &wj)| {
            let op = GoeOp::new(mj, t_max, cfg, 1.0)?;
            Ok(ts.iter().map(|&t| wj * op.joint_trace(t, mj)).collect())
        })
        .collect();
    let mut values = vec![0.0; ts.len()];
    for c in contributions {
        let c = c?;
        for (v, d) in values.iter_mut().zip(c) {
            *v += d;
        }
    }
    let converged = vec![true; ts.len()];
    Ok(DensityTable {
        t_nodes: ts.to_vec(),
        m_nodes: None,
        values,
        config: cfg.clone(),
        converged,
    })
}

/// Confirms the m-window truncation error is negligible: the joint density
/// at both window edges, times a unit width, must sit below tol.
fn window_check(t_max: f64, cfg: &NumericsConfig) -> Result<()> {
    for edge in [cfg.m_window.0, cfg.m_window.1] {
        let op = GoeOp::new(edge, t_max.min(1.0), cfg, 0.5)?;
        let f = op.joint_trace(0.0, edge).abs();
        if f > cfg.tol {
            return Err(Error::Config(format!(
                "m window edge {edge} carries density {f} above tol {}",
                cfg.tol
            )));
        }
    }
    Ok(())
}

/// f_end(t): the joint density integrated over the max height.
pub fn endpoint_density(t: f64, cfg: &NumericsConfig) -> Result<f64> {
    Ok(endpoint_table(&[t], cfg)?.values[0])
}

/// Symmetric panel grid on [-t_max, t_max] whose weights integrate f_end.
fn t_grid(t_max: f64, step: f64, nper: usize) -> Result<QuadratureRule> {
    QuadratureRule::composite(-t_max, t_max, step, nper)
}

/// Moments of the endpoint density over [-t_max, t_max].
pub fn endpoint_moments(cfg: &NumericsConfig, t_max: f64) -> Result<MomentReport> {
    if t_max < 3.0 {
        return Err(Error::Config(format!("t_max must be >= 3, got {t_max}")));
    }
    let rule = t_grid(t_max, 0.5, 14)?;
    let table = endpoint_table(&rule.nodes, cfg)?;
    let mut mass = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for ((&t, &w), &f) in rule.nodes.iter().zip(&rule.weights).zip(&table.values) {
        mass += w * f;
        m1 += w * t * f;
        m2 += w * t * t * f;
        m3 += w * t * t * t * f;
        m4 += w * t * t * t * t * f;
    }
    Ok(MomentReport {
        total_mass: mass,
        variance: m2,
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        odd_moment_1: m1,
        odd_moment_3: m3,
    })
}

/// P(|T| > t) = 1 - int_{-t}^{t} f_end.
pub fn endpoint_tail(t: f64, cfg: &NumericsConfig) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let rule = t_grid(t, (t / 4.0).min(0.5), 14)?;
    let table = endpoint_table(&rule.nodes, cfg)?;
    let inner: f64 = rule
        .weights
        .iter()
        .zip(&table.values)
        .map(|(w, f)| w * f)
        .sum();
    let tail = 1.0 - inner;
    if tail < 1e-14 {
        return Err(Error::BelowResolution(format!(
            "P(|T| > {t}) = {tail} is below double-precision resolution"
        )));
    }
    Ok(tail)
}

/// CDF table of the endpoint law on [-t_max, t_max] with the given step.
pub fn model_cdf_table(cfg: &NumericsConfig, t_max: f64, step: f64) -> Result<CdfTable> {
    let nper = 6;
    let n_cells = (2.0 * t_max / step).ceil() as usize;
    let edges: Vec<f64> = (0..=n_cells)
        .map(|i| -t_max + 2.0 * t_max * i as f64 / n_cells as f64)
        .collect();
    let rule = QuadratureRule::from_edges(&edges, nper)?;
    let table = endpoint_table(&rule.nodes, cfg)?;
    let mut ps = Vec::with_capacity(edges.len());
    ps.push(0.0);
    let mut acc = 0.0;
    for cell in 0..n_cells {
        for k in 0..nper {
            let idx = cell * nper + k;
            acc += rule.weights[idx] * table.values[idx];
        }
        ps.push(acc);
    }
    // normalize the tiny truncation defect so the table is an exact CDF
    let total = *ps.last().unwrap();
    if !(total > 0.9) {
        return Err(Error::NonConvergence(format!(
            "endpoint mass {total} on [-{t_max}, {t_max}] is not near 1"
        )));
    }
    for p in &mut ps {
        *p /= total;
    }
    Ok(CdfTable { xs: edges, ps })
}

// ---------------------------------------------------------------------------
// One-sided sup law
// ---------------------------------------------------------------------------

/// Cutoff u >= peak with
/// `rate*u - (2/3) u^{3/2} <= rate*edge - (2/3) edge^{3/2} - drop`.
fn growth_cutoff(rate: f64, edge: f64, drop: f64) -> f64 {
    let f = |u: f64| rate * u - 2.0 / 3.0 * u * u.sqrt();
    let peak = (rate * rate).max(edge);
    let target = f(edge.max(0.0)) - drop;
    let mut hi = peak + 1.0;
    while f(hi) > target {
        hi += 1.0 + 0.1 * hi;
    }
    let mut a = peak;
    let mut b = hi;
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if f(mid) > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    b
}

/// Pulled-back barrier operator on [0, inf):
/// `C(x,z) = K_Ai(x+A, z+A) + R(x,z)` with
/// `R(x,z) = int_A^inf Ai(x+u) e^{2t(u-A)} Ai(2A-u+z) du`.
struct BarrierOp {
    outer: QuadratureRule,
    c: Vec<f64>,
}

impl BarrierOp {
    fn new(t: f64, a: f64, cfg: &NumericsConfig, factor: f64) -> Result<BarrierOp> {
        let edge = a + t * t;
        // the reflected term R(x,z) only starts decaying in z beyond
        // ~ 4t^2 - 2*edge; the outer grid must reach past that
        let z_reach = (4.0 * t * t - 2.0 * edge).max(0.0);
        let hi_outer = z_reach + 10.4 + cfg.trunc_pad;
        let nper = ((cfg.n_per_panel() as f64) * factor).round().max(4.0) as usize;
        let outer = QuadratureRule::gauss_on(
            ((hi_outer * 5.5) as usize).max(cfg.quad_n).min(400),
            0.0,
            hi_outer,
        )?
        .with_resolution(factor)?;
        // u integral: envelope e^{2t(u-A)} Ai(x+u); oscillation of
        // Ai(2A - u + z) grows toward the far end
        let hi_u = growth_cutoff(2.0 * t, edge, 50.0);
        let u_rule = QuadratureRule::oscillation_aware(
            edge,
            hi_u.max(edge + 4.0),
            |u| (u - 2.0 * edge).max(0.0).sqrt(),
            nper,
        )?;
        let n = outer.len();
        let mut c = vec![0.0; n * n];
        let nodes = &outer.nodes;
        c.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let x = nodes[i];
            // row factor with the exponential absorbed into the Airy scale
            let lead: Vec<f64> = u_rule
                .nodes
                .iter()
                .zip(&u_rule.weights)
                .map(|(&u, &w)| {
                    let p = airy_pair(x + u);
                    w * p.ai * (p.log_scale + 2.0 * t * (u - edge)).exp()
                })
                .collect();
            for (j, slot) in row.iter_mut().enumerate() {
                let z = nodes[j];
                let direct = k_airy(x + edge, z + edge);
                let refl: f64 = u_rule
                    .nodes
                    .iter()
                    .zip(&lead)
                    .map(|(&u, &l)| l * ai(2.0 * edge - u + z))
                    .sum();
                *slot = direct + refl;
            }
        });
        Ok(BarrierOp { outer, c })
    }

    fn det(&self) -> Result<f64> {
        let n = self.outer.len();
        let sw: Vec<f64> = self.outer.weights.iter().map(|w| w.sqrt()).collect();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] =
                    (i == j) as usize as f64 - sw[i] * sw[j] * self.c[i * n + j];
            }
        }
        Ok(fredholm::Lu::factor(m, n)?.det())
    }
}

/// P(A_2(x) - x^2 <= a for all x <= t), as det(I - K_Ai Q K_Ai) pulled back
/// to [0, inf).
pub fn one_sided_sup_cdf(t: f64, a: f64, cfg: &NumericsConfig) -> Result<DetResult> {
    cfg.validate()?;
    if !(0.25..=3.0).contains(&t) {
        return Err(Error::Config(format!("t must be in [0.25, 3], got {t}")));
    }
    if !(-2.0..=10.0).contains(&a) {
        return Err(Error::Config(format!("a must be in [-2, 10], got {a}")));
    }
    let out = fredholm::refine_det(cfg.quad_n, cfg.tol, |factor| {
        BarrierOp::new(t, a, cfg, factor)?.det()
    })?;
    check_cdf_range(out.value, cfg.tol, "one-sided sup cdf")?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Joint sup/point law: scalar and matrix routes
// ---------------------------------------------------------------------------

fn sup_point_preconditions(t: f64, s: f64, a: f64, b: f64) -> Result<()> {
    if !(0.5..=2.0).contains(&t) || !(0.5..=2.0).contains(&s) {
        return Err(Error::Config(format!(
            "t and s must be in [0.5, 2], got t={t}, s={s}"
        )));
    }
    if !(0.0..=30.0).contains(&a) || !(0.0..=30.0).contains(&b) {
        return Err(Error::Config(format!(
            "levels must be in [0, 30], got a={a}, b={b}"
        )));
    }
    Ok(())
}

/// P(A_2(x) - x^2 <= a for all x <= t, A_2(t+s) - (t+s)^2 <= b).
pub fn joint_sup_point_cdf(
    t: f64,
    s: f64,
    a: f64,
    b: f64,
    cfg: &NumericsConfig,
    route: SupPointRoute,
) -> Result<DetResult> {
    cfg.validate()?;
    sup_point_preconditions(t, s, a, b)?;
    let out = match route {
        SupPointRoute::Matrix => {
            let blocks = q_composed_kernels(a, t, s, b)?;
            let e00 = |x: f64, y: f64| blocks.entry(0, 0, x, y);
            let e01 = |x: f64, y: f64| blocks.entry(0, 1, x, y);
            let e10 = |x: f64, y: f64| blocks.entry(1, 0, x, y);
            let e11 = |x: f64, y: f64| blocks.entry(1, 1, x, y);
            let hi1 = growth_cutoff(2.0 * t, blocks.p1_edge, 45.0) - blocks.p1_edge;
            let hi2 = growth_cutoff(2.0 * t, blocks.p2_edge, 45.0) - blocks.p2_edge;
            let nper = cfg.n_per_panel();
            let r1 = QuadratureRule::oscillation_aware(
                blocks.p1_edge,
                blocks.p1_edge + hi1.max(4.0),
                |x| (x - 2.0 * blocks.p1_edge).max(0.0).sqrt(),
                nper,
            )?;
            let r2 = QuadratureRule::oscillation_aware(
                blocks.p2_edge,
                blocks.p2_edge + hi2.max(4.0),
                |x| (x - 2.0 * blocks.p2_edge).max(0.0).sqrt(),
                nper,
            )?;
            let bk = BlockKernel {
                entries: [[&e00, &e01], [&e10, &e11]],
                domains: [r1.interval, r2.interval],
            };
            det_block2(&bk, (&r1, &r2), cfg.tol)?
        }
        SupPointRoute::Scalar => fredholm::refine_det(cfg.quad_n, cfg.tol, |factor| {
            scalar_sup_point_det(t, s, a, b, cfg, factor)
        })?,
    };
    check_cdf_range(out.value, cfg.tol, "joint sup/point cdf")?;
    Ok(out)
}

/// Scalar route `det(I - C)` on [0, inf) with `C = C1 - C2 + C3`:
/// the operator `K_Ai Q K_Ai - K_Ai Q E_- P_2 T_+ + T_- P_2 T_+` pulled back
/// through `K_Ai = B_0 P_0 B_0` (and `T_± = e^{∓sH}K_Ai`, `E_-` the kernel
/// of `e^{-sH}`), all inner integrals running over half-lines where the
/// integrands decay.
fn scalar_sup_point_det(
    t: f64,
    s: f64,
    a: f64,
    b: f64,
    cfg: &NumericsConfig,
    factor: f64,
) -> Result<f64> {
    let edge1 = a + t * t;
    let edge2 = b + (t + s) * (t + s);
    let nper = ((cfg.n_per_panel() as f64) * factor).round().max(4.0) as usize;
    let z_reach = (4.0 * t * t - 2.0 * edge1).max(0.0);
    let hi0 = z_reach + 10.4 + cfg.trunc_pad;
    let outer = QuadratureRule::gauss_on(
        ((hi0 * 5.5) as usize).max(cfg.quad_n).min(400),
        0.0,
        hi0,
    )?
    .with_resolution(factor)?;
    let n0 = outer.len();

    // u grid on [edge1, ...], v grid on [edge2, ...]
    let hi_u = growth_cutoff(2.0 * t, edge1, 50.0);
    let u_rule = QuadratureRule::oscillation_aware(
        edge1,
        hi_u.max(edge1 + 4.0),
        |u| (u - 2.0 * edge1).max(0.0).sqrt(),
        nper,
    )?;
    let v_rule = QuadratureRule::airy_oscillatory(edge2, edge2 + 12.0 + cfg.trunc_pad, 0.0, nper)?;
    let nu = u_rule.len();
    let nv = v_rule.len();

    // lambda grid for E_-(p, q) = int e^{s l} Ai(p+l) Ai(q+l) dl over the
    // whole line; reflected rows reach p ~ 2*edge1 - hi_u
    let arg_min = 2.0 * edge1 - u_rule.interval.1;
    let lam_hi = growth_cutoff(s, 0.0, 45.0);
    let lam = QuadratureRule::airy_oscillatory(-(45.0 / s + 8.0), lam_hi.max(4.0), arg_min, nper)?;
    let nl = lam.len();

    // E-matrices via the rank factorization A_p diag(e^{s l} w) A_q^T
    let a_u: Vec<f64> = cross_airy(&u_rule.nodes, &lam.nodes);
    let a_ur: Vec<f64> = cross_airy(
        &u_rule.nodes.iter().map(|&u| 2.0 * edge1 - u).collect::<Vec<_>>(),
        &lam.nodes,
    );
    let a_v: Vec<f64> = cross_airy(&v_rule.nodes, &lam.nodes);
    let wl: Vec<f64> = lam
        .nodes
        .iter()
        .zip(&lam.weights)
        .map(|(&l, &w)| w * (s * l).exp())
        .collect();
    // QE[u][v] = E(u,v) + e^{2t(u-edge1)} E(2 edge1 - u, v)
    let mut qe = vec![0.0; nu * nv];
    qe.par_chunks_mut(nv).enumerate().for_each(|(k, row)| {
        let refl_amp = (2.0 * t * (u_rule.nodes[k] - edge1)).exp();
        for (l, slot) in row.iter_mut().enumerate() {
            let mut direct = 0.0;
            let mut refl = 0.0;
            for q in 0..nl {
                let w = wl[q];
                direct += a_u[k * nl + q] * w * a_v[l * nl + q];
                refl += a_ur[k * nl + q] * w * a_v[l * nl + q];
            }
            *slot = direct + refl_amp * refl;
        }
    });

    // C2 = [B0_xu (w_u) QE (w_v) B0_vz] e^{-s z}
    let b0_xu = cross_airy(&outer.nodes, &u_rule.nodes);
    let b0_vz = cross_airy(&v_rule.nodes, &outer.nodes);
    let mut mid = vec![0.0; n0 * nv]; // B0_xu w_u QE
    mid.par_chunks_mut(nv).enumerate().for_each(|(i, row)| {
        for (l, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..nu {
                acc += b0_xu[i * nu + k] * u_rule.weights[k] * qe[k * nv + l];
            }
            *slot = acc;
        }
    });

    let mut c = vec![0.0; n0 * n0];
    c.par_chunks_mut(n0).enumerate().for_each(|(i, row)| {
        let x = outer.nodes[i];
        // reflected part of C1, with log-scaled row factors
        let lead: Vec<f64> = u_rule
            .nodes
            .iter()
            .zip(&u_rule.weights)
            .map(|(&u, &w)| {
                let p = airy_pair(x + u);
                w * p.ai * (p.log_scale + 2.0 * t * (u - edge1)).exp()
            })
            .collect();
        for (j, slot) in row.iter_mut().enumerate() {
            let z = outer.nodes[j];
            let c1 = k_airy(x + edge1, z + edge1)
                + u_rule
                    .nodes
                    .iter()
                    .zip(&lead)
                    .map(|(&u, &l)| l * ai(2.0 * edge1 - u + z))
                    .sum::<f64>();
            let mut c2 = 0.0;
            for l in 0..nv {
                c2 += mid[i * nv + l] * v_rule.weights[l] * b0_vz[l * n0 + j];
            }
            c2 *= (-s * z).exp();
            let c3 = (s * (x - z)).exp() * k_airy(x + edge2, z + edge2);
            *slot = c1 - c2 + c3;
        }
    });

    let sw: Vec<f64> = outer.weights.iter().map(|w| w.sqrt()).collect();
    let mut m = vec![0.0; n0 * n0];
    for i in 0..n0 {
        for j in 0..n0 {
            m[i * n0 + j] = (i == j) as usize as f64 - sw[i] * sw[j] * c[i * n0 + j];
        }
    }
    Ok(fredholm::Lu::factor(m, n0)?.det())
}

/// Row-major matrix of Ai(p_i + q_j).
fn cross_airy(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() * q.len()];
    out.par_chunks_mut(q.len()).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = ai(p[i] + q[j]);
        }
    });
    out
}

// ---------------------------------------------------------------------------
// Extended-kernel two-time law
// ---------------------------------------------------------------------------

/// P(A_2(t0) <= x0, A_2(t1) <= x1) via the extended Airy kernel (two times).
pub fn two_time_cdf(
    t0: f64,
    x0: f64,
    t1: f64,
    x1: f64,
    cfg: &NumericsConfig,
) -> Result<DetResult> {
    cfg.validate()?;
    let delta = t1 - t0;
    if !(delta >= 0.05) {
        return Err(Error::Config(format!(
            "time gap must be >= 0.05, got {delta}"
        )));
    }
    if !x0.is_finite() || !x1.is_finite() {
        return Err(Error::Domain("levels must be finite".into()));
    }
    let out = fredholm::refine_det(2 * cfg.quad_n, cfg.tol, |factor| {
        two_time_det(delta, x0, x1, cfg, factor)
    })?;
    check_cdf_range(out.value, cfg.tol, "two-time cdf")?;
    Ok(out)
}

fn two_time_det(delta: f64, x0: f64, x1: f64, cfg: &NumericsConfig, factor: f64) -> Result<f64> {
    let nper = ((cfg.n_per_panel() as f64) * factor).round().max(4.0) as usize;
    let hi = 10.4 + cfg.trunc_pad;
    let r0 = QuadratureRule::airy_oscillatory(x0, x0 + hi - x0.min(0.0), 0.0, nper)?;
    let r1 = QuadratureRule::airy_oscillatory(x1, x1 + hi - x1.min(0.0), 0.0, nper)?;
    let (n0, n1) = (r0.len(), r1.len());
    let floor = x0.min(x1);

    // off-diagonal blocks by rank factorization over the lambda grids
    let lam_neg = QuadratureRule::airy_oscillatory(-(45.0 / delta + 8.0), 0.0, floor, nper.max(10))?;
    let lam_pos = {
        let hi_l = growth_cutoff(0.0, 0.0, 45.0).max(4.0);
        QuadratureRule::airy_oscillatory(0.0, hi_l, floor, nper.max(10))?
    };
    let a0n = cross_airy(&r0.nodes, &lam_neg.nodes);
    let a1n = cross_airy(&r1.nodes, &lam_neg.nodes);
    let wn: Vec<f64> = lam_neg
        .nodes
        .iter()
        .zip(&lam_neg.weights)
        .map(|(&l, &w)| w * (delta * l).exp())
        .collect();
    let a0p = cross_airy(&r0.nodes, &lam_pos.nodes);
    let a1p = cross_airy(&r1.nodes, &lam_pos.nodes);
    let wp: Vec<f64> = lam_pos
        .nodes
        .iter()
        .zip(&lam_pos.weights)
        .map(|(&l, &w)| w * (-delta * l).exp())
        .collect();

    let n = n0 + n1;
    let sw: Vec<f64> = r0
        .weights
        .iter()
        .chain(r1.weights.iter())
        .map(|w| w.sqrt())
        .collect();
    let nl_n = lam_neg.len();
    let nl_p = lam_pos.len();
    let mut m = vec![0.0; n * n];
    m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            let v = if i < n0 && j < n0 {
                k_airy(r0.nodes[i], r0.nodes[j])
            } else if i < n0 {
                // K_ext(t0, .; t1, .) = - int_{-inf}^0 e^{delta l} Ai Ai
                let jj = j - n0;
                let mut acc = 0.0;
                for q in 0..nl_n {
                    acc += a0n[i * nl_n + q] * wn[q] * a1n[jj * nl_n + q];
                }
                -acc
            } else if j < n0 {
                let ii = i - n0;
                let mut acc = 0.0;
                for q in 0..nl_p {
                    acc += a1p[ii * nl_p + q] * wp[q] * a0p[j * nl_p + q];
                }
                acc
            } else {
                k_airy(r1.nodes[i - n0], r1.nodes[j - n0])
            };
            *slot = (i == j) as usize as f64 - sw[i] * sw[j] * v;
        }
    });
    Ok(fredholm::Lu::factor(m, n)?.det())
}
