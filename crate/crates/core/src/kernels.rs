//! The integral kernels of the theory: the Airy kernel and its shifted
//! relative `B_m(x,y) = Ai(x+y+m)`, semigroup-smoothed kernels `e^{sH}K_Ai`
//! and `e^{-sH}(K_Ai - I)`, the extended (two-time) Airy kernel, the
//! rank-one `Psi` kernel entering the joint endpoint density, and the
//! parabolic reflection operator together with the conjugated 2x2 block
//! entries built from it.
//!
//! Kernels containing exponential factors evaluate in sign/log form
//! internally and recombine at the end, so entries stay representable even
//! when individual factors would overflow.

use crate::airy::{ai, airy_pair};
use crate::error::{ensure_finite, Error, Result};
use crate::logspace::{LogSum, LogVal};
use crate::quadrature::QuadratureRule;

/// 2^{1/3} and 4^{1/3}.
pub const CBRT2: f64 = 1.2599210498948731647672106073;
pub const CBRT4: f64 = 1.5874010519681994747517056392;

// ---------------------------------------------------------------------------
// Airy kernel
// ---------------------------------------------------------------------------

/// The Airy kernel `K_Ai(x,y) = int_0^inf Ai(x+l) Ai(y+l) dl`, evaluated by
/// the closed form `(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)` with a series
/// expansion across the diagonal. Symmetric by construction: arguments are
/// ordered before evaluation, so `k_airy(x,y) == k_airy(y,x)` exactly.
pub fn k_airy(x: f64, y: f64) -> f64 {
    k_airy_log(x, y).value()
}

/// Log-scaled Airy kernel; the exponent collects the Airy decay scales of
/// both arguments.
pub fn k_airy_log(x: f64, y: f64) -> LogVal {
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let px = airy_pair(x);
    let py = airy_pair(y);
    let scale = px.log_scale + py.log_scale;
    if (x - y).abs() > 2e-4 {
        LogVal::from_parts((px.ai * py.aip - px.aip * py.ai) / (x - y), scale)
    } else {
        // K(m+h, m-h) = (Ai'(m)^2 - m Ai(m)^2) + h^2 (2m Ai'^2 + Ai Ai' - 2m^2 Ai^2)/3
        let m = 0.5 * (x + y);
        let h = 0.5 * (x - y);
        let p = airy_pair(m);
        let c0 = p.aip * p.aip - m * p.ai * p.ai;
        let c2 = (2.0 * m * p.aip * p.aip + p.ai * p.aip - 2.0 * m * m * p.ai * p.ai) / 3.0;
        LogVal::from_parts(c0 + h * h * c2, 2.0 * p.log_scale)
    }
}

/// Shifted Airy kernel `B_m(x,y) = Ai(x+y+m)`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftKernel {
    pub m: f64,
}

impl ShiftKernel {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        ai(x + y + self.m)
    }
}

// ---------------------------------------------------------------------------
// Exponentially weighted Airy-product moments
// ---------------------------------------------------------------------------

/// `int e^{rate*l} Ai(x+l) Ai(y+l) dl` over the rule's interval, accumulated
/// in log space.
pub(crate) fn airy_exp_moment(x: f64, y: f64, rate: f64, rule: &QuadratureRule) -> f64 {
    let mut sum = LogSum::new();
    for (&l, &w) in rule.nodes.iter().zip(&rule.weights) {
        let a = airy_pair(x + l);
        let b = airy_pair(y + l);
        sum.add_parts(w * a.ai * b.ai, rate * l + a.log_scale + b.log_scale);
    }
    sum.value()
}

/// Rule for `int_0^inf e^{-decay_rate*l} Ai(x+l)Ai(y+l) dl` style integrals.
/// `arg_min` is the smallest Airy argument that occurs (controls the
/// oscillatory resolution), `growth` the most positive exponential rate.
pub(crate) fn lambda_rule_pos(arg_min: f64, growth: f64, nper: usize) -> Result<QuadratureRule> {
    // integrand envelope: e^{growth*l - (4/3) max(l + arg_min, 0)^{3/2}} — find
    // where it has dropped ~1e-18 relative to its peak
    let env = crate::quadrature::DecayEnvelope {
        rate: growth.max(0.0),
        airy_coeff: 4.0 / 3.0,
        onset: (-arg_min).max(0.0),
    };
    let spec = crate::quadrature::choose_truncation(0.0, env, 1e-2, 6.0)?;
    // choose_truncation caps tol at 1e-2; extend by hand for the extra drop
    let mut hi = spec.hi;
    let target = env.exponent(env_peak(&env)) - 42.0;
    while env.exponent(hi) > target {
        hi += 2.0;
    }
    QuadratureRule::airy_oscillatory(0.0, hi, arg_min, nper)
}

fn env_peak(env: &crate::quadrature::DecayEnvelope) -> f64 {
    if env.rate <= 0.0 {
        0.0
    } else {
        env.onset + (2.0 * env.rate / (3.0 * env.airy_coeff)).powi(2)
    }
}

/// Rule for `int_{-inf}^0 e^{decay_rate*l} ... dl`: truncates where the
/// exponential weight has fallen below ~1e-18 and resolves oscillation of
/// Airy factors with arguments down to `arg_min + l`.
pub(crate) fn lambda_rule_neg(decay_rate: f64, arg_min: f64, nper: usize) -> Result<QuadratureRule> {
    if decay_rate <= 0.0 {
        return Err(Error::Config(
            "negative-side lambda rule needs a positive decay rate".into(),
        ));
    }
    let lo = -(42.0 / decay_rate + 8.0);
    QuadratureRule::airy_oscillatory(lo, 0.0, arg_min, nper)
}

// ---------------------------------------------------------------------------
// Semigroup kernels
// ---------------------------------------------------------------------------

/// Semigroup-smoothed Airy kernel.
///
/// * `s > 0`: kernel of `e^{sH} K_Ai`, `int_0^inf e^{-s l} Ai(x+l)Ai(y+l) dl`.
/// * `s < 0`: kernel of `e^{-|s|H}(K_Ai - I)`,
///   `-int_{-inf}^0 e^{|s| l} Ai(x+l)Ai(y+l) dl`.
///
/// The minus sign on the second branch makes it the `t < t'` branch of the
/// extended kernel; it is fixed by the semigroup algebra
/// `e^{-sH}(K_Ai - I) = e^{-sH}K_Ai - e^{-sH}` applied to explicit kernels.
#[derive(Debug, Clone)]
pub struct SemigroupKernel {
    pub s: f64,
    rule: QuadratureRule,
}

impl SemigroupKernel {
    /// `arg_floor` is the lowest x or y the kernel will be evaluated at;
    /// it sizes the oscillatory part of the lambda rule.
    pub fn new(s: f64, arg_floor: f64) -> Result<SemigroupKernel> {
        if s == 0.0 {
            return Err(Error::Config(
                "semigroup kernel requires s != 0 (not trace class at 0)".into(),
            ));
        }
        let rule = if s > 0.0 {
            lambda_rule_pos(arg_floor, -s, 12)?
        } else {
            lambda_rule_neg(-s, arg_floor, 12)?
        };
        Ok(SemigroupKernel { s, rule })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if self.s > 0.0 {
            airy_exp_moment(x, y, -self.s, &self.rule)
        } else {
            -airy_exp_moment(x, y, -self.s, &self.rule)
        }
    }
}

/// Extended Airy kernel
/// `K_ext(t, xi; t', xi')`: the `l`-integral runs over `(0, inf)` with weight
/// `e^{-l(t-t')}` when `t >= t'` and, with a minus sign, over `(-inf, 0)`
/// when `t < t'`.
pub fn extended_kernel(t: f64, xi: f64, tp: f64, xip: f64) -> Result<f64> {
    ensure_finite(t, "t")?;
    ensure_finite(xi, "xi")?;
    ensure_finite(tp, "t'")?;
    ensure_finite(xip, "xi'")?;
    let d = t - tp;
    let floor = xi.min(xip);
    if d == 0.0 {
        return Ok(k_airy(xi, xip));
    }
    if d > 0.0 {
        let rule = lambda_rule_pos(floor, -d, 12)?;
        Ok(airy_exp_moment(xi, xip, -d, &rule))
    } else {
        let rule = lambda_rule_neg(-d, floor, 12)?;
        Ok(-airy_exp_moment(xi, xip, -d, &rule))
    }
}

// ---------------------------------------------------------------------------
// psi functions and the rank-one Psi kernel
// ---------------------------------------------------------------------------

/// `psi_{t,m}(x) = 2 e^{xt} [t Ai(x+m+t^2) + Ai'(x+m+t^2)]` in sign/log form.
pub fn psi_log(t: f64, m: f64, x: f64) -> LogVal {
    let p = airy_pair(x + m + t * t);
    LogVal::from_parts(2.0 * (t * p.ai + p.aip), x * t + p.log_scale)
}

/// Samples of `psi_{t,m}(2^{1/3} x_i)` on a rule's nodes.
#[derive(Debug, Clone)]
pub struct PsiVector {
    pub t: f64,
    pub m: f64,
    pub samples: Vec<f64>,
}

pub fn psi_vector(t: f64, m: f64, rule: &QuadratureRule) -> PsiVector {
    let samples = rule
        .nodes
        .iter()
        .map(|&x| psi_log(t, m, CBRT2 * x).value())
        .collect();
    PsiVector { t, m, samples }
}

// ---------------------------------------------------------------------------
// Reflection operator and the conjugated two-time blocks
// ---------------------------------------------------------------------------

/// The reflection part of the parabolic barrier operator
/// `Q = P_1 (I + M_{a,t} rho_{a,t})`:
/// `(Qf)(x) = 1{x >= a+t^2} [ f(x) + e^{2t(x-a-t^2)} f(2(a+t^2) - x) ]`.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionSpec {
    pub a: f64,
    pub t: f64,
}

impl ReflectionSpec {
    pub fn edge(&self) -> f64 {
        self.a + self.t * self.t
    }

    /// Applies Q to a function.
    pub fn apply(&self, f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
        let edge = self.edge();
        if x < edge {
            0.0
        } else {
            f(x) + (2.0 * self.t * (x - edge)).exp() * f(2.0 * edge - x)
        }
    }

    /// Kernel composition `(Q K)(x, y)` for a log-scaled kernel, in log form.
    pub(crate) fn compose_log(&self, k: &dyn Fn(f64, f64) -> LogVal, x: f64, y: f64) -> LogVal {
        let edge = self.edge();
        if x < edge {
            return LogVal::ZERO;
        }
        let direct = k(x, y);
        let reflected = k(2.0 * edge - x, y).scale(2.0 * self.t * (x - edge));
        direct.add(reflected)
    }
}

/// The four conjugated entries of the 2x2 matrix-kernel determinant for the
/// joint one-sided sup / single-point law: row/column weight
/// `w(x) = e^{-2tx} (1+x^2)^{-1/2}` applied as `w(x) entry(x,y) / w(y)`.
///
/// Block 1 lives on `[a+t^2, inf)`, block 2 on `[b+(t+s)^2, inf)`:
/// entries `(QK P1, Q e^{-sH}(K-I) P2; P2 e^{sH}K P1, P2 K P2)`.
pub struct TwoTimeBlocks {
    pub reflection: ReflectionSpec,
    pub s: f64,
    pub p1_edge: f64,
    pub p2_edge: f64,
    t: f64,
    lam_neg: QuadratureRule,
    lam_pos: QuadratureRule,
}

pub fn q_composed_kernels(a: f64, t: f64, s: f64, b: f64) -> Result<TwoTimeBlocks> {
    if t <= 0.0 || s <= 0.0 {
        return Err(Error::Config(format!(
            "two-time blocks need t > 0 and s > 0, got t={t}, s={s}"
        )));
    }
    let reflection = ReflectionSpec { a, t };
    let p1_edge = a + t * t;
    let p2_edge = b + (t + s) * (t + s);
    // reflected rows reach arguments near p1_edge - (domain width); size the
    // oscillatory resolution for arguments down to about -(edge + 60)
    let arg_floor = -(p1_edge + 60.0);
    Ok(TwoTimeBlocks {
        reflection,
        s,
        p1_edge,
        p2_edge,
        t,
        lam_neg: lambda_rule_neg(s, arg_floor, 12)?,
        lam_pos: lambda_rule_pos(p1_edge.min(p2_edge), -s, 12)?,
    })
}

impl TwoTimeBlocks {
    fn conj_exponent(&self, x: f64, y: f64) -> f64 {
        -2.0 * self.t * (x - y) + 0.5 * ((1.0 + y * y).ln() - (1.0 + x * x).ln())
    }

    /// `e^{-sH}(K_Ai - I)` in log form (minus the negative-side moment).
    fn s_minus_log(&self, x: f64, y: f64) -> LogVal {
        let mut sum = LogSum::new();
        for (&l, &w) in self.lam_neg.nodes.iter().zip(&self.lam_neg.weights) {
            let a = airy_pair(x + l);
            let b = airy_pair(y + l);
            sum.add_parts(-w * a.ai * b.ai, self.s * l + a.log_scale + b.log_scale);
        }
        sum.total()
    }

    /// `e^{sH} K_Ai` in log form.
    fn t_plus_log(&self, x: f64, y: f64) -> LogVal {
        let mut sum = LogSum::new();
        for (&l, &w) in self.lam_pos.nodes.iter().zip(&self.lam_pos.weights) {
            let a = airy_pair(x + l);
            let b = airy_pair(y + l);
            sum.add_parts(w * a.ai * b.ai, -self.s * l + a.log_scale + b.log_scale);
        }
        sum.total()
    }

    pub fn entry(&self, row: usize, col: usize, x: f64, y: f64) -> f64 {
        let conj = self.conj_exponent(x, y);
        let v = match (row, col) {
            (0, 0) => self.reflection.compose_log(&k_airy_log, x, y),
            (0, 1) => self
                .reflection
                .compose_log(&|p, q| self.s_minus_log(p, q), x, y),
            (1, 0) => self.t_plus_log(x, y),
            (1, 1) => k_airy_log(x, y),
            _ => panic!("block index out of range"),
        };
        v.scale(conj).value()
    }
}
