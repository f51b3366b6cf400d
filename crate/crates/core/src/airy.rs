//! Evaluation of the Airy function Ai and its derivative on the real line.
//!
//! Four regimes, all with fixed, deterministic truncation orders:
//!
//! * `[-4, 3]` — Maclaurin series. On the positive side the series loses
//!   roughly `e^{(4/3)x^{3/2}}` digits to cancellation, which caps its use
//!   near 3; on the negative side it is healthy to -4.
//! * `(3, 26]` and `[-9.5, -4)` — piecewise Taylor tables produced by
//!   marching the defining ODE `y'' = x y`. The positive table is marched
//!   downward from a seed at 26 (the direction in which Ai is the growing
//!   solution, so the march is stable); the negative table is marched from 0
//!   where the series is exact to machine precision.
//! * beyond — asymptotic expansions, exponentially scaled on the right and
//!   in oscillatory (sine/cosine) form on the left.
//!
//! Everything downstream consumes [`airy_pair`], which reports mantissas
//! together with a common log scale so that kernels multiplying Ai by large
//! exponentials never form out-of-range intermediates.

use crate::error::{ensure_finite, Result};
use crate::quadrature::QuadratureRule;
use once_cell::sync::Lazy;

/// Ai(0) = 3^{-2/3} / Gamma(2/3)
const AI_ZERO: f64 = 0.355028053887817239260063186;
/// Ai'(0) = -3^{-1/3} / Gamma(1/3)
const AIP_ZERO: f64 = -0.258819403792806798405183560;

const SQRT_PI: f64 = 1.7724538509055160272981674833;
const FRAC_PI_4: f64 = std::f64::consts::FRAC_PI_4;

/// Crossover points between evaluation regimes.
const MACLAURIN_HI: f64 = 3.0;
const MACLAURIN_LO: f64 = -4.0;
const TABLE_HI: f64 = 26.0;
const TABLE_LO: f64 = -9.5;
const TABLE_STEP: f64 = 0.5;

/// Ai or Ai' at a point, in plain and exponentially scaled form.
///
/// For `x > 0` the scaled field holds `value * e^{(2/3)x^{3/2}}`; elsewhere
/// the two fields coincide.
#[derive(Debug, Clone, Copy)]
pub struct AiryValue {
    pub value: f64,
    pub log_scaled: f64,
}

/// Ai and Ai' at one point with a shared log scale:
/// `Ai(x) = ai * e^{log_scale}` and `Ai'(x) = aip * e^{log_scale}`,
/// where `log_scale = -(2/3)x^{3/2}` for `x > 0` and `0` otherwise.
#[derive(Debug, Clone, Copy)]
pub struct AiryPair {
    pub ai: f64,
    pub aip: f64,
    pub log_scale: f64,
}

pub fn airy_ai(x: f64) -> Result<AiryValue> {
    ensure_finite(x, "airy argument")?;
    let p = airy_pair(x);
    Ok(AiryValue {
        value: p.ai * p.log_scale.exp(),
        log_scaled: p.ai,
    })
}

pub fn airy_ai_prime(x: f64) -> Result<AiryValue> {
    ensure_finite(x, "airy argument")?;
    let p = airy_pair(x);
    Ok(AiryValue {
        value: p.aip * p.log_scale.exp(),
        log_scaled: p.aip,
    })
}

/// Unscaled Ai(x); underflows to 0 for x beyond ~106.
#[inline]
pub fn ai(x: f64) -> f64 {
    let p = airy_pair(x);
    p.ai * p.log_scale.exp()
}

/// Unscaled Ai'(x).
#[inline]
pub fn ai_prime(x: f64) -> f64 {
    let p = airy_pair(x);
    p.aip * p.log_scale.exp()
}

pub fn airy_pair(x: f64) -> AiryPair {
    if x > TABLE_HI {
        asymptotic_pos(x)
    } else if x > MACLAURIN_HI {
        TABLES.eval_pos(x)
    } else if x >= MACLAURIN_LO {
        let (ai, aip) = maclaurin(x);
        if x > 0.0 {
            // keep the contract uniform: positive arguments report the
            // exponentially scaled mantissa (harmless here, e^zeta <= e^3.5)
            let zeta = 2.0 / 3.0 * x * x.sqrt();
            let s = zeta.exp();
            AiryPair {
                ai: ai * s,
                aip: aip * s,
                log_scale: -zeta,
            }
        } else {
            AiryPair {
                ai,
                aip,
                log_scale: 0.0,
            }
        }
    } else if x >= TABLE_LO {
        TABLES.eval_neg(x)
    } else {
        asymptotic_neg(x)
    }
}

/// Residual of the convolution identity
/// `int Ai(a+u) Ai(b-u) du = 2^{-1/3} Ai(2^{-1/3}(a+b))`,
/// computed with this module's own panel quadrature.
pub fn airy_convolution_check(a: f64, b: f64) -> Result<f64> {
    ensure_finite(a, "a")?;
    ensure_finite(b, "b")?;
    let reach = 30.0 + a.abs().max(b.abs());
    let rule = QuadratureRule::composite(-reach, reach, 0.5, 12)?;
    let integral: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| w * ai(a + u) * ai(b - u))
        .sum();
    let rhs = 2f64.powf(-1.0 / 3.0) * ai(2f64.powf(-1.0 / 3.0) * (a + b));
    Ok((integral - rhs).abs())
}

// ---------------------------------------------------------------------------
// Maclaurin series
// ---------------------------------------------------------------------------

/// Ai = Ai(0) f(x) + Ai'(0) g(x) with
/// f = sum A_k x^{3k},  A_{k+1} = A_k / ((3k+2)(3k+3)),
/// g = sum B_k x^{3k+1}, B_{k+1} = B_k / ((3k+3)(3k+4)).
fn maclaurin(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let x3 = x2 * x;
    let mut a = 1.0; // A_k x^{3k}
    let mut f = 1.0;
    let mut fp = 0.0;
    let mut b0 = 1.0; // B_k x^{3k}
    let mut g = x;
    let mut gp = 1.0;
    for k in 0..60usize {
        let kf = k as f64;
        let d12 = (3.0 * kf + 2.0) * (3.0 * kf + 3.0);
        fp += a * x2 * (3.0 * kf + 3.0) / d12; // 3(k+1) A_{k+1} x^{3k+2}
        a *= x3 / d12;
        f += a;
        let d34 = (3.0 * kf + 3.0) * (3.0 * kf + 4.0);
        b0 *= x3 / d34;
        g += b0 * x;
        gp += (3.0 * kf + 4.0) * b0;
        if a.abs() < 1e-18 * f.abs() && (b0 * x).abs() < 1e-18 * g.abs().max(1e-300) {
            break;
        }
    }
    (AI_ZERO * f + AIP_ZERO * g, AI_ZERO * fp + AIP_ZERO * gp)
}

// ---------------------------------------------------------------------------
// Taylor tables from ODE marching
// ---------------------------------------------------------------------------

const TAYLOR_ORDER: usize = 28;

/// Taylor coefficients of a solution of y'' = x y around x0, from (y, y').
fn taylor_coeffs(x0: f64, y: f64, yp: f64) -> [f64; TAYLOR_ORDER + 1] {
    let mut c = [0.0; TAYLOR_ORDER + 1];
    c[0] = y;
    c[1] = yp;
    c[2] = x0 * c[0] / 2.0;
    for n in 1..TAYLOR_ORDER - 1 {
        c[n + 2] = (x0 * c[n] + c[n - 1]) / (((n + 1) * (n + 2)) as f64);
    }
    c
}

fn taylor_eval(c: &[f64; TAYLOR_ORDER + 1], h: f64) -> (f64, f64) {
    let mut y = 0.0;
    let mut yp = 0.0;
    for n in (1..=TAYLOR_ORDER).rev() {
        y = y * h + c[n];
        yp = yp * h + n as f64 * c[n];
    }
    (y * h + c[0], yp)
}

struct AiryTables {
    /// (Ai, Ai') at 3.0 + 0.5 k, k = 0..=46, unscaled.
    pos: Vec<(f64, f64)>,
    /// (Ai, Ai') at -0.5 k, k = 0..=19.
    neg: Vec<(f64, f64)>,
}

static TABLES: Lazy<AiryTables> = Lazy::new(AiryTables::build);

impl AiryTables {
    fn build() -> Self {
        let n_pos = ((TABLE_HI - MACLAURIN_HI) / TABLE_STEP).round() as usize + 1;
        let mut pos = vec![(0.0, 0.0); n_pos];
        // Seed at 26 from the scaled asymptotic series; Ai(26) is a normal f64.
        let seed = asymptotic_pos(TABLE_HI);
        let e = seed.log_scale.exp();
        pos[n_pos - 1] = (seed.ai * e, seed.aip * e);
        // Downward march: Ai grows in this direction, so errors stay relative.
        for k in (0..n_pos - 1).rev() {
            let x0 = MACLAURIN_HI + TABLE_STEP * (k + 1) as f64;
            let (y, yp) = pos[k + 1];
            let c = taylor_coeffs(x0, y, yp);
            pos[k] = taylor_eval(&c, -TABLE_STEP);
        }
        let n_neg = (-TABLE_LO / TABLE_STEP).round() as usize + 1;
        let mut neg = vec![(0.0, 0.0); n_neg];
        neg[0] = (AI_ZERO, AIP_ZERO);
        for k in 1..n_neg {
            let x0 = -TABLE_STEP * (k - 1) as f64;
            let (y, yp) = neg[k - 1];
            let c = taylor_coeffs(x0, y, yp);
            neg[k] = taylor_eval(&c, -TABLE_STEP);
        }
        AiryTables { pos, neg }
    }

    fn eval_pos(&self, x: f64) -> AiryPair {
        let idx = (((x - MACLAURIN_HI) / TABLE_STEP).round() as usize).min(self.pos.len() - 1);
        let x0 = MACLAURIN_HI + TABLE_STEP * idx as f64;
        let (y, yp) = self.pos[idx];
        let c = taylor_coeffs(x0, y, yp);
        let (ai, aip) = taylor_eval(&c, x - x0);
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        let s = zeta.exp();
        AiryPair {
            ai: ai * s,
            aip: aip * s,
            log_scale: -zeta,
        }
    }

    fn eval_neg(&self, x: f64) -> AiryPair {
        let idx = ((-x / TABLE_STEP).round() as usize).min(self.neg.len() - 1);
        let x0 = -TABLE_STEP * idx as f64;
        let (y, yp) = self.neg[idx];
        let c = taylor_coeffs(x0, y, yp);
        let (ai, aip) = taylor_eval(&c, x - x0);
        AiryPair {
            ai,
            aip,
            log_scale: 0.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Asymptotic expansions
// ---------------------------------------------------------------------------

const ASYMP_TERMS: usize = 16;

/// u_k and v_k coefficients of the standard Airy asymptotic series.
static UV: Lazy<([f64; ASYMP_TERMS], [f64; ASYMP_TERMS])> = Lazy::new(|| {
    let mut u = [1.0; ASYMP_TERMS];
    let mut v = [1.0; ASYMP_TERMS];
    for k in 1..ASYMP_TERMS {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / (216.0 * kf * (2.0 * kf - 1.0));
        v[k] = u[k] * (6.0 * kf + 1.0) / (1.0 - 6.0 * kf);
    }
    (u, v)
});

fn asymptotic_pos(x: f64) -> AiryPair {
    let (u, v) = &*UV;
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let mut su = 0.0;
    let mut sv = 0.0;
    let mut pw = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..ASYMP_TERMS {
        let term = u[k] * pw;
        if term.abs() > prev {
            break;
        }
        su += if k % 2 == 0 { term } else { -term };
        sv += if k % 2 == 0 { v[k] * pw } else { -v[k] * pw };
        prev = term.abs();
        pw /= zeta;
        if term.abs() < 1e-18 {
            break;
        }
    }
    let root4 = x.sqrt().sqrt();
    AiryPair {
        ai: su / (2.0 * SQRT_PI * root4),
        aip: -root4 * sv / (2.0 * SQRT_PI),
        log_scale: -zeta,
    }
}

fn asymptotic_neg(x: f64) -> AiryPair {
    let (u, v) = &*UV;
    let z = -x;
    let xi = 2.0 / 3.0 * z * z.sqrt();
    // even/odd splits of the series, with alternating signs in xi^{-2}
    let mut ue = 0.0;
    let mut uo = 0.0;
    let mut ve = 0.0;
    let mut vo = 0.0;
    let xi2 = xi * xi;
    let mut pw = 1.0; // xi^{-2k}
    for k in 0..ASYMP_TERMS / 2 {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        ue += s * u[2 * k] * pw;
        ve += s * v[2 * k] * pw;
        let pw_odd = pw / xi;
        uo += s * u[2 * k + 1] * pw_odd;
        vo += s * v[2 * k + 1] * pw_odd;
        pw /= xi2;
        if (u[2 * k] * pw).abs() < 1e-18 {
            break;
        }
    }
    let (sin_p, cos_p) = (xi - FRAC_PI_4).sin_cos();
    let root4 = z.sqrt().sqrt();
    AiryPair {
        ai: (cos_p * ue + sin_p * uo) / (SQRT_PI * root4),
        aip: root4 * (sin_p * ve - cos_p * vo) / SQRT_PI,
        log_scale: 0.0,
    }
}
