//! Gauss-Legendre rules, affine mapping, composite panels, and truncation of
//! semi-infinite integration domains for kernels with super-exponential decay.
//!
//! Semi-infinite domains are always handled by truncation to `[lo, hi]`
//! followed by Gauss-Legendre; the cutoff comes from an explicit decay
//! envelope of the form `exp(c x - kappa (x - x0)^{3/2})`.

use crate::error::{Error, Result};

/// Nodes and weights realizing an integral over a finite interval.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
    kind: RuleKind,
}

#[derive(Debug, Clone)]
enum RuleKind {
    Gauss { n: usize },
    Panels { edges: Vec<f64>, n_per_panel: usize },
}

impl QuadratureRule {
    /// Gauss-Legendre rule with `n` nodes on (-1, 1).
    ///
    /// Nodes are Newton-refined roots of the Legendre polynomial, started
    /// from the Chebyshev-angle estimate; no tabulated data.
    pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
        if n < 1 || n > 2000 {
            return Err(Error::Config(format!(
                "gauss_legendre order must be in [1, 2000], got {n}"
            )));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for k in 0..n.div_ceil(2) {
            // initial guess for the k-th root (descending order)
            let mut x = (std::f64::consts::PI * (4.0 * k as f64 + 3.0) / (4.0 * nf + 2.0)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            // polish once more and take a fresh derivative at the root
            let (p, d) = legendre_with_derivative(n, x);
            x -= p / d;
            let dp = legendre_with_derivative(n, x).1;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[n - 1 - k] = x;
            weights[n - 1 - k] = w;
            nodes[k] = -x;
            weights[k] = w;
        }
        if n % 2 == 1 {
            let mid = n / 2;
            nodes[mid] = 0.0;
            let dp = legendre_with_derivative(n, 0.0).1;
            weights[mid] = 2.0 / (dp * dp);
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            interval: (-1.0, 1.0),
            kind: RuleKind::Gauss { n },
        })
    }

    /// Gauss-Legendre rule mapped onto (lo, hi).
    pub fn gauss_on(n: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
        Self::gauss_legendre(n)?.map_to(lo, hi)
    }

    /// Affine image of the rule on (lo, hi).
    pub fn map_to(&self, lo: f64, hi: f64) -> Result<QuadratureRule> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!(
                "invalid target interval ({lo}, {hi})"
            )));
        }
        let (a, b) = self.interval;
        let scale = (hi - lo) / (b - a);
        let kind = match &self.kind {
            RuleKind::Gauss { n } => RuleKind::Gauss { n: *n },
            RuleKind::Panels { edges, n_per_panel } => RuleKind::Panels {
                edges: edges.iter().map(|&x| lo + (x - a) * scale).collect(),
                n_per_panel: *n_per_panel,
            },
        };
        Ok(QuadratureRule {
            nodes: self.nodes.iter().map(|&x| lo + (x - a) * scale).collect(),
            weights: self.weights.iter().map(|&w| w * scale).collect(),
            interval: (lo, hi),
            kind,
        })
    }

    /// Composite rule: panels of width `panel_width` each carrying an
    /// `n_per_panel`-point Gauss-Legendre rule. Used where the integrand
    /// oscillates (Airy factors at negative arguments).
    pub fn composite(lo: f64, hi: f64, panel_width: f64, n_per_panel: usize) -> Result<QuadratureRule> {
        if !(lo < hi) {
            return Err(Error::Config(format!("invalid interval ({lo}, {hi})")));
        }
        if panel_width <= 0.0 {
            return Err(Error::Config("panel width must be positive".into()));
        }
        let n_panels = ((hi - lo) / panel_width).ceil().max(1.0) as usize;
        let edges: Vec<f64> = (0..=n_panels)
            .map(|i| lo + (hi - lo) * i as f64 / n_panels as f64)
            .collect();
        Self::from_edges(&edges, n_per_panel)
    }

    /// Composite rule over explicit panel edges, `n_per_panel` Gauss nodes in
    /// each panel.
    pub fn from_edges(edges: &[f64], n_per_panel: usize) -> Result<QuadratureRule> {
        if edges.len() < 2 || edges.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Config("panel edges must be strictly increasing".into()));
        }
        let base = Self::gauss_legendre(n_per_panel)?;
        let mut nodes = Vec::with_capacity((edges.len() - 1) * n_per_panel);
        let mut weights = Vec::with_capacity((edges.len() - 1) * n_per_panel);
        for p in edges.windows(2) {
            let r = base.map_to(p[0], p[1])?;
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            interval: (edges[0], *edges.last().unwrap()),
            kind: RuleKind::Panels {
                edges: edges.to_vec(),
                n_per_panel,
            },
        })
    }

    /// Panels sized by a local frequency estimate (radians per unit length):
    /// each panel spans at most ~8 radians, which an inner 12-16 point Gauss
    /// rule resolves far below the tolerances used here.
    pub fn oscillation_aware(
        lo: f64,
        hi: f64,
        freq: impl Fn(f64) -> f64,
        n_per_panel: usize,
    ) -> Result<QuadratureRule> {
        if !(lo < hi) {
            return Err(Error::Config(format!("invalid interval ({lo}, {hi})")));
        }
        let mut edges = vec![lo];
        let mut x = lo;
        while x < hi {
            let f = freq(x).max(freq((x + 1.0).min(hi)));
            let step = (8.0 / (1.0 + f)).min(2.0);
            x = (x + step).min(hi);
            edges.push(x);
        }
        Self::from_edges(&edges, n_per_panel)
    }

    /// Panels sized to resolve Airy oscillation: an integrand containing
    /// `Ai(arg_min + x)` oscillates with local frequency
    /// `sqrt(max(0, -(arg_min + x)))`.
    pub fn airy_oscillatory(lo: f64, hi: f64, arg_min: f64, n_per_panel: usize) -> Result<QuadratureRule> {
        Self::oscillation_aware(lo, hi, |x| (-(arg_min + x)).max(0.0).sqrt(), n_per_panel)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Same interval and panel structure, node count scaled by `factor`
    /// (coarsening uses `factor < 1`). Composite rules rescale their
    /// per-panel order.
    pub fn with_resolution(&self, factor: f64) -> Result<QuadratureRule> {
        let (lo, hi) = self.interval;
        match &self.kind {
            RuleKind::Gauss { n } => {
                let m = ((*n as f64 * factor).round() as usize).max(2);
                Self::gauss_on(m, lo, hi)
            }
            RuleKind::Panels { edges, n_per_panel } => {
                let m = ((*n_per_panel as f64 * factor).round() as usize).max(2);
                Self::from_edges(edges, m)
            }
        }
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Decay envelope `exp(rate * x - airy_coeff * max(x - onset, 0)^{3/2})`,
/// with `x` measured from the left end of the integration domain.
///
/// `airy_coeff` is 2/3 per Airy factor present in the integrand; `rate`
/// collects explicit exponential growth such as `e^{2tx}`.
#[derive(Debug, Clone, Copy)]
pub struct DecayEnvelope {
    pub rate: f64,
    pub airy_coeff: f64,
    pub onset: f64,
}

impl DecayEnvelope {
    pub fn airy_squared() -> Self {
        DecayEnvelope {
            rate: 0.0,
            airy_coeff: 4.0 / 3.0,
            onset: 0.0,
        }
    }

    pub fn exponent(&self, x: f64) -> f64 {
        let u = (x - self.onset).max(0.0);
        self.rate * x - self.airy_coeff * u * u.sqrt()
    }

    /// Location of the envelope maximum on [0, inf).
    fn peak(&self) -> f64 {
        if self.rate <= 0.0 {
            0.0
        } else {
            // d/dx [rate x - kappa (x-onset)^{3/2}] = 0
            self.onset + (2.0 * self.rate / (3.0 * self.airy_coeff)).powi(2)
        }
    }
}

/// Truncation of a semi-infinite domain `[lo, lo + ...)`.
#[derive(Debug, Clone, Copy)]
pub struct TruncationSpec {
    pub lo: f64,
    pub hi: f64,
    pub decay_rate_hint: f64,
    pub pad: f64,
}

/// Picks `hi` so the decay envelope at `hi` has dropped below `tol` times
/// its maximum over `[0, inf)` (offsets measured from `lo`), then pads.
///
/// For envelopes with exponential growth the cutoff necessarily lies beyond
/// the stationary point of the exponent.
pub fn choose_truncation(lo: f64, envelope: DecayEnvelope, tol: f64, pad: f64) -> Result<TruncationSpec> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::Config(format!("tol must be in (0, 1e-2], got {tol}")));
    }
    if pad < 0.0 {
        return Err(Error::Config("pad must be nonnegative".into()));
    }
    if envelope.airy_coeff <= 0.0 {
        return Err(Error::Config(
            "envelope does not decay (airy_coeff <= 0)".into(),
        ));
    }
    let peak = envelope.peak();
    let target = envelope.exponent(peak) + tol.ln();
    // expand then bisect for exponent(x) = target, x >= peak
    let mut hi = (peak + 1.0).max(1.0);
    while envelope.exponent(hi) > target {
        hi *= 1.5;
        if hi > 1e9 {
            return Err(Error::Config("envelope decays too slowly".into()));
        }
    }
    let mut a = peak.max(0.0);
    let mut b = hi;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if envelope.exponent(mid) > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(TruncationSpec {
        lo,
        hi: lo + b + pad,
        decay_rate_hint: envelope.airy_coeff,
        pad,
    })
}
