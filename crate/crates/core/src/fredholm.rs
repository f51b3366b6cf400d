//! Nystrom discretization of Fredholm determinants det(I - K), resolvent
//! application, rank-one traces, 2x2 block-kernel determinants and
//! Hilbert-Schmidt norms.
//!
//! The symmetric weight convention is used throughout: the discretized
//! operator is `W_K[i][j] = sqrt(w_i w_j) K(x_i, x_j)`, which preserves
//! symmetry of symmetric kernels. Determinants come from an in-place LU
//! factorization with partial pivoting, with the pivot sign tracked exactly.
//! Convergence is reported by recomputing on a coarser grid (half the
//! nodes); one further refinement is attempted before flagging failure.

use crate::error::{Error, Result};
use crate::quadrature::{DecayEnvelope, QuadratureRule};
use rayon::prelude::*;

/// A real kernel (x, y) -> K(x, y) with the metadata needed to build rules:
/// a bounding box and a decay descriptor per axis.
pub struct KernelFn<'a> {
    pub eval: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    pub domain: (f64, f64),
    pub decay: DecayEnvelope,
}

impl<'a> KernelFn<'a> {
    pub fn new(eval: &'a (dyn Fn(f64, f64) -> f64 + Sync), domain: (f64, f64)) -> Self {
        KernelFn {
            eval,
            domain,
            decay: DecayEnvelope::airy_squared(),
        }
    }
}

/// Determinant value together with its grid-refinement evidence.
#[derive(Debug, Clone, Copy)]
pub struct DetResult {
    pub value: f64,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub delta: f64,
    pub converged: bool,
}

/// 2x2 matrix kernel; diagonal blocks live on the square of their own
/// domain, off-diagonal blocks on the corresponding row/column product.
pub struct BlockKernel<'a> {
    pub entries: [[&'a (dyn Fn(f64, f64) -> f64 + Sync); 2]; 2],
    pub domains: [(f64, f64); 2],
}

// ---------------------------------------------------------------------------
// Dense LU with partial pivoting
// ---------------------------------------------------------------------------

pub(crate) struct Lu {
    a: Vec<f64>,
    n: usize,
    piv: Vec<usize>,
    sign: f64,
}

impl Lu {
    /// Factors the matrix in place. Returns an error on a hard zero pivot.
    pub(crate) fn factor(mut a: Vec<f64>, n: usize) -> Result<Lu> {
        let mut piv = vec![0usize; n];
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut max = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > max {
                    max = v;
                    p = i;
                }
            }
            if max == 0.0 {
                return Err(Error::Singular(format!("zero pivot at column {k}")));
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let m = a[i * n + k] / d;
                a[i * n + k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= m * a[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { a, n, piv, sign })
    }

    pub(crate) fn det(&self) -> f64 {
        let mut d = self.sign;
        for k in 0..self.n {
            d *= self.a[k * self.n + k];
        }
        d
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for i in k + 1..n {
                let m = self.a[i * n + k];
                if m != 0.0 {
                    x[i] -= m * x[k];
                }
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.a[k * n + k];
            for i in 0..k {
                x[i] -= self.a[i * n + k] * x[k];
            }
        }
        x
    }
}

/// Assembles `I - sqrt(w_i w_j) K(x_i, x_j)`, checking finiteness.
///
/// Rows are filled in parallel; every entry is written exactly once so the
/// result is independent of scheduling.
pub(crate) fn nystrom_matrix(
    k: &(dyn Fn(f64, f64) -> f64 + Sync),
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let n = rule.len();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut a = vec![0.0; n * n];
    let bad = a
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let xi = rule.nodes[i];
            for (j, slot) in row.iter_mut().enumerate() {
                let v = k(xi, rule.nodes[j]);
                if !v.is_finite() {
                    return Some((xi, rule.nodes[j]));
                }
                *slot = (i == j) as usize as f64 - sw[i] * sw[j] * v;
            }
            None
        })
        .find_map_any(|x| x);
    if let Some((x, y)) = bad {
        return Err(Error::NonFiniteKernel { x, y });
    }
    Ok(a)
}

fn det_on_rule(k: &(dyn Fn(f64, f64) -> f64 + Sync), rule: &QuadratureRule) -> Result<f64> {
    let a = nystrom_matrix(k, rule)?;
    Ok(Lu::factor(a, rule.len())?.det())
}

/// Single-resolution determinant on the given rule, no refinement evidence.
pub(crate) fn det_fredholm_once(k: &KernelFn<'_>, rule: &QuadratureRule) -> Result<f64> {
    det_on_rule(k.eval, rule)
}

/// Runs a grid-indexed determinant evaluation at resolutions (1/2, 1, 2) and
/// packages the refinement evidence. `eval(factor)` must compute the value
/// on the base rule rescaled by `factor`.
pub(crate) fn refine_det(
    base_n: usize,
    tol: f64,
    eval: impl Fn(f64) -> Result<f64>,
) -> Result<DetResult> {
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::Config(format!("tol must be in (0, 1e-2], got {tol}")));
    }
    let coarse = eval(0.5)?;
    let fine = eval(1.0)?;
    let delta = (fine - coarse).abs();
    if delta <= tol {
        return Ok(DetResult {
            value: fine,
            n_coarse: base_n / 2,
            n_fine: base_n,
            delta,
            converged: true,
        });
    }
    // one further doubling before reporting non-convergence
    let finer = eval(2.0)?;
    let delta2 = (finer - fine).abs();
    Ok(DetResult {
        value: finer,
        n_coarse: base_n,
        n_fine: base_n * 2,
        delta: delta2,
        converged: delta2 <= tol,
    })
}

/// Fredholm determinant det(I - K) on the rule's interval.
pub fn det_fredholm(
    k: &KernelFn<'_>,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<DetResult> {
    refine_det(rule.len(), tol, |factor| {
        let r = rule.with_resolution(factor)?;
        det_on_rule(k.eval, &r)
    })
}

/// Solves (I - W_K) w = u in the Nystrom sense and returns w on the nodes.
///
/// `u` holds samples of the right-hand side on `rule.nodes`. Internally the
/// symmetric-weight system is solved for `sqrt(w) f` and unscaled, so the
/// output approximates the function `(I - K)^{-1} u` at the nodes.
pub fn resolvent_apply(
    k: &KernelFn<'_>,
    rule: &QuadratureRule,
    u: &[f64],
) -> Result<Vec<f64>> {
    if u.len() != rule.len() {
        return Err(Error::Config(format!(
            "rhs length {} does not match rule size {}",
            u.len(),
            rule.len()
        )));
    }
    let a = nystrom_matrix(k.eval, rule)?;
    let lu = Lu::factor(a, rule.len())?;
    let det = lu.det();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular(format!("operator not invertible, det = {det}")));
    }
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let b: Vec<f64> = u.iter().zip(&sw).map(|(ui, s)| ui * s).collect();
    let y = lu.solve(&b);
    Ok(y.iter().zip(&sw).map(|(yi, s)| yi / s).collect())
}

/// Quadrature inner product `<v, (I - K)^{-1} u>` for samples u, v on the
/// rule's nodes: the trace of `(I - K)^{-1} (u x v)`.
pub fn rank_one_trace(
    k: &KernelFn<'_>,
    u: &[f64],
    v: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    let w = resolvent_apply(k, rule, u)?;
    Ok(rule
        .weights
        .iter()
        .zip(v.iter().zip(&w))
        .map(|(wi, (vi, fi))| wi * vi * fi)
        .sum())
}

fn det_block_on_rules(bk: &BlockKernel<'_>, rules: [&QuadratureRule; 2]) -> Result<f64> {
    let n1 = rules[0].len();
    let n2 = rules[1].len();
    let n = n1 + n2;
    let nodes: Vec<f64> = rules[0]
        .nodes
        .iter()
        .chain(rules[1].nodes.iter())
        .copied()
        .collect();
    let sw: Vec<f64> = rules[0]
        .weights
        .iter()
        .chain(rules[1].weights.iter())
        .map(|w| w.sqrt())
        .collect();
    let block = |i: usize| (i >= n1) as usize;
    let mut a = vec![0.0; n * n];
    let bad = a
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let bi = block(i);
            for (j, slot) in row.iter_mut().enumerate() {
                let bj = block(j);
                let v = (bk.entries[bi][bj])(nodes[i], nodes[j]);
                if !v.is_finite() {
                    return Some((nodes[i], nodes[j]));
                }
                *slot = (i == j) as usize as f64 - sw[i] * sw[j] * v;
            }
            None
        })
        .find_map_any(|x| x);
    if let Some((x, y)) = bad {
        return Err(Error::NonFiniteKernel { x, y });
    }
    Ok(Lu::factor(a, n)?.det())
}

/// Determinant of the 2x2 block Nystrom matrix with per-block rules.
pub fn det_block2(
    bk: &BlockKernel<'_>,
    rules: (&QuadratureRule, &QuadratureRule),
    tol: f64,
) -> Result<DetResult> {
    refine_det(rules.0.len() + rules.1.len(), tol, |factor| {
        let r1 = rules.0.with_resolution(factor)?;
        let r2 = rules.1.with_resolution(factor)?;
        det_block_on_rules(bk, [&r1, &r2])
    })
}

/// Hilbert-Schmidt norm sqrt(sum w_i w_j K(x_i,x_j)^2) on the rule's square.
pub fn hs_norm(k: &KernelFn<'_>, rule: &QuadratureRule) -> Result<f64> {
    let mut total = 0.0;
    for (i, (&xi, &wi)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let _ = i;
        for (&xj, &wj) in rule.nodes.iter().zip(&rule.weights) {
            let v = (k.eval)(xi, xj);
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel { x: xi, y: xj });
            }
            total += wi * wj * v * v;
        }
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureRule;

    fn kernel<'a>(f: &'a (dyn Fn(f64, f64) -> f64 + Sync), lo: f64, hi: f64) -> KernelFn<'a> {
        KernelFn::new(f, (lo, hi))
    }

    #[test]
    fn det_of_zero_kernel_is_one() {
        let z = |_x: f64, _y: f64| 0.0;
        let rule = QuadratureRule::gauss_on(30, 0.0, 1.0).unwrap();
        let r = det_fredholm(&kernel(&z, 0.0, 1.0), &rule, 1e-10).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.converged);
    }

    #[test]
    fn rank_one_determinant() {
        // K(x,y) = u(x) v(y) with <v, u> = 1/2 on (0,1): det = 1 - 1/2
        let k = |x: f64, y: f64| x * y * 1.5;
        let rule = QuadratureRule::gauss_on(24, 0.0, 1.0).unwrap();
        let r = det_fredholm(&kernel(&k, 0.0, 1.0), &rule, 1e-10).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn resolvent_identity_and_rank_one() {
        let rule = QuadratureRule::gauss_on(24, 0.0, 1.0).unwrap();
        let u: Vec<f64> = rule.nodes.iter().map(|&x| x.cos()).collect();
        let z = |_x: f64, _y: f64| 0.0;
        let w = resolvent_apply(&kernel(&z, 0.0, 1.0), &rule, &u).unwrap();
        for (a, b) in u.iter().zip(&w) {
            assert!((a - b).abs() < 1e-14);
        }
        // rank one u x v with <v,u> = 1/2: (I-K)^{-1} u = 2u
        let k = |x: f64, y: f64| x * (3.0 * y);
        // <v, u> with u(x)=x, v(y)=3y on (0,1): int 3y*y = 1 => scale to 1/2
        let k2 = move |x: f64, y: f64| k(x, y) * 0.5;
        let u2: Vec<f64> = rule.nodes.to_vec();
        let w2 = resolvent_apply(&kernel(&k2, 0.0, 1.0), &rule, &u2).unwrap();
        for (x, got) in rule.nodes.iter().zip(&w2) {
            assert!((got - 2.0 * x).abs() < 1e-12, "{got} vs {}", 2.0 * x);
        }
    }

    #[test]
    fn rank_one_trace_values() {
        let rule = QuadratureRule::gauss_on(30, 0.0, 1.0).unwrap();
        // K = 0, u = v normalized: trace = ||u||^2 = 1
        let norm: f64 = rule.integrate(|x| (x + 1.0) * (x + 1.0)).sqrt();
        let u: Vec<f64> = rule.nodes.iter().map(|&x| (x + 1.0) / norm).collect();
        let z = |_x: f64, _y: f64| 0.0;
        let t = rank_one_trace(&kernel(&z, 0.0, 1.0), &u, &u, &rule).unwrap();
        assert!((t - 1.0).abs() < 1e-13);
        // symmetric K: swapping u and v leaves the trace unchanged
        let k = |x: f64, y: f64| 0.3 * (x + y).cos();
        let v: Vec<f64> = rule.nodes.iter().map(|&x| x * x).collect();
        let t1 = rank_one_trace(&kernel(&k, 0.0, 1.0), &u, &v, &rule).unwrap();
        let t2 = rank_one_trace(&kernel(&k, 0.0, 1.0), &v, &u, &rule).unwrap();
        assert!((t1 - t2).abs() < 1e-13);
    }

    #[test]
    fn block_determinants() {
        let z: &(dyn Fn(f64, f64) -> f64 + Sync) = &|_x, _y| 0.0;
        let r1 = QuadratureRule::gauss_on(16, 0.0, 1.0).unwrap();
        let r2 = QuadratureRule::gauss_on(20, 0.0, 2.0).unwrap();
        let bk = BlockKernel {
            entries: [[z, z], [z, z]],
            domains: [(0.0, 1.0), (0.0, 2.0)],
        };
        let d = det_block2(&bk, (&r1, &r2), 1e-10).unwrap();
        assert_eq!(d.value, 1.0);

        // block-diagonal: product of the scalar determinants
        let k11: &(dyn Fn(f64, f64) -> f64 + Sync) = &|x, y| 0.4 * (x * y + 1.0);
        let k22: &(dyn Fn(f64, f64) -> f64 + Sync) = &|x, y| 0.2 * (x - y).cos();
        let bk2 = BlockKernel {
            entries: [[k11, z], [z, k22]],
            domains: [(0.0, 1.0), (0.0, 2.0)],
        };
        let d2 = det_block2(&bk2, (&r1, &r2), 1e-10).unwrap();
        let s1 = det_fredholm(&kernel(k11, 0.0, 1.0), &r1, 1e-10).unwrap();
        let s2 = det_fredholm(&kernel(k22, 0.0, 2.0), &r2, 1e-10).unwrap();
        assert!((d2.value - s1.value * s2.value).abs() < 1e-12);
    }

    #[test]
    fn hs_norm_values() {
        let rule = QuadratureRule::gauss_on(24, 0.0, 1.0).unwrap();
        let z = |_x: f64, _y: f64| 0.0;
        assert_eq!(hs_norm(&kernel(&z, 0.0, 1.0), &rule).unwrap(), 0.0);
        let one = |_x: f64, _y: f64| 1.0;
        assert!((hs_norm(&kernel(&one, 0.0, 1.0), &rule).unwrap() - 1.0).abs() < 1e-13);
        // rank one u x v: ||u||_2 ||v||_2
        let k = |x: f64, y: f64| x * y.exp();
        let nu: f64 = rule.integrate(|x| x * x).sqrt();
        let nv: f64 = rule.integrate(|y| (2.0 * y).exp()).sqrt();
        let got = hs_norm(&kernel(&k, 0.0, 1.0), &rule).unwrap();
        assert!((got - nu * nv).abs() < 1e-12);
    }

    #[test]
    fn first_order_expansion_bound() {
        // small kernel: |det - (1 - tr)| <= 10 * hs^2
        let k = |x: f64, y: f64| 1e-3 * (x + 2.0 * y).sin();
        let rule = QuadratureRule::gauss_on(30, 0.0, 1.0).unwrap();
        let kf = kernel(&k, 0.0, 1.0);
        let det = det_fredholm(&kf, &rule, 1e-10).unwrap().value;
        let tr: f64 = rule.integrate(|x| k(x, x));
        let hs = hs_norm(&kf, &rule).unwrap();
        assert!((det - (1.0 - tr)).abs() <= 10.0 * hs * hs);
    }

    #[test]
    fn non_finite_kernel_reports_location() {
        let k = |x: f64, y: f64| if x > 0.5 && y > 0.5 { f64::NAN } else { 0.0 };
        let rule = QuadratureRule::gauss_on(8, 0.0, 1.0).unwrap();
        match det_fredholm(&kernel(&k, 0.0, 1.0), &rule, 1e-10) {
            Err(Error::NonFiniteKernel { x, y }) => {
                assert!(x > 0.5 && y > 0.5);
            }
            other => panic!("expected NonFiniteKernel, got {other:?}"),
        }
    }

    #[test]
    fn conjugation_invariance() {
        // det(I - K) = det(I - g K g^{-1}) for positive g
        let k = |x: f64, y: f64| 0.5 * (-(x - y) * (x - y)).exp();
        let g = |x: f64| (0.7 * x).exp() * (1.0 + x);
        let kc = move |x: f64, y: f64| g(x) * k(x, y) / g(y);
        let rule = QuadratureRule::gauss_on(40, 0.0, 2.0).unwrap();
        let d1 = det_fredholm(&kernel(&k, 0.0, 2.0), &rule, 1e-10).unwrap();
        let d2 = det_fredholm(&kernel(&kc, 0.0, 2.0), &rule, 1e-10).unwrap();
        assert!((d1.value - d2.value).abs() < 1e-10);
    }
}
