//! Cross-module identities: formula equivalences, monotonicity, envelope
//! sandwiches, refinement behavior, and the statistical checks of the LPP
//! simulator against the model law.

use polymer_endpoint::dist::{self, JointRoute, NumericsConfig, SupPointRoute};
use polymer_endpoint::fredholm::{det_fredholm, KernelFn};
use polymer_endpoint::kernels::{k_airy, CBRT4};
use polymer_endpoint::quadrature::QuadratureRule;
use polymer_endpoint::{lpp, tails};
use proptest::prelude::*;

fn cfg() -> NumericsConfig {
    NumericsConfig::default()
}

#[test]
fn tw_limits_and_monotonicity() {
    let cfg = cfg();
    let hi = dist::f_gue(8.0, &cfg).unwrap();
    assert!((hi.value - 1.0).abs() < 1e-10);
    let lo = dist::f_gue(-8.0, &cfg).unwrap();
    assert!(lo.value.abs() <= 1e-6);
    let goe_hi = dist::f_goe(12.0, &cfg).unwrap();
    assert!((goe_hi.value - 1.0).abs() < 1e-10);
    let mut prev = -1.0;
    for &s in &[-3.0, -1.5, 0.0, 1.5, 3.0] {
        let v = dist::f_gue(s, &cfg).unwrap().value;
        assert!(v >= prev);
        prev = v;
    }
    let mut prev = -1.0;
    for &m in &[-4.0, -2.0, 0.0, 2.0, 4.0] {
        let v = dist::f_goe(m, &cfg).unwrap().value;
        assert!(v > 0.0 && v >= prev, "F_GOE({m}) = {v}");
        prev = v;
    }
}

#[test]
fn joint_density_symmetry_and_decay() {
    let cfg = cfg();
    for &(t, m) in &[(0.5, 0.0), (1.0, -1.0), (1.5, 1.0)] {
        let a = dist::joint_density(t, m, &cfg, JointRoute::Trace).unwrap();
        let b = dist::joint_density(-t, m, &cfg, JointRoute::Trace).unwrap();
        assert!((a - b).abs() < 1e-10, "f({t},{m}) = {a} vs f(-{t},{m}) = {b}");
    }
    let far = dist::joint_density(0.0, 20.0, &cfg, JointRoute::Trace).unwrap();
    assert!(far.abs() <= 1e-8, "f(0, 20) = {far}");
}

#[test]
fn joint_density_nonnegative_on_grid() {
    let cfg = cfg();
    for &t in &[0.0, 0.7, 1.4, 2.1] {
        for &m in &[-2.0, -0.5, 0.5, 2.0, 6.0] {
            let f = dist::joint_density(t, m, &cfg, JointRoute::Trace).unwrap();
            assert!(f >= -10.0 * cfg.tol, "f({t},{m}) = {f}");
        }
    }
}

#[test]
fn joint_marginal_matches_goe_derivative() {
    // int f(t, m) dt over [-4, 4] = d/dm F_GOE(4^{1/3} m), central differences
    let cfg = cfg();
    let rule = QuadratureRule::composite(-4.0, 4.0, 0.5, 12).unwrap();
    for &m in &[-1.0, 0.0, 1.0] {
        let mut integral = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            integral += w * dist::joint_density(t, m, &cfg, JointRoute::Trace).unwrap();
        }
        let h = 1e-3;
        let up = dist::f_goe(CBRT4 * (m + h), &cfg).unwrap().value;
        let dn = dist::f_goe(CBRT4 * (m - h), &cfg).unwrap().value;
        let deriv = (up - dn) / (2.0 * h);
        assert!(
            (integral - deriv).abs() < 1e-4,
            "m={m}: integral {integral} vs derivative {deriv}"
        );
    }
}

#[test]
fn endpoint_density_properties() {
    let cfg = cfg();
    let s = dist::endpoint_density(1.0, &cfg).unwrap();
    let sm = dist::endpoint_density(-1.0, &cfg).unwrap();
    assert!((s - sm).abs() < 1e-8);
    let f0 = dist::endpoint_density(0.0, &cfg).unwrap();
    let f1 = dist::endpoint_density(1.0, &cfg).unwrap();
    let f2 = dist::endpoint_density(2.0, &cfg).unwrap();
    assert!(f0 > f1 && f1 > f2, "{f0} {f1} {f2}");
}

#[test]
fn endpoint_tail_properties() {
    let cfg = cfg();
    assert_eq!(dist::endpoint_tail(0.0, &cfg).unwrap(), 1.0);
    let t1 = dist::endpoint_tail(1.0, &cfg).unwrap();
    let t15 = dist::endpoint_tail(1.5, &cfg).unwrap();
    let t2 = dist::endpoint_tail(2.0, &cfg).unwrap();
    assert!(t1 > t15 && t15 > t2 && t2 > 0.0);
    // sandwich at t = 2 with kappa just above 32/3 and a fitted constant
    let lower = tails::lower_envelope(2.0, 10.7).unwrap();
    assert!(lower <= t2);
    let upper = tails::upper_envelope(2.0, 1e3, 2.0).unwrap();
    assert!(t2 <= upper);
    // upper-envelope shape: tail * e^{(4/3)t^3 - 2t^2} bounded uniformly
    for &t in &[1.0, 1.5, 2.0, 2.5] {
        let tail = dist::endpoint_tail(t, &cfg).unwrap();
        let ratio = tail * (4.0 / 3.0 * t * t * t - 2.0 * t * t).exp();
        assert!(ratio <= 1e3, "t={t}: ratio {ratio}");
    }
}

#[test]
fn sup_law_monotone_and_limits() {
    let cfg = cfg();
    // high barrier: probability ~ 1
    let high = dist::one_sided_sup_cdf(1.0, 10.0, &cfg).unwrap();
    assert!(high.value >= 1.0 - 1e-6);
    // monotone in t (larger sup domain, smaller probability)
    let v1 = dist::one_sided_sup_cdf(1.0, 0.0, &cfg).unwrap().value;
    let v2 = dist::one_sided_sup_cdf(2.0, 0.0, &cfg).unwrap().value;
    assert!(v1 >= v2);
    // monotone in a
    let a1 = dist::one_sided_sup_cdf(1.0, -0.5, &cfg).unwrap().value;
    let a2 = dist::one_sided_sup_cdf(1.0, 0.5, &cfg).unwrap().value;
    assert!(a2 >= a1);
    // approaches F_GOE(4^{1/3} a) from above as t grows
    let goe = dist::f_goe(0.0, &cfg).unwrap().value;
    let mut prev = f64::INFINITY;
    for &t in &[1.0, 1.5, 2.0, 2.5] {
        let v = dist::one_sided_sup_cdf(t, 0.0, &cfg).unwrap().value;
        assert!(v <= prev + 1e-9, "t={t}");
        assert!(v >= goe - 1e-7, "t={t}: {v} vs GOE {goe}");
        prev = v;
    }
    let v3 = dist::one_sided_sup_cdf(3.0, 0.0, &cfg).unwrap().value;
    assert!((v3 - goe).abs() <= 2e-4);
}

#[test]
fn sup_point_bounds_and_decorrelation() {
    let cfg = cfg();
    let (t, beta) = (1.0, 4.0);
    let a = beta * t * t;
    for &s in &[0.5, 1.0] {
        let joint = dist::joint_sup_point_cdf(t, s, a, a, &cfg, SupPointRoute::Scalar)
            .unwrap()
            .value;
        let sup = dist::one_sided_sup_cdf(t, a, &cfg).unwrap().value;
        let gue = dist::f_gue(a + (t + s) * (t + s), &cfg).unwrap().value;
        assert!(joint <= sup.min(gue) + 1e-9, "s={s}");
        // decorrelation: the joint/product ratio tightens as s grows
        let ratio = (joint / (sup * gue) - 1.0).abs();
        let joint2 = dist::joint_sup_point_cdf(t, 2.0, a, a, &cfg, SupPointRoute::Scalar)
            .unwrap()
            .value;
        let gue2 = dist::f_gue(a + (t + 2.0) * (t + 2.0), &cfg).unwrap().value;
        let ratio2 = (joint2 / (sup * gue2) - 1.0).abs();
        assert!(
            ratio2 <= ratio + 1e-9,
            "s={s}: ratio {ratio:.3e} vs s=2 ratio {ratio2:.3e}"
        );
    }
}

#[test]
fn two_time_stationarity_and_bounds() {
    let cfg = cfg();
    let a = dist::two_time_cdf(0.0, 0.3, 1.0, -0.2, &cfg).unwrap().value;
    let b = dist::two_time_cdf(5.0, 0.3, 6.0, -0.2, &cfg).unwrap().value;
    assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    let m0 = dist::f_gue(0.3, &cfg).unwrap().value;
    let m1 = dist::f_gue(-0.2, &cfg).unwrap().value;
    assert!(a <= m0.min(m1) + 1e-9);
    // vacuous first constraint recovers the single-time marginal
    let tt = dist::two_time_cdf(0.0, 12.0, 1.0, 0.0, &cfg).unwrap().value;
    let g = dist::f_gue(0.0, &cfg).unwrap().value;
    assert!((tt - g).abs() <= 1e-6);
}

#[test]
fn refinement_cauchy_for_shipped_kernels() {
    // |value(n) - value(2n)| decreases over n in {20, 40, 80}, up to the
    // machine floor once a kernel is fully resolved
    let airy = |x: f64, y: f64| k_airy(x, y);
    let shifted = |x: f64, y: f64| polymer_endpoint::airy::ai(x + y - 6.0);
    let semigroup = |x: f64, y: f64| k_airy(x - 5.0, y - 5.0);
    let kernels: [(&(dyn Fn(f64, f64) -> f64 + Sync), (f64, f64)); 3] = [
        (&airy, (0.0, 18.0)),
        (&shifted, (0.0, 22.0)),
        (&semigroup, (0.0, 22.0)),
    ];
    let floor = 5e-14;
    for (k, dom) in kernels {
        let det_at = |n: usize| {
            let rule = QuadratureRule::gauss_on(n, dom.0, dom.1).unwrap();
            let kf = KernelFn::new(k, dom);
            det_fredholm(&kf, &rule, 1e-12)
                .map(|d| d.value)
                .unwrap_or(f64::NAN)
        };
        let d20 = (det_at(20) - det_at(40)).abs();
        let d40 = (det_at(40) - det_at(80)).abs();
        let d80 = (det_at(80) - det_at(160)).abs();
        assert!(
            d40 <= d20.max(floor) && d80 <= d40.max(floor),
            "{d20:.2e} {d40:.2e} {d80:.2e}"
        );
    }
}

#[test]
fn conjugation_invariance_airy_kernel() {
    let k = |x: f64, y: f64| k_airy(x, y);
    let g = |x: f64| (0.8 * x).exp() * (1.0 + x * x).sqrt();
    let kc = move |x: f64, y: f64| g(x) * k_airy(x, y) / g(y);
    let rule = QuadratureRule::gauss_on(80, 0.0, 18.0).unwrap();
    let d1 = det_fredholm(&KernelFn::new(&k, (0.0, 18.0)), &rule, 1e-10).unwrap();
    let d2 = det_fredholm(&KernelFn::new(&kc, (0.0, 18.0)), &rule, 1e-10).unwrap();
    assert!((d1.value - d2.value).abs() < 1e-10);
}

#[test]
fn tail_shape_ratios() {
    let cfg = cfg();
    // GUE: (1 - F_GUE(s)) / shape roughly constant and inside [0.005, 0.5]
    let mut gue_ratios = Vec::new();
    for &s in &[4.0, 6.0, 8.0] {
        let tail = dist::gue_upper_tail(s, &cfg).unwrap();
        let shape = tails::gue_right_tail_asymptotic(s).unwrap();
        gue_ratios.push(tail / shape);
    }
    let mut goe_ratios = Vec::new();
    for &m in &[4.0, 6.0, 8.0] {
        let tail = dist::goe_upper_tail(CBRT4 * m, &cfg).unwrap();
        let shape = tails::goe_right_tail_asymptotic(m).unwrap();
        goe_ratios.push(tail / shape);
    }
    for ratios in [&gue_ratios, &goe_ratios] {
        let mut sorted = ratios.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = sorted[1];
        for &r in ratios.iter() {
            assert!((0.005..=0.5).contains(&r), "ratio {r} out of band ({ratios:?})");
            assert!(r >= 0.5 * mid && r <= 1.5 * mid, "ratio drift {ratios:?}");
        }
    }
}

#[test]
fn tail_records_sandwich() {
    let cfg = cfg();
    for &t in &[1.5, 2.0, 2.5] {
        let prob = dist::endpoint_tail(t, &cfg).unwrap();
        let rec = tails::TailRecord::new(t, prob, 1e3, 2.0, 10.7).unwrap();
        assert!(rec.lower_env <= rec.prob, "t={t}");
        assert!(rec.prob <= rec.upper_env, "t={t}");
    }
}

#[test]
fn lpp_symmetry_at_large_n() {
    // |mean| <= 4 stddev / sqrt(samples) once N^{2/3} dominates the O(1)
    // leftmost-tie bias
    let cfg = lpp::LppConfig {
        n_steps: 1600,
        q: 0.5,
        samples: 10_000,
        seed: 21,
    };
    let d = lpp::simulate(&cfg).unwrap();
    let n = d.raw_endpoints.len() as f64;
    let mean: f64 = d.raw_endpoints.iter().map(|&e| e as f64).sum::<f64>() / n;
    let var: f64 = d
        .raw_endpoints
        .iter()
        .map(|&e| (e as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    assert!(mean.abs() <= 4.0 * (var / n).sqrt(), "mean {mean}");
}

#[test]
fn ks_of_model_samples_is_small() {
    // inverse-CDF sampling from the model law itself: KS at 1e4 points sits
    // below the 99% Kolmogorov quantile 1.63/sqrt(n) ~ 0.0163
    use rand::{Rng, SeedableRng};
    let cfg = cfg();
    let table = dist::model_cdf_table(&cfg, 4.0, 0.04).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let inverse = |u: f64| {
        let (mut lo, mut hi) = table.range();
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if table.eval(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let xs: Vec<f64> = (0..10_000).map(|_| inverse(rng.gen::<f64>())).collect();
    let d = lpp::EmpiricalDist {
        raw_endpoints: vec![0; xs.len()],
        passage_times: vec![0; xs.len()],
        rescaled: xs,
        scale_used: 1.0,
        n_steps: 1,
        q: 0.5,
        seed: 0,
    };
    let ks = lpp::ks_distance(&d, &table).unwrap();
    assert!(ks < 0.02, "KS = {ks}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrature_weight_sum_and_exactness(n in 2usize..120) {
        let rule = QuadratureRule::gauss_legendre(n).unwrap();
        let sum: f64 = rule.weights.iter().sum();
        prop_assert!((sum - 2.0).abs() < 2e-13);
        let k = (2 * n - 1).min(15);
        let got = rule.integrate(|x| x.powi(k as i32));
        let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
        prop_assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn lpp_parity_invariant(n in 1usize..24, seed in 0u64..500) {
        let cfg = lpp::LppConfig { n_steps: n, q: 0.4, samples: 8, seed };
        let d = lpp::simulate(&cfg).unwrap();
        for &e in &d.raw_endpoints {
            prop_assert!(e.unsigned_abs() as usize <= n);
            prop_assert_eq!((e + n as i64).rem_euclid(2), 0);
        }
    }

    #[test]
    fn airy_kernel_symmetric(x in -6.0f64..6.0, y in -6.0f64..6.0) {
        prop_assert_eq!(k_airy(x, y), k_airy(y, x));
    }
}
