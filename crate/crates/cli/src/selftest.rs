//! Built-in invariant suites. `quick` covers the cheap identities and golden
//! values; `full` additionally runs the formula-equivalence and moment
//! checks at their acceptance tolerances plus a medium LPP run.

use crate::envelope::{Cell, OutputEnvelope};
use crate::SelftestLevel;
use polymer_endpoint::dist::{self, JointRoute, NumericsConfig, SupPointRoute};
use polymer_endpoint::kernels::{self, ReflectionSpec};
use polymer_endpoint::quadrature::QuadratureRule;
use polymer_endpoint::{airy, lpp};

/// Golden values pinned by the dual-resolution oracles in the acceptance
/// suite (see crates/core/tests/acceptance.rs).
const F_GUE_0: f64 = 0.9693728283552;
const F_GOE_0: f64 = 0.8319080662030;
const K_AIRY_00: f64 = 0.06698748377966;

struct Suite {
    rows: Vec<(String, bool, String)>,
}

impl Suite {
    fn new() -> Self {
        Suite { rows: Vec::new() }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.rows.push((name.to_string(), pass, detail));
    }

    fn run(
        &mut self,
        name: &str,
        f: impl FnOnce() -> polymer_endpoint::Result<(bool, String)>,
    ) {
        match f() {
            Ok((pass, detail)) => self.check(name, pass, detail),
            Err(e) => self.check(name, false, format!("error: {e}")),
        }
    }
}

pub fn run(level: SelftestLevel, cfg: &NumericsConfig) -> (OutputEnvelope, u8) {
    let mut suite = Suite::new();
    quick_checks(&mut suite, cfg);
    if matches!(level, SelftestLevel::Full) {
        full_checks(&mut suite, cfg);
    }
    let mut env = OutputEnvelope::new(match level {
        SelftestLevel::Quick => "selftest quick",
        SelftestLevel::Full => "selftest full",
    });
    let mut failures = 0;
    for (name, pass, detail) in &suite.rows {
        if !pass {
            failures += 1;
            env.warnings.push(format!("FAILED: {name}: {detail}"));
        }
        env.rows.push(vec![
            ("check", Cell::Text(name.clone())),
            ("pass", Cell::Bool(*pass)),
            ("detail", Cell::Text(detail.clone())),
        ]);
    }
    env.echo("failures", failures);
    (env, if failures == 0 { 0 } else { 1 })
}

fn quick_checks(suite: &mut Suite, cfg: &NumericsConfig) {
    suite.run("airy value at 0", || {
        let v = airy::airy_ai(0.0)?.value;
        let want = 0.3550280538878172;
        Ok(((v - want).abs() < 1e-13, format!("Ai(0) = {v}")))
    });
    suite.run("airy ODE residual", || {
        let h = 1e-4;
        let worst = [-5.0, -1.0, 0.0, 1.0, 5.0]
            .iter()
            .map(|&x| {
                let second =
                    (airy::ai(x + h) - 2.0 * airy::ai(x) + airy::ai(x - h)) / (h * h);
                (second - x * airy::ai(x)).abs()
            })
            .fold(0.0f64, f64::max);
        Ok((worst <= 1e-6, format!("max residual {worst:.2e}")))
    });
    suite.run("gauss-legendre exactness", || {
        let r = QuadratureRule::gauss_legendre(40)?;
        let got = r.integrate(f64::exp);
        let want = std::f64::consts::E - 1.0 / std::f64::consts::E;
        Ok((
            (got - want).abs() < 1e-13,
            format!("int exp over (-1,1): err {:.2e}", (got - want).abs()),
        ))
    });
    suite.run("airy convolution identity", || {
        let r = airy::airy_convolution_check(0.0, 0.0)?;
        Ok((r <= 1e-8, format!("residual {r:.2e}")))
    });
    suite.run("airy kernel closed form", || {
        let v = kernels::k_airy(0.0, 0.0);
        Ok((
            (v - K_AIRY_00).abs() < 1e-12,
            format!("K_Ai(0,0) = {v}"),
        ))
    });
    suite.run("tracy-widom gue golden", || {
        let d = dist::f_gue(0.0, cfg)?;
        Ok((
            (d.value - F_GUE_0).abs() < 1e-9 && d.converged,
            format!("F_GUE(0) = {:.13}", d.value),
        ))
    });
    suite.run("tracy-widom goe golden", || {
        let d = dist::f_goe(0.0, cfg)?;
        Ok((
            (d.value - F_GOE_0).abs() < 1e-9 && d.converged,
            format!("F_GOE(0) = {:.13}", d.value),
        ))
    });
    suite.run("joint density route agreement", || {
        let a = dist::joint_density(0.5, 0.5, cfg, JointRoute::Trace)?;
        let b = dist::joint_density(0.5, 0.5, cfg, JointRoute::DetDifference)?;
        Ok(((a - b).abs() < 1e-8, format!("trace {a:.12}, diff {:.2e}", a - b)))
    });
    suite.run("reflection idempotence", || {
        let q = ReflectionSpec { a: 1.0, t: 0.8 };
        let f = |x: f64| (-0.3 * x).exp();
        let worst = [q.edge() + 0.1, q.edge() + 2.0, 9.0]
            .iter()
            .map(|&x| {
                let once = q.apply(&f, x);
                let twice = q.apply(&|y| q.apply(&f, y), x);
                (once - twice).abs()
            })
            .fold(0.0f64, f64::max);
        Ok((worst <= 1e-9, format!("max deviation {worst:.2e}")))
    });
    suite.run("lpp exact n=1 law", || {
        let c = lpp::LppConfig {
            n_steps: 1,
            q: 0.5,
            samples: 100_000,
            seed: 12,
        };
        let d = lpp::simulate(&c)?;
        let left = d.raw_endpoints.iter().filter(|&&e| e == -1).count() as f64
            / d.raw_endpoints.len() as f64;
        Ok((
            (left - 2.0 / 3.0).abs() < 0.006,
            format!("P(T_1 = -1) = {left:.4} (want 2/3)"),
        ))
    });
    suite.run("lpp determinism", || {
        let c = lpp::LppConfig {
            n_steps: 32,
            q: 0.5,
            samples: 500,
            seed: 977,
        };
        let a = lpp::simulate(&c)?;
        let b = lpp::simulate(&c)?;
        Ok((
            a.raw_endpoints == b.raw_endpoints && a.passage_times == b.passage_times,
            "identical reruns".into(),
        ))
    });
}

fn full_checks(suite: &mut Suite, cfg: &NumericsConfig) {
    suite.run("joint density routes on 3x3 grid", || {
        let mut worst = 0.0f64;
        for &t in &[0.0, 0.5, 1.0] {
            for &m in &[-1.0, 0.0, 1.0] {
                let a = dist::joint_density(t, m, cfg, JointRoute::Trace)?;
                let b = dist::joint_density(t, m, cfg, JointRoute::DetDifference)?;
                worst = worst.max((a - b).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max route gap {worst:.2e}")))
    });
    suite.run("sup law against F_GOE at t=3", || {
        let mut worst = 0.0f64;
        for &a in &[-0.5, 0.0, 0.5] {
            let sup = dist::one_sided_sup_cdf(3.0, a, cfg)?;
            let goe = dist::f_goe(kernels::CBRT4 * a, cfg)?;
            worst = worst.max((sup.value - goe.value).abs());
        }
        Ok((worst <= 2e-4, format!("max gap {worst:.2e}")))
    });
    suite.run("sup/point scalar vs matrix route", || {
        let s = dist::joint_sup_point_cdf(1.0, 1.0, 4.0, 4.0, cfg, SupPointRoute::Scalar)?;
        let m = dist::joint_sup_point_cdf(1.0, 1.0, 4.0, 4.0, cfg, SupPointRoute::Matrix)?;
        Ok((
            (s.value - m.value).abs() <= 1e-6,
            format!("gap {:.2e}", (s.value - m.value).abs()),
        ))
    });
    suite.run("semigroup composition", || {
        let rule = QuadratureRule::composite(0.0, 34.0, 0.8, 14)?;
        let composed: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&l, &w)| w * airy::ai(l) * (-1.0 * l).exp() * airy::ai(l))
            .sum();
        let direct = kernels::SemigroupKernel::new(1.0, 0.0)?.eval(0.0, 0.0);
        Ok((
            (composed - direct).abs() <= 1e-8,
            format!("gap {:.2e}", (composed - direct).abs()),
        ))
    });
    suite.run("figure-1 moments", || {
        let m = dist::endpoint_moments(cfg, 4.0)?;
        let ok = (m.variance - 0.2409).abs() <= 5e-4
            && (m.excess_kurtosis + 0.2374).abs() <= 1e-3
            && (m.total_mass - 1.0).abs() <= 1e-4
            && m.odd_moment_1.abs() <= 1e-6;
        Ok((
            ok,
            format!(
                "mass {:.8}, var {:.6}, exkurt {:.6}",
                m.total_mass, m.variance, m.excess_kurtosis
            ),
        ))
    });
    suite.run("two-time marginalization", || {
        let tt = dist::two_time_cdf(0.0, 12.0, 1.0, 0.0, cfg)?;
        let g = dist::f_gue(0.0, cfg)?;
        Ok((
            (tt.value - g.value).abs() <= 1e-6,
            format!("gap {:.2e}", (tt.value - g.value).abs()),
        ))
    });
    suite.run("lpp medium-size ks", || {
        let c = lpp::LppConfig {
            n_steps: 400,
            q: 0.5,
            samples: 10_000,
            seed: 5,
        };
        let d = lpp::simulate(&c)?;
        let m = dist::endpoint_moments(cfg, 4.0)?;
        let r = lpp::rescale(&d, lpp::Scale::Auto { target_variance: m.variance })?;
        let reach = r.rescaled.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let table = dist::model_cdf_table(cfg, (reach + 0.5).max(4.0), 0.04)?;
        let ks = lpp::ks_distance(&r, &table)?;
        Ok((ks <= 0.1, format!("KS = {ks:.4}")))
    });
}
