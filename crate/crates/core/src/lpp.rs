//! Geometric last passage percolation: dynamic-programming passage times
//! over the light cone, the point-to-line argmax endpoint with leftmost tie
//! breaking, KPZ rescaling, and Kolmogorov-Smirnov comparison against the
//! model endpoint law.
//!
//! Everything integer until rescaling: ties are part of the endpoint's
//! definition, so the DP runs in exact arithmetic. Each sample draws from
//! its own counter-based PRNG stream (ChaCha8 keyed by the seed, stream =
//! sample index), which makes results independent of thread scheduling.

use crate::dist::CdfTable;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Lattice-site budget guard: n_steps * samples may not exceed this.
const BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy)]
pub struct LppConfig {
    /// Path length N.
    pub n_steps: usize,
    /// Geometric parameter: P(w = k) = q (1-q)^k, k >= 0.
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
}

impl LppConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 1 {
            return Err(Error::Config("n_steps must be >= 1".into()));
        }
        if self.samples < 1 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::Config(format!("q must be in (0,1), got {}", self.q)));
        }
        if self.n_steps as u64 * self.samples as u64 > BUDGET {
            return Err(Error::Config(format!(
                "n_steps * samples = {} exceeds the {BUDGET} site budget",
                self.n_steps as u64 * self.samples as u64
            )));
        }
        Ok(())
    }
}

/// Endpoint samples with their rescaling state.
#[derive(Debug, Clone)]
pub struct EmpiricalDist {
    /// T_N per sample; ties broken to the leftmost maximizer.
    pub raw_endpoints: Vec<i64>,
    /// L(N) per sample.
    pub passage_times: Vec<i64>,
    pub rescaled: Vec<f64>,
    pub scale_used: f64,
    pub n_steps: usize,
    pub q: f64,
    pub seed: u64,
}

/// Rescaling policy for [`rescale`].
#[derive(Debug, Clone, Copy)]
pub enum Scale {
    /// Calibrate so the rescaled sample variance matches the target
    /// (the model endpoint variance, unless overridden).
    Auto { target_variance: f64 },
    Manual(f64),
}

fn geometric(rng: &mut ChaCha8Rng, ln_1mq: f64) -> i64 {
    let u: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    (u.ln() / ln_1mq) as i64
}

/// One sample: returns (endpoint, passage time).
fn run_sample(cfg: &LppConfig, sample_idx: u64) -> (i64, i64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(sample_idx);
    let ln_1mq = (1.0 - cfg.q).ln();
    let n = cfg.n_steps;
    // row i holds L(i, j) for j = 2k - i, k = 0..=i
    let mut prev = vec![geometric(&mut rng, ln_1mq)];
    let mut row = Vec::with_capacity(n + 1);
    for i in 1..=n {
        row.clear();
        for k in 0..=i {
            let w = geometric(&mut rng, ln_1mq);
            let from_left = if k >= 1 { prev[k - 1] } else { i64::MIN };
            let from_right = if k <= i - 1 { prev[k] } else { i64::MIN };
            row.push(w + from_left.max(from_right));
        }
        std::mem::swap(&mut prev, &mut row);
    }
    let mut best_k = 0;
    for (k, &v) in prev.iter().enumerate() {
        if v > prev[best_k] {
            best_k = k;
        }
    }
    (2 * best_k as i64 - n as i64, prev[best_k])
}

/// Runs the simulation; deterministic given the seed.
pub fn simulate(cfg: &LppConfig) -> Result<EmpiricalDist> {
    cfg.validate()?;
    let results: Vec<(i64, i64)> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|idx| run_sample(cfg, idx))
        .collect();
    let raw_endpoints: Vec<i64> = results.iter().map(|r| r.0).collect();
    let passage_times: Vec<i64> = results.iter().map(|r| r.1).collect();
    debug_assert!(raw_endpoints
        .iter()
        .all(|&e| e.unsigned_abs() <= cfg.n_steps as u64
            && (e + cfg.n_steps as i64) % 2 == 0));
    let scale = cfg.n_steps as f64;
    let rescaled = raw_endpoints
        .iter()
        .map(|&e| e as f64 / scale.powf(2.0 / 3.0))
        .collect();
    Ok(EmpiricalDist {
        raw_endpoints,
        passage_times,
        rescaled,
        scale_used: 1.0,
        n_steps: cfg.n_steps,
        q: cfg.q,
        seed: cfg.seed,
    })
}

/// DP passage profile L(N, .) from an explicit weight triangle: `rows[i]`
/// holds the i+1 light-cone weights of step i. Returns the final row.
/// Exposed for exhaustive cross-checks against path enumeration.
pub fn dp_profile(rows: &[Vec<i64>]) -> Vec<i64> {
    let mut prev = vec![rows[0][0]];
    for (i, row_w) in rows.iter().enumerate().skip(1) {
        let mut row = Vec::with_capacity(i + 1);
        for (k, &w) in row_w.iter().enumerate() {
            let from_left = if k >= 1 { prev[k - 1] } else { i64::MIN };
            let from_right = if k < i { prev[k] } else { i64::MIN };
            row.push(w + from_left.max(from_right));
        }
        prev = row;
    }
    prev
}

/// Re-derives the rescaled sample with a new scale: `raw / (scale N^{2/3})`.
pub fn rescale(dist: &EmpiricalDist, scale: Scale) -> Result<EmpiricalDist> {
    if dist.raw_endpoints.is_empty() {
        return Err(Error::Calibration("empty sample".into()));
    }
    let n23 = (dist.n_steps as f64).powf(2.0 / 3.0);
    let s = match scale {
        Scale::Manual(s) => {
            if !(s > 0.0) {
                return Err(Error::Calibration(format!("scale must be positive, got {s}")));
            }
            s
        }
        Scale::Auto { target_variance } => {
            if !(target_variance > 0.0) {
                return Err(Error::Calibration("target variance must be positive".into()));
            }
            let n = dist.raw_endpoints.len() as f64;
            let mean: f64 = dist.raw_endpoints.iter().map(|&e| e as f64).sum::<f64>() / n;
            let var: f64 = dist
                .raw_endpoints
                .iter()
                .map(|&e| (e as f64 - mean).powi(2))
                .sum::<f64>()
                / n;
            if var == 0.0 {
                return Err(Error::Calibration("sample variance is zero".into()));
            }
            (var / target_variance).sqrt() / n23
        }
    };
    let mut out = dist.clone();
    out.scale_used = s;
    out.rescaled = dist
        .raw_endpoints
        .iter()
        .map(|&e| e as f64 / (s * n23))
        .collect();
    Ok(out)
}

/// Kolmogorov-Smirnov distance between the rescaled sample and a model CDF.
pub fn ks_distance(dist: &EmpiricalDist, cdf: &CdfTable) -> Result<f64> {
    if dist.rescaled.is_empty() {
        return Err(Error::Config("empty rescaled sample".into()));
    }
    let (lo, hi) = cdf.range();
    let mut xs = dist.rescaled.clone();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if xs[0] < lo || *xs.last().unwrap() > hi {
        return Err(Error::Config(format!(
            "sample range [{}, {}] exceeds CDF table range [{lo}, {hi}]",
            xs[0],
            xs.last().unwrap()
        )));
    }
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf.eval(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_and_parity() {
        let cfg = LppConfig {
            n_steps: 7,
            q: 0.5,
            samples: 200,
            seed: 42,
        };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.raw_endpoints, b.raw_endpoints);
        assert_eq!(a.passage_times, b.passage_times);
        for &e in &a.raw_endpoints {
            assert!(e.abs() <= 7 && (e + 7) % 2 == 0, "endpoint {e}");
        }
    }

    #[test]
    fn n1_law_matches_enumeration() {
        // N = 1: T_1 = -1 iff w_{1,-1} >= w_{1,+1}; with q = 1/2 the exact
        // probability is (1 + P(tie))/2, P(tie) = q/(2-q) = 1/3.
        let p_tie: f64 = {
            // enumeration oracle, truncated at tail mass 1e-12
            let q: f64 = 0.5;
            let mut p = 0.0;
            let mut k = 0;
            loop {
                let pk = q * (1.0 - q).powi(k);
                p += pk * pk;
                if pk < 1e-12 {
                    break;
                }
                k += 1;
            }
            p
        };
        let expect = (1.0 + p_tie) / 2.0;
        assert!((expect - 2.0 / 3.0).abs() < 1e-12);
        let cfg = LppConfig {
            n_steps: 1,
            q: 0.5,
            samples: 200_000,
            seed: 7,
        };
        let d = simulate(&cfg).unwrap();
        let left = d.raw_endpoints.iter().filter(|&&e| e == -1).count() as f64
            / d.raw_endpoints.len() as f64;
        // 200k samples: 3.6 sigma window ~ 0.0038
        assert!((left - expect).abs() < 0.004, "left fraction {left}");
        assert!(d.raw_endpoints.iter().all(|&e| e == -1 || e == 1));
    }

    #[test]
    fn dp_matches_exhaustive_paths() {
        use rand::Rng;
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + (seed as usize % 10);
            let rows: Vec<Vec<i64>> = (0..=n)
                .map(|i| (0..=i).map(|_| rng.gen_range(0..7)).collect())
                .collect();
            let dp = dp_profile(&rows);
            // brute force over all 2^n paths
            let mut best = vec![i64::MIN; n + 1];
            for mask in 0..(1u32 << n) {
                let mut k = 0usize; // index within row i
                let mut total = rows[0][0];
                for step in 0..n {
                    if mask >> step & 1 == 1 {
                        k += 1;
                    }
                    total += rows[step + 1][k];
                }
                best[k] = best[k].max(total);
            }
            assert_eq!(dp, best, "seed {seed}");
        }
    }

    #[test]
    fn monotone_coupling() {
        // adding 1 to every weight adds exactly N+1 to every profile entry
        // and leaves the argmax set unchanged
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 9;
        let rows: Vec<Vec<i64>> = (0..=n)
            .map(|i| (0..=i).map(|_| rng.gen_range(0..5)).collect())
            .collect();
        let bumped: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| r.iter().map(|w| w + 1).collect())
            .collect();
        let a = dp_profile(&rows);
        let b = dp_profile(&bumped);
        let max_a = *a.iter().max().unwrap();
        let max_b = *b.iter().max().unwrap();
        assert_eq!(max_b, max_a + n as i64 + 1);
        let argmax_a: Vec<usize> = (0..=n).filter(|&k| a[k] == max_a).collect();
        let argmax_b: Vec<usize> = (0..=n).filter(|&k| b[k] == max_b).collect();
        assert_eq!(argmax_a, argmax_b);
    }

    #[test]
    fn endpoint_symmetry_up_to_tie_bias() {
        // The leftmost tie-break carries an O(1) lattice-unit leftward bias
        // (already visible in the exact N=1 law); in rescaled units it
        // vanishes like N^{-2/3}. At small N we check symmetry net of that
        // allowance; the full 4-sigma symmetry check runs at N=1600 in the
        // integration suite.
        let cfg = LppConfig {
            n_steps: 60,
            q: 0.5,
            samples: 10_000,
            seed: 3,
        };
        let d = simulate(&cfg).unwrap();
        let n = d.raw_endpoints.len() as f64;
        let mean: f64 = d.raw_endpoints.iter().map(|&e| e as f64).sum::<f64>() / n;
        let var: f64 = d
            .raw_endpoints
            .iter()
            .map(|&e| (e as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        assert!(
            mean.abs() <= 4.0 * (var / n).sqrt() + 3.0,
            "mean {mean} vs allowance"
        );
    }

    #[test]
    fn rescaling_modes() {
        let cfg = LppConfig {
            n_steps: 50,
            q: 0.5,
            samples: 4000,
            seed: 5,
        };
        let d = simulate(&cfg).unwrap();
        let manual = rescale(&d, Scale::Manual(1.0)).unwrap();
        let n23 = 50f64.powf(2.0 / 3.0);
        for (r, &e) in manual.rescaled.iter().zip(&d.raw_endpoints) {
            assert_eq!(*r, e as f64 / n23);
        }
        let auto = rescale(&d, Scale::Auto { target_variance: 0.2409 }).unwrap();
        let n = auto.rescaled.len() as f64;
        let mean: f64 = auto.rescaled.iter().sum::<f64>() / n;
        let var: f64 = auto.rescaled.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        // calibration matches the raw (uncentered) second moment; the mean
        // is within sampling error of zero so the variance lands close
        assert!((var - 0.2409).abs() < 0.01 * 0.2409, "var {var}");
    }

    #[test]
    fn ks_invariances() {
        // KS against a synthetic uniform CDF; shifting both supports by a
        // constant leaves the statistic unchanged
        let table = CdfTable {
            xs: (0..=100).map(|i| i as f64 / 100.0).collect(),
            ps: (0..=100).map(|i| i as f64 / 100.0).collect(),
        };
        let shifted_table = CdfTable {
            xs: (0..=100).map(|i| 5.0 + i as f64 / 100.0).collect(),
            ps: (0..=100).map(|i| i as f64 / 100.0).collect(),
        };
        let mk = |xs: Vec<f64>| EmpiricalDist {
            raw_endpoints: vec![0; xs.len()],
            passage_times: vec![0; xs.len()],
            rescaled: xs,
            scale_used: 1.0,
            n_steps: 1,
            q: 0.5,
            seed: 0,
        };
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 + 11) % 997) as f64 / 997.0).collect();
        let d1 = ks_distance(&mk(xs.clone()), &table).unwrap();
        let d2 = ks_distance(&mk(xs.iter().map(|x| x + 5.0).collect()), &shifted_table).unwrap();
        assert!((d1 - d2).abs() < 1e-14);
        // range mismatch is an error
        assert!(ks_distance(&mk(vec![2.0]), &table).is_err());
    }
}
