//! Analytic tail envelopes for P(|T| > t) and the GUE/GOE right-tail
//! asymptotic shapes, plus a least-squares extractor for empirical decay
//! exponents. All envelope arithmetic happens in log space; the asymptotic
//! shapes carry unit constants and are only ever used in ratio tests.

use crate::error::{Error, Result};
use crate::fredholm::Lu;

/// Lower-bound validity threshold: kappa must exceed 32/3.
pub const KAPPA_MIN: f64 = 32.0 / 3.0;

/// One computed tail point with its envelopes.
#[derive(Debug, Clone, Copy)]
pub struct TailRecord {
    pub t: f64,
    pub prob: f64,
    pub log_prob: f64,
    pub upper_env: f64,
    pub lower_env: f64,
}

impl TailRecord {
    pub fn new(t: f64, prob: f64, c: f64, c32: f64, kappa: f64) -> Result<TailRecord> {
        if !(prob > 0.0 && prob <= 1.0) {
            return Err(Error::Domain(format!("prob must be in (0,1], got {prob}")));
        }
        Ok(TailRecord {
            t,
            prob,
            log_prob: prob.ln(),
            upper_env: upper_envelope(t, c, c32)?,
            lower_env: lower_envelope(t, kappa)?,
        })
    }
}

/// `c * exp(-(4/3) t^3 + 2 t^2 + c32 * t^{3/2})`.
pub fn upper_envelope(t: f64, c: f64, c32: f64) -> Result<f64> {
    if !(t > 0.0) || !(c > 0.0) {
        return Err(Error::Domain(format!(
            "upper envelope needs t > 0 and c > 0, got t={t}, c={c}"
        )));
    }
    Ok((c.ln() - 4.0 / 3.0 * t * t * t + 2.0 * t * t + c32 * t * t.sqrt()).exp())
}

/// `exp(-kappa t^3)`, valid only for kappa above 32/3.
pub fn lower_envelope(t: f64, kappa: f64) -> Result<f64> {
    if kappa <= KAPPA_MIN {
        return Err(Error::Config(format!(
            "kappa must exceed 32/3 ~ {KAPPA_MIN:.4}, got {kappa}"
        )));
    }
    Ok((-kappa * t * t * t).exp())
}

/// Right-tail shape `s^{-3/2} e^{-(4/3) s^{3/2}}` of 1 - F_GUE, with unit
/// constant; for ratio-stability comparisons only.
pub fn gue_right_tail_asymptotic(s: f64) -> Result<f64> {
    if s < 4.0 {
        return Err(Error::OutOfAsymptoticRange(format!(
            "GUE tail shape needs s >= 4, got {s}"
        )));
    }
    Ok((-4.0 / 3.0 * s * s.sqrt() - 1.5 * s.ln()).exp())
}

/// Right-tail shape `m^{-3/2} e^{-(4/3) m^{3/2}}` of 1 - F_GOE(4^{1/3} m).
pub fn goe_right_tail_asymptotic(m: f64) -> Result<f64> {
    if m < 4.0 {
        return Err(Error::OutOfAsymptoticRange(format!(
            "GOE tail shape needs m >= 4, got {m}"
        )));
    }
    Ok((-4.0 / 3.0 * m * m.sqrt() - 1.5 * m.ln()).exp())
}

/// Least-squares fit of `-log prob` against `(t^3, t^2, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub cubic_coeff: f64,
    pub quadratic_coeff: f64,
    pub residual: f64,
    pub t_range: (f64, f64),
}

pub fn fit_decay(records: &[TailRecord]) -> Result<DecayFit> {
    if records.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 records, got {}",
            records.len()
        )));
    }
    for r in records {
        if !(r.prob > 1e-13) {
            return Err(Error::Fit(format!("prob {} too small at t={}", r.prob, r.t)));
        }
        if !(r.t > 0.0) {
            return Err(Error::Fit(format!("t must be positive, got {}", r.t)));
        }
    }
    let mut ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ts.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::Fit("t values must be distinct".into()));
    }
    // normal equations for the 3-parameter design [t^3, t^2, 1]
    let mut ata = [0.0f64; 9];
    let mut atb = [0.0f64; 3];
    for r in records {
        let row = [r.t.powi(3), r.t.powi(2), 1.0];
        let y = -r.log_prob;
        for i in 0..3 {
            for j in 0..3 {
                ata[i * 3 + j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    let lu = Lu::factor(ata.to_vec(), 3)
        .map_err(|_| Error::Fit("degenerate design matrix".into()))?;
    if lu.det().abs() < 1e-12 {
        return Err(Error::Fit("degenerate design matrix".into()));
    }
    let coef = lu.solve(&atb);
    let mut ss = 0.0;
    for r in records {
        let pred = coef[0] * r.t.powi(3) + coef[1] * r.t.powi(2) + coef[2];
        let e = -r.log_prob - pred;
        ss += e * e;
    }
    Ok(DecayFit {
        cubic_coeff: coef[0],
        quadratic_coeff: coef[1],
        residual: (ss / records.len() as f64).sqrt(),
        t_range: (ts[0], *ts.last().unwrap()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, prob: f64) -> TailRecord {
        TailRecord::new(t, prob, 1.0, 2.0, 10.7).unwrap()
    }

    #[test]
    fn upper_envelope_values() {
        let v = upper_envelope(2.0, 1.0, 0.0).unwrap();
        assert!((v - (-32.0f64 / 3.0 + 8.0).exp()).abs() < 1e-15 * v);
        // monotone decreasing for t >= 2 when c32 <= 2
        let mut prev = upper_envelope(2.0, 1.0, 2.0).unwrap();
        for i in 1..=10 {
            let t = 2.0 + 0.3 * i as f64;
            let v = upper_envelope(t, 1.0, 2.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        // cubic dominance: doubling t from 1.5 to 3 multiplies the cubic
        // part of -log by exactly 8
        let cubic = |t: f64| -upper_envelope(t, 1.0, 0.0).unwrap().ln() + 2.0 * t * t;
        assert!((cubic(3.0) / cubic(1.5) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn lower_envelope_domain() {
        assert!(lower_envelope(1.0, KAPPA_MIN + 1e-6).is_ok());
        assert!(lower_envelope(1.0, 10.0).is_err());
        assert_eq!(lower_envelope(0.0, 11.0).unwrap(), 1.0);
        for i in 1..=10 {
            let t = 0.3 * i as f64;
            assert!(lower_envelope(t, 11.0).unwrap() >= lower_envelope(t, 12.0).unwrap());
        }
    }

    #[test]
    fn asymptotic_shapes() {
        assert!(gue_right_tail_asymptotic(3.0).is_err());
        assert!(goe_right_tail_asymptotic(3.9).is_err());
        let l = gue_right_tail_asymptotic(9.0).unwrap().ln();
        assert!((l - (-4.0 / 3.0 * 27.0 - 1.5 * 9.0f64.ln())).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for i in 0..=16 {
            let s = 4.0 + 0.5 * i as f64;
            let v = gue_right_tail_asymptotic(s).unwrap();
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        assert!(goe_right_tail_asymptotic(4.0).unwrap() > 0.0);
    }

    #[test]
    fn fit_recovers_exact_cubic() {
        let records: Vec<TailRecord> = [1.6, 2.0, 2.4, 2.8, 3.2]
            .iter()
            .map(|&t| {
                let logp = -(4.0 / 3.0 * t * t * t - 2.0 * t * t);
                record(t, logp.exp())
            })
            .collect();
        let fit = fit_decay(&records).unwrap();
        assert!((fit.cubic_coeff - 4.0 / 3.0).abs() < 1e-10, "{}", fit.cubic_coeff);
        assert!((fit.quadratic_coeff + 2.0).abs() < 1e-8);
        assert!(fit.residual < 1e-9);
        assert_eq!(fit.t_range, (1.6, 3.2));
    }

    #[test]
    fn fit_scale_equivariance() {
        let base: Vec<TailRecord> = [1.0, 1.5, 2.0, 2.5]
            .iter()
            .map(|&t| record(t, (-(1.2 * t * t * t) + 0.4 * t * t).exp()))
            .collect();
        let scaled: Vec<TailRecord> = base
            .iter()
            .map(|r| record(r.t, r.prob * 0.037))
            .collect();
        let f1 = fit_decay(&base).unwrap();
        let f2 = fit_decay(&scaled).unwrap();
        assert!((f1.cubic_coeff - f2.cubic_coeff).abs() < 1e-9);
        assert!((f1.quadratic_coeff - f2.quadratic_coeff).abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let recs: Vec<TailRecord> = [1.0, 1.5, 2.0].iter().map(|&t| record(t, 0.1)).collect();
        assert!(fit_decay(&recs).is_err());
        // duplicate t values degenerate
        let dup: Vec<TailRecord> = [1.0, 1.0, 2.0, 2.5].iter().map(|&t| record(t, 0.1)).collect();
        assert!(fit_decay(&dup).is_err());
        // t = 0 rows are rejected (prob 1 is fine, the degenerate column is not)
        assert!(TailRecord::new(0.0, 1.0, 1.0, 2.0, 10.7).is_err());
    }
}
