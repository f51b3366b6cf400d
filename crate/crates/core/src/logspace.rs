//! Sign/log-magnitude arithmetic for quantities of the form `m * e^L`.
//!
//! Kernel entries in this crate are products of explicit exponentials with
//! Airy factors whose scales span hundreds of orders of magnitude. Factors
//! are kept as `(sign, ln|value|)` pairs and only recombined into an `f64`
//! once the exponents have cancelled down to a representable range.

/// A real number stored as `sign * exp(ln_abs)`.
///
/// Zero is represented by `sign == 0` (with `ln_abs = -inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVal {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogVal {
    pub const ZERO: LogVal = LogVal {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(value: f64) -> Self {
        if value == 0.0 {
            LogVal::ZERO
        } else {
            LogVal {
                sign: if value > 0.0 { 1 } else { -1 },
                ln_abs: value.abs().ln(),
            }
        }
    }

    /// `mantissa * e^exponent` without forming the product in f64.
    pub fn from_parts(mantissa: f64, exponent: f64) -> Self {
        if mantissa == 0.0 {
            LogVal::ZERO
        } else {
            LogVal {
                sign: if mantissa > 0.0 { 1 } else { -1 },
                ln_abs: mantissa.abs().ln() + exponent,
            }
        }
    }

    pub fn value(self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn mul(self, other: LogVal) -> LogVal {
        if self.sign == 0 || other.sign == 0 {
            return LogVal::ZERO;
        }
        LogVal {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    pub fn scale(self, exponent: f64) -> LogVal {
        if self.sign == 0 {
            return LogVal::ZERO;
        }
        LogVal {
            sign: self.sign,
            ln_abs: self.ln_abs + exponent,
        }
    }

    pub fn add(self, other: LogVal) -> LogVal {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let rel = (lo.ln_abs - hi.ln_abs).exp() * (lo.sign * hi.sign) as f64;
        let sum = 1.0 + rel;
        if sum == 0.0 {
            LogVal::ZERO
        } else {
            LogVal {
                sign: hi.sign * if sum > 0.0 { 1 } else { -1 },
                ln_abs: hi.ln_abs + sum.abs().ln(),
            }
        }
    }
}

/// Accumulates a sum of log-scaled terms, renormalizing against the largest
/// exponent seen so the running mantissa stays in range.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    mantissa: f64,
    exponent: f64,
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            mantissa: 0.0,
            exponent: f64::NEG_INFINITY,
        }
    }

    pub fn add(&mut self, term: LogVal) {
        if term.sign == 0 {
            return;
        }
        if self.mantissa == 0.0 {
            self.mantissa = term.sign as f64;
            self.exponent = term.ln_abs;
            return;
        }
        if term.ln_abs > self.exponent {
            self.mantissa = self.mantissa * (self.exponent - term.ln_abs).exp() + term.sign as f64;
            self.exponent = term.ln_abs;
        } else {
            self.mantissa += term.sign as f64 * (term.ln_abs - self.exponent).exp();
        }
    }

    /// Adds `coeff * e^exponent` (used for weighted quadrature sums).
    pub fn add_parts(&mut self, coeff: f64, exponent: f64) {
        self.add(LogVal::from_parts(coeff, exponent));
    }

    pub fn total(&self) -> LogVal {
        LogVal::from_parts(self.mantissa, self.exponent)
    }

    pub fn value(&self) -> f64 {
        self.total().value()
    }
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_product() {
        let a = LogVal::new(-3.25e-200);
        let b = LogVal::new(2.0e150);
        assert!((a.value() + 3.25e-200).abs() < 1e-212);
        let p = a.mul(b);
        assert!((p.value() + 6.5e-50).abs() < 1e-62);
    }

    #[test]
    fn product_beyond_f64_range_recombines() {
        // e^{500} * e^{-600} = e^{-100}; neither factor representable naively.
        let big = LogVal::from_parts(1.0, 500.0);
        let small = LogVal::from_parts(1.0, -600.0);
        let p = big.mul(small);
        assert!((p.ln_abs + 100.0).abs() < 1e-12);
    }

    #[test]
    fn signed_sums_cancel() {
        let mut s = LogSum::new();
        s.add(LogVal::new(1.0));
        s.add(LogVal::new(-1.0));
        s.add(LogVal::new(0.5));
        assert!((s.value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sum_renormalizes_against_largest_exponent() {
        let mut s = LogSum::new();
        s.add_parts(2.0, 500.0);
        s.add_parts(1.0, 499.0);
        let t = s.total();
        assert_eq!(t.sign, 1);
        assert!((t.ln_abs - (500.0 + (2.0 + (-1.0f64).exp()).ln())).abs() < 1e-12);
    }
}
