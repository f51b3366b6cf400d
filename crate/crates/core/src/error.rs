use thiserror::Error;

/// Errors produced by the numerics layer.
///
/// `Domain` flags invalid mathematical input (non-finite arguments and the
/// like), `Config` flags unusable parameters (bad tolerances, empty windows,
/// budget violations). The remaining variants report numerical failures that
/// carry enough context to locate the offending evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite kernel value at ({x}, {y})")]
    NonFiniteKernel { x: f64, y: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("value below numerical resolution: {0}")]
    BelowResolution(String),

    #[error("out of asymptotic range: {0}")]
    OutOfAsymptoticRange(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("calibration error: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {value}")))
    }
}
