use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("invalid metric `{metric}`: {reason}")]
    InvalidMetric { metric: String, reason: String },

    #[error("metric `{metric}` has no first Chern density at {point}: {reason}")]
    UnsupportedPoint { metric: String, point: String, reason: String },

    #[error("metric `{0}` is singular; its Chern form cannot enter the anomaly integrand")]
    UnsupportedMetric(String),

    #[error("mass matrix is not positive definite (pivot {pivot} = {value:e})")]
    IndefiniteMass { pivot: usize, value: f64 },

    #[error("QL iteration did not converge for eigenvalue index {index} after {iterations} sweeps")]
    Convergence { index: usize, iterations: usize },

    #[error("fit window [{lo}, {hi}] is invalid: {reason}")]
    FitWindow { lo: f64, hi: f64, reason: String },

    #[error("spectrum error: {0}")]
    Spectrum(String),

    #[error("cannot parse metric spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
}
