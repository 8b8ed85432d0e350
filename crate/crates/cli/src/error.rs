use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("tolerance check failed: {}", .0.join(", "))]
    Tolerance(Vec<String>),

    #[error(transparent)]
    Core(#[from] conformal_torsion::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use conformal_torsion::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Core(e) => match e {
                E::Domain(_)
                | E::Resolution(_)
                | E::InvalidMetric { .. }
                | E::UnsupportedPoint { .. }
                | E::UnsupportedMetric(_)
                | E::Parse { .. } => 2,
                E::IndefiniteMass { .. } | E::Convergence { .. } | E::FitWindow { .. } | E::Spectrum(_) => 3,
            },
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}
