use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EtherError {
    #[error("point {point:?} is outside the chart domain ({context})")]
    Domain { point: Vec<f64>, context: String },

    #[error("non-finite value encountered: {context}")]
    Numeric { context: String },

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { context: String, iterations: usize, residual: f64 },

    #[error("{context}: singular or ill-conditioned Jacobian")]
    Singular { context: String },

    #[error("{context}: ambiguous solution ({detail})")]
    Ambiguous { context: String, detail: String },

    #[error("{context}: point is not in the solver domain")]
    NotInDomain { context: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

impl EtherError {
    /// Prefix the context of solver failures with the stage that raised them.
    pub fn at_stage(self, stage: &str) -> Self {
        match self {
            EtherError::NoConvergence { context, iterations, residual } => {
                EtherError::NoConvergence { context: format!("{stage}: {context}"), iterations, residual }
            }
            EtherError::Singular { context } => EtherError::Singular { context: format!("{stage}: {context}") },
            EtherError::Numeric { context } => EtherError::Numeric { context: format!("{stage}: {context}") },
            EtherError::Ambiguous { context, detail } => EtherError::Ambiguous { context: format!("{stage}: {context}"), detail },
            EtherError::NotInDomain { context } => EtherError::NotInDomain { context: format!("{stage}: {context}") },
            other => other,
        }
    }

    /// Short machine-readable reason code used in compute tables.
    pub fn code(&self) -> &'static str {
        match self {
            EtherError::Domain { .. } => "domain",
            EtherError::Numeric { .. } => "numeric",
            EtherError::NoConvergence { .. } => "no_convergence",
            EtherError::Singular { .. } => "singular",
            EtherError::Ambiguous { .. } => "ambiguous",
            EtherError::NotInDomain { .. } => "not_in_domain",
            EtherError::Parameter(_) => "parameter",
            EtherError::Dimension { .. } => "dimension",
        }
    }
}

pub type Result<T> = std::result::Result<T, EtherError>;
