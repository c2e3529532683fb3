//! Error taxonomy shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition (bad dimension, bad
    /// bracket, invalid parameter...).
    #[error("input error: {0}")]
    Input(String),

    /// An instance or graph file failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A brute-force or dense routine was asked for more qubits than it
    /// supports.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// The landscape scan found nothing to report on.
    #[error("diagnostic: {0}")]
    Diagnostic(String),

    /// The iterative eigensolver ran out of its matvec budget. Carries the
    /// best residual norms reached so the caller can judge how close it got.
    #[error("solver error{}: no convergence after {matvecs} matvecs, residuals {residuals:?}",
            lambda.map(|l| format!(" at lambda={l}")).unwrap_or_default())]
    Solver {
        matvecs: usize,
        residuals: Vec<f64>,
        lambda: Option<f64>,
    },

    /// An energy denominator that must be nonzero collided with a level it
    /// is measured against.
    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    /// A closed-form expression was evaluated at a singular point.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Attach the sweep position to a solver failure so scans can report
    /// which grid point died.
    pub(crate) fn tag_lambda(self, l: f64) -> Self {
        match self {
            Error::Solver {
                matvecs,
                residuals,
                lambda: None,
            } => Error::Solver {
                matvecs,
                residuals,
                lambda: Some(l),
            },
            other => other,
        }
    }
}
