use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("sifting limits for g={g} did not converge after {iterations} iterations (residuals {residuals:?})")]
    Convergence { g: u32, iterations: usize, residuals: [f64; 2] },

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("factorization budget exceeded while splitting {0}")]
    FactorBudget(String),

    #[error("degenerate prime {p}: factor {factor} is not positive")]
    DegeneratePrime { p: u64, factor: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) | Error::NoRoot(_) | Error::Hypothesis(_) | Error::DegeneratePrime { .. } => 2,
            Error::Convergence { .. } | Error::Accuracy(_) | Error::FactorBudget(_) => 3,
            Error::Domain(_) | Error::Parse(_) | Error::Input(_) | Error::Io(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
