use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input")]
    EmptyInput,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The nominal work `T * (K + 1) * n` of an iterative-truncation run is
    /// above the configured budget.
    #[error("schedule needs {steps} truncations, budget is {budget} (lower inner_scale or raise ENTANGLED_STEP_BUDGET)")]
    ScheduleOverflow { steps: u128, budget: u64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error:e}, tolerance {tolerance:e})")]
    Quadrature {
        subdivisions: usize,
        error: f64,
        tolerance: f64,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Errors caused by bad user input rather than by numerics or I/O.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Domain(_) | Error::InvalidInterval { .. } | Error::EmptyInput
        )
    }
}
