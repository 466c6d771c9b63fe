use thiserror::Error;

/// Errors produced by the simulation and analytic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: error estimate {estimate:.3e} exceeds {tolerance:.3e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error(
        "jump-time root finding failed on [{t_lo:.6e}, {t_hi:.6e}]: survival residual {residual:.3e}"
    )]
    RootFindFailure { t_lo: f64, t_hi: f64, residual: f64 },

    #[error("jump sampled but no jump channel is open (both weighted rates vanish)")]
    NoJumpChannel,

    #[error("projection onto a zero amplitude: {0}")]
    ZeroAmplitudeProjection(&'static str),

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("estimated event count {estimated:.3e} exceeds the run budget {budget:.3e}")]
    BudgetExceeded { estimated: f64, budget: f64 },

    #[error("trajectory {index} (seed {seed}) failed: {source}")]
    TrajectoryFailure {
        index: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
