use thiserror::Error;

/// Errors raised anywhere in the front-construction and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice window too small: {0}")]
    WindowTooSmall(String),

    #[error("speed {p}/{q} does not exceed the linear spreading speed {s_lin}")]
    BelowSpreadingSpeed { p: u32, q: u32, s_lin: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("root solve failed: {0}")]
    RootSolve(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    /// Γ_{n+1} < Γ_n failed at one of the threshold-selection indices.
    #[error("non-monotone threshold sums: {0}")]
    Monotonicity(String),

    #[error("front is not positive at site {site} (value {value})")]
    NotPositive { site: i64, value: f64 },

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Soft failures are tied to a single parameter point; sweeps record them and continue.
    pub fn is_point_failure(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_) | Error::Config(_))
    }
}
