use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient neighborhood at x = {x:e}: found {found} neighbor(s), need at least 2")]
    InsufficientNeighborhood { x: f64, found: usize },

    #[error("ill-conditioned least-squares system (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("degenerate particle field: {0}")]
    DegenerateField(String),

    #[error("state blowup at step {step}, particle {particle}: {detail}")]
    StateBlowup { step: u64, particle: usize, detail: String },

    #[error("stability violation: advective ratio {advective:.3e}, diffusive ratio {diffusive:.3e}")]
    StabilityViolation { advective: f64, diffusive: f64 },

    #[error("mismatched fields: {left} vs {right} particles")]
    MismatchedFields { left: usize, right: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid Mach number {0} (must exceed 1)")]
    InvalidMach(f64),

    #[error("degenerate shock: left and right densities are equal")]
    DegenerateShock,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
