use thiserror::Error;

/// Errors raised by the library. Each variant maps to a stable machine-readable
/// kind string (see [`Error::kind`]) used by the CLI and the C interface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("KL divergence undefined: P({symbol}) = {p} > 0 where Q({symbol}) = 0")]
    AbsoluteContinuity { symbol: usize, p: f64 },

    #[error("capacity iteration did not converge after {iterations} iterations (residual {residual:e} bits)")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("posteriors ({p1}, {p2}) do not split prior {prior}")]
    InvalidSplit { prior: f64, p1: f64, p2: f64 },

    #[error("posteriors coincide at {0}; no informative signal induces them")]
    NoInformation(f64),

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("codebook of {required} words exceeds the cap of {cap} words")]
    CodebookTooLarge { required: f64, cap: usize },

    #[error("enumeration of {required} source sequences exceeds the bound of {bound}")]
    Intractable { required: f64, bound: usize },

    #[error("rate {rate} violates the {constraint} constraint ({detail})")]
    InfeasibleRate {
        rate: f64,
        constraint: &'static str,
        detail: String,
    },

    #[error("no feasible point")]
    EmptyFeasibleSet,

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::OutOfRange { .. } => "out_of_range",
            Error::AbsoluteContinuity { .. } => "absolute_continuity",
            Error::NonConvergence { .. } => "non_convergence",
            Error::InvalidSplit { .. } => "invalid_split",
            Error::NoInformation(_) => "no_information",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidConfig(_) => "invalid_config",
            Error::CodebookTooLarge { .. } => "codebook_too_large",
            Error::Intractable { .. } => "intractable",
            Error::InfeasibleRate { .. } => "infeasible_rate",
            Error::EmptyFeasibleSet => "empty_feasible_set",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
