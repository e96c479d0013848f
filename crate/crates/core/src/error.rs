use thiserror::Error;

/// Errors produced anywhere in the preparation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid sector: n_sites={n_sites}, n_up={n_up}, n_dn={n_dn}")]
    InvalidSector { n_sites: usize, n_up: usize, n_dn: usize },

    #[error("basis is incompatible with lattice: {0}")]
    IncompatibleBasis(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("orbitals {0} and {1} are not adjacent along the Jordan-Wigner path")]
    JwAdjacency(usize, usize),

    #[error("invalid spin: {0}")]
    InvalidSpin(String),

    #[error("parameter layout: expected {expected} values, found {found}")]
    ParameterLayout { expected: usize, found: usize },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("only {found} states with the requested spin in the computed slice, need {needed}")]
    InsufficientStates { found: usize, needed: usize },

    #[error("energy has imaginary part {0:e}")]
    HermiticityViolation(f64),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    Tagged {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid-geometry",
            Error::InvalidSector { .. } => "invalid-sector",
            Error::IncompatibleBasis(_) => "incompatible-basis",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::JwAdjacency(..) => "jw-adjacency",
            Error::InvalidSpin(_) => "invalid-spin",
            Error::ParameterLayout { .. } => "parameter-layout",
            Error::SolverFailure { .. } => "solver-failure",
            Error::InsufficientStates { .. } => "insufficient-k",
            Error::HermiticityViolation(_) => "hermiticity-violation",
            Error::UndefinedMetric(_) => "undefined-metric",
            Error::InvalidConfig(_) => "invalid-config",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Tagged { source, .. } => source.category(),
        }
    }

    pub(crate) fn tagged(self, context: impl Into<String>) -> Error {
        Error::Tagged {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
