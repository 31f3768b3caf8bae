use std::fmt;

use thiserror::Error;

/// Which property of a density matrix failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityProperty {
    Shape,
    Hermitian,
    Trace,
    Positivity,
    Finite,
}

impl fmt::Display for DensityProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DensityProperty::Shape => "shape",
            DensityProperty::Hermitian => "hermitian",
            DensityProperty::Trace => "trace",
            DensityProperty::Positivity => "positivity",
            DensityProperty::Finite => "finite",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m^H| = {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("not a density matrix: {property} ({detail})")]
    NotDensityMatrix { property: DensityProperty, detail: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown party label `{0}`")]
    UnknownLabel(String),

    #[error("party sets overlap on `{0}`")]
    OverlappingParties(String),

    #[error("wrong number of parties: expected {expected}, got {got}")]
    WrongArity { expected: usize, got: usize },

    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("weights sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("measurement parameter vector has length {got}, expected {expected}")]
    BadParamLength { expected: usize, got: usize },

    #[error("state is not pure (purity {0})")]
    NotPure(f64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn not_density(property: DensityProperty, detail: impl Into<String>) -> Self {
        Error::NotDensityMatrix {
            property,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
