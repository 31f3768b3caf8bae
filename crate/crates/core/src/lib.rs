//! Quantum correlation measures on small multipartite states and the
//! monogamy deficits built from them.

// `!(x <= tol)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlations;
pub mod entropy;
pub mod error;
pub mod format;
pub mod linalg;
pub mod measure;
pub mod monogamy;
pub mod nelder_mead;
pub mod states;
pub mod sweep;
pub mod verify;

pub use error::{DensityProperty, Error, Result};
pub use linalg::{partial_trace, validate_density, ComplexMatrix, DimensionList, C64};
pub use measure::{MeasurementParams, OptimizerConfig, OptimizerDiagnostics};
pub use monogamy::{Classification, PureTripartite, Route, Verdict};
pub use states::{DensityMatrix, StateVector};
pub use sweep::{run_sweep, SweepConfig, SweepResult};
pub use verify::{run_verify, Suite, VerifyConfig, VerifyReport};
