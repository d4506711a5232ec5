//! Dataset and model files, synthetic benchmark generation, cross-validation,
//! ablations and variance diagnostics around `uvds-core`.

pub mod ablation;
pub mod cv;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod model_file;
pub mod report;
pub mod synthetic;

pub use error::{Error, Result};
