//! Core numerics for unseen visual data synthesis.
//!
//! Learns a map from semantic attributes to visual features through a latent
//! embedding `V`, a projection `P` and an orthogonal rotation `Q`, regularised
//! by a dual k-nn graph Laplacian and an ℓ2,1 diffusion term. Unseen-class
//! features are synthesised as `A_u · P · Q` and classified with nearest
//! neighbour or a linear one-vs-rest SVM.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! command-line tool and the evaluation harness live in the `uvds` crate.
#![no_std]

extern crate alloc;

pub mod baseline;
pub mod dataset;
mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod solver;
pub mod zsl;

pub use dataset::{AttributeLevel, Dataset, SplitSpec, UnseenSet};
pub use error::{Error, Result};
pub use graph::GraphSet;
pub use linalg::{Matrix, SymEig};
pub use solver::{DiffusionStats, FitResult, ModelParams, SolverConfig};
pub use zsl::{LinearSvmModel, PrototypeMode, SynthMode, SynthesizedSet};
