//! Ridge regression from attributes straight to features.

use crate::dataset::Dataset;
use crate::linalg::{lstsq_ridge, Matrix};
use crate::solver::ModelParams;
use crate::Result;

pub const DEFAULT_RIDGE: f64 = 1e-3;

/// `P = (AᵀA + ρI)⁻¹AᵀX`, packed as model parameters with `Q = I` and
/// `V = AP` so it plugs into the same synthesis path.
pub fn linear_regression(ds: &Dataset, ridge: f64) -> Result<ModelParams> {
    let p = lstsq_ridge(&ds.attributes, &ds.features, ridge)?;
    let v = ds.attributes.matmul(&p)?;
    Ok(ModelParams {
        q: Matrix::identity(p.cols()),
        p,
        v,
    })
}
