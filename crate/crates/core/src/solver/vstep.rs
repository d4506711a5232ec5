//! V-step: with `P`, `Q` and the reweighting `E` fixed, the stationarity
//! condition of the objective in `V` is the Sylvester equation
//!
//! ```text
//! V·(2QQᵀ + 2αI − βQEQᵀ) + (2λL + γ·11ᵀ)·V = 2XQᵀ + 2αAP
//! ```
//!
//! whose two operands are symmetric. The solution is re-centred afterwards.

use super::objective::weights_from_sq_norms;
use super::{ModelParams, SolverConfig};
use crate::dataset::Dataset;
use crate::graph::GraphSet;
use crate::linalg::{center_columns, solve_sylvester_with_left, sym_eig, Matrix, SymEig};
use crate::Result;

/// Eigendecomposition of the left operand `2λL + γ·11ᵀ`.
#[derive(Clone, Debug)]
pub struct LeftOperator {
    eig: SymEig,
    norm: f64,
}

impl LeftOperator {
    pub fn new(laplacian: &Matrix, lambda: f64, gamma: f64) -> Result<Self> {
        let m = left_matrix(laplacian, lambda, gamma);
        let norm = m.frobenius();
        Ok(Self {
            eig: sym_eig(&m)?,
            norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.eig.eigenvalues.len()
    }
}

fn left_matrix(laplacian: &Matrix, lambda: f64, gamma: f64) -> Matrix {
    let mut m = laplacian.scale(2.0 * lambda);
    let n = m.rows();
    for i in 0..n {
        for v in m.row_mut(i) {
            *v += gamma;
        }
    }
    m
}

/// The V-step solution before re-centring.
pub fn v_step_uncentered(
    ds: &Dataset,
    gs: &GraphSet,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Matrix> {
    let left = LeftOperator::new(&gs.laplacian, cfg.lambda, cfg.gamma)?;
    solve(ds, params, cfg, &left)
}

/// V-step followed by column re-centring.
pub fn v_step(ds: &Dataset, gs: &GraphSet, params: &ModelParams, cfg: &SolverConfig) -> Result<Matrix> {
    Ok(center_columns(&v_step_uncentered(ds, gs, params, cfg)?)?.0)
}

pub(crate) fn v_step_with_left(
    ds: &Dataset,
    params: &ModelParams,
    cfg: &SolverConfig,
    left: &LeftOperator,
) -> Result<Matrix> {
    Ok(center_columns(&solve(ds, params, cfg, left)?)?.0)
}

fn solve(ds: &Dataset, params: &ModelParams, cfg: &SolverConfig, left: &LeftOperator) -> Result<Matrix> {
    let (n, d) = (ds.len(), ds.feature_dim());
    params.v.ensure_shape(n, d)?;
    params.q.ensure_shape(d, d)?;
    left.eig.eigenvectors.ensure_shape(n, n)?;
    let q = &params.q;

    let vq = params.v.matmul(q)?;
    let e = weights_from_sq_norms(&vq.column_sq_norms(), n, cfg.eps_pi);
    // Q·E·Qᵀ
    let mut qe = q.clone();
    for i in 0..d {
        for (v, &w) in qe.row_mut(i).iter_mut().zip(&e) {
            *v *= w;
        }
    }
    let qeqt = qe.matmul_t(q)?;
    let qqt = q.matmul_t(q)?;
    let mut right = qqt.scale(2.0);
    right.axpy(-cfg.beta, &qeqt)?;
    for i in 0..d {
        right[(i, i)] += 2.0 * cfg.alpha;
    }
    let right = right.symmetrized();

    let mut rhs = ds.features.matmul_t(q)?.scale(2.0);
    rhs.axpy(2.0 * cfg.alpha, &ds.attributes.matmul(&params.p)?)?;

    solve_sylvester_with_left(&left.eig, left.norm, &right, &rhs)
}
