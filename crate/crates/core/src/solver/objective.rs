use alloc::vec::Vec;

use super::{ModelParams, SolverConfig};
use crate::dataset::Dataset;
use crate::graph::{laplacian_quadratic, GraphSet};
use crate::linalg::{column_l21, Matrix};
use crate::{Error, Result};

/// Full objective `‖X − VQ‖² + α‖V − AP‖² + λTr(VᵀLV) − β‖VQ‖_{2,1}`.
pub fn loss(ds: &Dataset, gs: &GraphSet, params: &ModelParams, cfg: &SolverConfig) -> Result<f64> {
    let (n, d, m) = (ds.len(), ds.feature_dim(), ds.attribute_dim());
    params.v.ensure_shape(n, d)?;
    params.q.ensure_shape(d, d)?;
    params.p.ensure_shape(m, d)?;
    gs.laplacian.ensure_shape(n, n)?;

    let vq = params.v.matmul(&params.q)?;
    let fit_x = ds.features.sub(&vq)?.frobenius_sq();
    let fit_a = params.v.sub(&ds.attributes.matmul(&params.p)?)?.frobenius_sq();
    let graph = if cfg.lambda != 0.0 {
        laplacian_quadratic(&gs.laplacian, &params.v)?
    } else {
        0.0
    };
    let diffusion = if cfg.beta != 0.0 { column_l21(&vq)? } else { 0.0 };
    let j = fit_x + cfg.alpha * fit_a + cfg.lambda * graph - cfg.beta * diffusion;
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite)
    }
}

/// Diagonal reweighting `E` with `e_d = 1 / (√N · max(π_d, eps_pi))`, where
/// `π_d` is the root mean square of column `d` of `VQ`.
pub fn diffusion_weights(v: &Matrix, q: &Matrix, eps_pi: f64) -> Result<Matrix> {
    let x = v.matmul(q)?;
    Ok(Matrix::from_diag(&weights_from_sq_norms(
        &x.column_sq_norms(),
        x.rows(),
        eps_pi,
    )))
}

/// `e_d` from squared column norms `‖x_d‖² = N·π_d²`.
pub(crate) fn weights_from_sq_norms(sq_norms: &[f64], n: usize, eps_pi: f64) -> Vec<f64> {
    let sqrt_n = libm::sqrt(n as f64);
    sq_norms
        .iter()
        .map(|&s| {
            let pi = libm::sqrt(s / n as f64);
            1.0 / (sqrt_n * pi.max(eps_pi))
        })
        .collect()
}

/// Variance bookkeeping of the rotated embedding `X = VQ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionStats {
    /// Per-dimension variances `σ'_d = Σ_n x²_nd / N`.
    pub sigma: Vec<f64>,
    /// Per-dimension standard deviations `π_d = √σ'_d`.
    pub pi: Vec<f64>,
    /// Variance of the standard deviations, `Π`.
    pub pi_variance: f64,
    /// Total variance `Γ = N·Σσ'_d`.
    pub gamma_total: f64,
}

impl DiffusionStats {
    /// `ε = Σσ'_d`.
    pub fn epsilon(&self) -> f64 {
        self.sigma.iter().sum()
    }

    /// Statistics of an already rotated, centred matrix.
    pub fn of(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let sigma: Vec<f64> = x.column_sq_norms().into_iter().map(|s| s / n).collect();
        let pi: Vec<f64> = sigma.iter().map(|&s| libm::sqrt(s)).collect();
        let d = pi.len().max(1) as f64;
        let mean = pi.iter().sum::<f64>() / d;
        let pi_variance = pi.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / d;
        let gamma_total = n * sigma.iter().sum::<f64>();
        Self {
            sigma,
            pi,
            pi_variance,
            gamma_total,
        }
    }
}

/// Statistics of `VQ` for a centred `V`.
pub fn diffusion_stats(v: &Matrix, q: &Matrix) -> Result<DiffusionStats> {
    Ok(DiffusionStats::of(&v.matmul(q)?))
}
