//! Alternating minimisation of
//!
//! ```text
//! J = ‖X − VQ‖²_F + α‖V − AP‖²_F + λ Tr(VᵀLV) − β ‖VQ‖_{col 2,1}    s.t. QQᵀ = I
//! ```
//!
//! over the latent matrix `V`, the rotation `Q` and the projection `P`.
//! Each outer iteration runs a V-step (symmetric Sylvester solve), a Q-step
//! (Cayley-transform descent on the orthogonal group) and a P-step (least
//! squares).

mod objective;
mod qstep;
mod vstep;

use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::graph::GraphSet;
use crate::linalg::{lstsq, lstsq_ridge, normal_ridge, orthogonality_defect, Matrix};
use crate::{Error, Result};

pub use objective::{diffusion_stats, diffusion_weights, loss, DiffusionStats};
pub use qstep::{q_gradient, q_objective, q_step, QStepOutcome};
pub use vstep::{v_step, v_step_uncentered, LeftOperator};

/// Relative change in `J` between outer iterations that ends the fit early.
pub const EARLY_STOP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Graph-regularisation weight λ.
    pub lambda: f64,
    /// Diffusion weight β.
    pub beta: f64,
    /// Centring weight γ of the V-step.
    pub gamma: f64,
    /// Weight α of the attribute fit `‖V − AP‖²`.
    pub alpha: f64,
    /// Neighbourhood size of the k-nn graphs.
    pub k: usize,
    pub outer_iters: usize,
    pub q_max_iters: usize,
    pub q_tol: f64,
    pub tau_init: f64,
    pub eps_pi: f64,
    /// Recompute the diffusion weights at every inner Q iteration; when off
    /// they are frozen at the start of each Q-step.
    pub refresh_weights_per_inner: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            beta: 0.03,
            gamma: 1.0,
            alpha: 1.0,
            k: crate::graph::DEFAULT_K,
            outer_iters: 10,
            q_max_iters: 50,
            q_tol: 1e-6,
            tau_init: 0.1,
            eps_pi: 1e-10,
            refresh_weights_per_inner: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !non_negative(self.lambda) {
            return Err(Error::InvalidConfig("lambda must be finite and >= 0"));
        }
        if !non_negative(self.beta) {
            return Err(Error::InvalidConfig("beta must be finite and >= 0"));
        }
        if !non_negative(self.gamma) {
            return Err(Error::InvalidConfig("gamma must be finite and >= 0"));
        }
        if !positive(self.alpha) {
            return Err(Error::InvalidConfig("alpha must be finite and > 0"));
        }
        if !(positive(self.q_tol) && positive(self.tau_init) && positive(self.eps_pi)) {
            return Err(Error::InvalidConfig("tolerances and step sizes must be > 0"));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1"));
        }
        Ok(())
    }
}

/// Projection `P` (M×D), rotation `Q` (D×D) and latent matrix `V` (N×D).
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub p: Matrix,
    pub q: Matrix,
    pub v: Matrix,
}

impl ModelParams {
    /// `Q = I`, `V = X`, `P = argmin ‖V − AP‖`.
    pub fn initial(ds: &Dataset) -> Result<Self> {
        let v = ds.features.clone();
        let p = p_step(&ds.attributes, &v).or_else(|e| match e {
            Error::RankDeficient { .. } => {
                lstsq_ridge(&ds.attributes, &v, normal_ridge(&ds.attributes))
            }
            other => Err(other),
        })?;
        Ok(Self {
            p,
            q: Matrix::identity(ds.feature_dim()),
            v,
        })
    }

    /// The composed attribute-to-feature map `P·Q`.
    pub fn projection(&self) -> Result<Matrix> {
        self.p.matmul(&self.q)
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: ModelParams,
    /// `J` at initialisation followed by `J` after every outer iteration.
    pub loss_trace: Vec<f64>,
    /// Outer iteration at which the early-stop test fired.
    pub converged_at: Option<usize>,
    /// Number of Q-steps whose line search found no admissible step.
    pub line_search_failures: usize,
}

/// Least-squares P-step, `P = (AᵀA)⁻¹AᵀV`.
pub fn p_step(attributes: &Matrix, v: &Matrix) -> Result<Matrix> {
    lstsq(attributes, v)
}

/// Runs the alternating optimisation.
pub fn fit(ds: &Dataset, gs: &GraphSet, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    let n = ds.len();
    gs.laplacian.ensure_shape(n, n)?;
    let left = LeftOperator::new(&gs.laplacian, cfg.lambda, cfg.gamma)?;
    fit_with_left(ds, gs, cfg, &left)
}

/// [`fit`] with the V-step's left operand already decomposed. The operand
/// only depends on the Laplacian, λ and γ, so grid searches can share it.
pub fn fit_with_left(
    ds: &Dataset,
    gs: &GraphSet,
    cfg: &SolverConfig,
    left: &LeftOperator,
) -> Result<FitResult> {
    cfg.validate()?;
    let mut params = ModelParams::initial(ds)?;
    let mut trace = Vec::with_capacity(cfg.outer_iters + 1);
    let j0 = loss(ds, gs, &params, cfg)?;
    trace.push(j0);
    let mut converged_at = None;
    let mut line_search_failures = 0;

    for t in 1..=cfg.outer_iters {
        params.v = vstep::v_step_with_left(ds, &params, cfg, left)?;

        let outcome = q_step(&params.v, &params.q, &ds.features, cfg)?;
        if outcome.line_search_failed {
            line_search_failures += 1;
        }
        params.q = outcome.q;

        params.p = match p_step(&ds.attributes, &params.v) {
            Ok(p) => p,
            Err(Error::RankDeficient { .. }) => {
                lstsq_ridge(&ds.attributes, &params.v, normal_ridge(&ds.attributes))?
            }
            Err(e) => return Err(e),
        };

        let j = match loss(ds, gs, &params, cfg) {
            Ok(j) if j.is_finite() => j,
            Ok(_) | Err(Error::NonFinite) => return Err(Error::Diverged { iteration: t }),
            Err(e) => return Err(e),
        };
        let prev = *trace.last().expect("initial loss recorded");
        trace.push(j);
        if (j - prev).abs() <= EARLY_STOP_TOL * (1.0 + prev.abs()) {
            converged_at = Some(t);
            break;
        }
    }
    debug_assert!(orthogonality_defect(&params.q) <= 1e-8);
    Ok(FitResult {
        params,
        loss_trace: trace,
        converged_at,
        line_search_failures,
    })
}
