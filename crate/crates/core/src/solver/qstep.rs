//! Q-step: descent on the orthogonal group for
//!
//! ```text
//! f(Q) = ½‖X − VQ‖²_F − β Σ_d ‖(VQ)_d‖
//! ```
//!
//! using the Cayley curve `Y(τ) = (I + τ/2·Φ)⁻¹(I − τ/2·Φ)·Q` with
//! `Φ = ΔQᵀ − QΔᵀ` and backtracking Armijo on τ. Column norms below
//! `√N·eps_pi` are smoothed quadratically so the objective matches the
//! clamped reweighting `E`.

use alloc::vec::Vec;

use super::objective::weights_from_sq_norms;
use super::SolverConfig;
use crate::linalg::{orthogonality_defect, orthonormalize, solve, Matrix};
use crate::{Error, Result};

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 20;
const REORTH_DRIFT: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct QStepOutcome {
    pub q: Matrix,
    /// Accepted Cayley steps.
    pub iterations: usize,
    /// No step size passed the Armijo test on the first iteration; `q` is the
    /// starting rotation.
    pub line_search_failed: bool,
}

/// Euclidean gradient `Δ = Vᵀ(VQ − X) − β·VᵀVQE` with `E` taken at `Q`.
pub fn q_gradient(v: &Matrix, q: &Matrix, x: &Matrix, beta: f64, eps_pi: f64) -> Result<Matrix> {
    check(v, q, x)?;
    let vq = v.matmul(q)?;
    let e = weights_from_sq_norms(&vq.column_sq_norms(), v.rows(), eps_pi);
    let mut vqe = vq.clone();
    for i in 0..vqe.rows() {
        for (val, &w) in vqe.row_mut(i).iter_mut().zip(&e) {
            *val *= w;
        }
    }
    let mut delta = v.t_matmul(&vq.sub(x)?)?;
    delta.axpy(-beta, &v.t_matmul(&vqe)?)?;
    Ok(delta)
}

/// `½‖X − VQ‖² − β Σ_d h(‖(VQ)_d‖)`, with `h` the identity above
/// `δ = √N·eps_pi` and `r²/(2δ) + δ/2` below it.
pub fn q_objective(v: &Matrix, q: &Matrix, x: &Matrix, beta: f64, eps_pi: f64) -> Result<f64> {
    check(v, q, x)?;
    let vq = v.matmul(q)?;
    let delta = libm::sqrt(v.rows() as f64) * eps_pi;
    let reg: f64 = vq
        .column_sq_norms()
        .into_iter()
        .map(|s| smooth_norm(libm::sqrt(s), delta))
        .sum();
    Ok(0.5 * x.sub(&vq)?.frobenius_sq() - beta * reg)
}

fn check(v: &Matrix, q: &Matrix, x: &Matrix) -> Result<()> {
    let d = q.rows();
    q.ensure_shape(d, d)?;
    v.ensure_shape(x.rows(), d)?;
    x.ensure_shape(v.rows(), d)
}

#[inline]
fn smooth_norm(r: f64, delta: f64) -> f64 {
    if r >= delta {
        r
    } else {
        r * r / (2.0 * delta) + 0.5 * delta
    }
}

/// Gram form of the objective: everything reduces to D×D products with
/// `G = VᵀV` and `H = VᵀX`.
struct GramProblem {
    g: Matrix,
    h: Matrix,
    beta: f64,
    delta: f64,
    n: usize,
    eps_pi: f64,
}

/// Cached `G·Q` and the squared column norms `diag(QᵀGQ)` at a point.
struct Point {
    q: Matrix,
    gq: Matrix,
    sq: Vec<f64>,
}

impl GramProblem {
    fn point(&self, q: Matrix) -> Point {
        let gq = self.g.matmul(&q).expect("square");
        let d = q.cols();
        let mut sq = alloc::vec![0.0; d];
        for i in 0..q.rows() {
            for ((s, &a), &b) in sq.iter_mut().zip(q.row(i)).zip(gq.row(i)) {
                *s += a * b;
            }
        }
        Point { q, gq, sq }
    }

    fn gradient(&self, at: &Point, e: &[f64]) -> Matrix {
        let mut delta = at.gq.sub(&self.h).expect("square");
        for i in 0..delta.rows() {
            for ((val, &gq), &w) in delta.row_mut(i).iter_mut().zip(at.gq.row(i)).zip(e) {
                *val -= self.beta * gq * w;
            }
        }
        delta
    }

    /// `f(to) − f(from)`, evaluated through differences to avoid cancelling
    /// the large constant `½‖X‖²`.
    fn change(&self, from: &Point, to: &Point) -> f64 {
        let diff = to.q.sub(&from.q).expect("square");
        let sum_gq = to.gq.add(&from.gq).expect("square");
        let lin: f64 = diff.as_slice().iter().zip(self.h.as_slice()).map(|(a, b)| a * b).sum();
        // per-column dᵀ G s = s_to − s_from
        let mut col = alloc::vec![0.0; diff.cols()];
        for i in 0..diff.rows() {
            for ((c, &a), &b) in col.iter_mut().zip(diff.row(i)).zip(sum_gq.row(i)) {
                *c += a * b;
            }
        }
        let quad: f64 = col.iter().sum();
        let mut reg = 0.0;
        for (d, &dsq) in col.iter().enumerate() {
            let r_to = libm::sqrt(to.sq[d].max(0.0));
            let r_from = libm::sqrt(from.sq[d].max(0.0));
            reg += if r_to >= self.delta && r_from >= self.delta && r_to + r_from > 0.0 {
                dsq / (r_to + r_from)
            } else {
                smooth_norm(r_to, self.delta) - smooth_norm(r_from, self.delta)
            };
        }
        -lin + 0.5 * quad - self.beta * reg
    }

    fn weights(&self, at: &Point) -> Vec<f64> {
        weights_from_sq_norms(&at.sq, self.n, self.eps_pi)
    }
}

fn cayley(phi: &Matrix, tau: f64, q: &Matrix) -> Result<Matrix> {
    // (I + aΦ)⁻¹(I − aΦ) = 2(I + aΦ)⁻¹ − I
    let d = q.rows();
    let mut lhs = phi.scale(0.5 * tau);
    for i in 0..d {
        lhs[(i, i)] += 1.0;
    }
    let mut y = solve(&lhs, q)?.scale(2.0);
    y.axpy(-1.0, q)?;
    Ok(y)
}

/// Runs Cayley descent from `q0` until `‖Q_{t+1} − Q_t‖_F ≤ q_tol` or
/// `q_max_iters` steps.
pub fn q_step(v: &Matrix, q0: &Matrix, x: &Matrix, cfg: &SolverConfig) -> Result<QStepOutcome> {
    check(v, q0, x)?;
    if orthogonality_defect(q0) > 1e-8 {
        return Err(Error::InvalidArgument("starting rotation is not orthogonal"));
    }
    let problem = GramProblem {
        g: v.t_matmul(v)?,
        h: v.t_matmul(x)?,
        beta: cfg.beta,
        delta: libm::sqrt(v.rows() as f64) * cfg.eps_pi,
        n: v.rows(),
        eps_pi: cfg.eps_pi,
    };
    let mut current = problem.point(q0.clone());
    let frozen = (!cfg.refresh_weights_per_inner).then(|| problem.weights(&current));
    let mut iterations = 0;
    let mut line_search_failed = false;
    let mut tau_start = cfg.tau_init;

    for _ in 0..cfg.q_max_iters {
        let e = match &frozen {
            Some(e) => e.clone(),
            None => problem.weights(&current),
        };
        let delta = problem.gradient(&current, &e);
        let m = delta.matmul_t(&current.q)?;
        let phi = m.sub(&m.transpose())?;
        let phi_sq = phi.frobenius_sq();
        if phi_sq == 0.0 {
            break;
        }
        // d f(Y(τ))/dτ at τ = 0 is −½‖Φ‖²
        let slope = 0.5 * phi_sq;
        let mut tau = tau_start;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let y = cayley(&phi, tau, &current.q)?;
            let candidate = problem.point(y);
            if problem.change(&current, &candidate) <= -ARMIJO_C * tau * slope {
                accepted = Some(candidate);
                // next search starts one doubling above the accepted step
                tau_start = (2.0 * tau).min(cfg.tau_init);
                break;
            }
            tau *= 0.5;
        }
        let Some(next) = accepted else {
            if tau_start < cfg.tau_init {
                // retry once from the full initial step before giving up
                tau_start = cfg.tau_init;
                continue;
            }
            line_search_failed = iterations == 0;
            break;
        };
        let step = next.q.sub(&current.q)?.frobenius();
        current = next;
        iterations += 1;
        if step <= cfg.q_tol {
            break;
        }
    }
    // Cayley steps are orthogonal up to rounding, so drift is checked once
    let q = if orthogonality_defect(&current.q) > REORTH_DRIFT {
        orthonormalize(&current.q)?
    } else {
        current.q
    };
    Ok(QStepOutcome {
        q,
        iterations,
        line_search_failed,
    })
}
