use super::{sym_eig, Matrix, SymEig};
use crate::{Error, Result};

/// Relative eigenvalue floor of `AᵀA` below which the design is rank deficient.
const RANK_GUARD: f64 = 1e-10;

/// `argmin_P ‖B − A·P‖²_F` through the eigendecomposition of `AᵀA`.
pub fn lstsq(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let (gram, atb) = normal_parts(a, b)?;
    let eig = sym_eig(&gram)?;
    let max = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if max <= 0.0 || min < RANK_GUARD * max {
        return Err(Error::RankDeficient {
            min_eig: min,
            max_eig: max,
        });
    }
    Ok(apply_inverse(&eig, &atb, 0.0))
}

/// `(AᵀA + ridge·I)⁻¹ AᵀB`, the minimiser of `‖B − AP‖²_F + ridge·‖P‖²_F`.
pub fn lstsq_ridge(a: &Matrix, b: &Matrix, ridge: f64) -> Result<Matrix> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::InvalidArgument("ridge must be finite and non-negative"));
    }
    let (gram, atb) = normal_parts(a, b)?;
    let eig = sym_eig(&gram)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min + ridge <= 0.0 {
        return Err(Error::RankDeficient {
            min_eig: min,
            max_eig: eig.eigenvalues.first().copied().unwrap_or(0.0),
        });
    }
    Ok(apply_inverse(&eig, &atb, ridge))
}

/// The fallback ridge `1e-8 · trace(AᵀA) / m` used when `lstsq` reports rank deficiency.
pub fn normal_ridge(a: &Matrix) -> f64 {
    let m = a.cols().max(1) as f64;
    1e-8 * a.frobenius_sq() / m
}

fn normal_parts(a: &Matrix, b: &Matrix) -> Result<(Matrix, Matrix)> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            expected: (a.rows(), b.cols()),
            found: b.shape(),
        });
    }
    a.ensure_finite()?;
    b.ensure_finite()?;
    Ok((a.t_matmul(a)?, a.t_matmul(b)?))
}

fn apply_inverse(eig: &SymEig, rhs: &Matrix, ridge: f64) -> Matrix {
    let u = &eig.eigenvectors;
    let mut coeff = u.t_matmul(rhs).expect("shapes checked");
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let inv = 1.0 / (l + ridge);
        coeff.row_mut(i).iter_mut().for_each(|v| *v *= inv);
    }
    u.matmul(&coeff).expect("shapes checked")
}
