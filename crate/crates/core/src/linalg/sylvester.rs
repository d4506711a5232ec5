//! `V·M_R + M_L·V = C` for symmetric `M_L`, `M_R` by diagonalizing both sides.

use super::{sym_eig, Matrix, SymEig};
use crate::{Error, Result};

const PENCIL_GUARD: f64 = 1e-12;

pub fn solve_sylvester_symmetric(m_left: &Matrix, m_right: &Matrix, c: &Matrix) -> Result<Matrix> {
    m_left.ensure_finite()?;
    m_right.ensure_finite()?;
    let left = sym_eig(m_left)?;
    solve_sylvester_with_left(&left, m_left.frobenius(), m_right, c)
}

/// Same as [`solve_sylvester_symmetric`] with the left operand already
/// decomposed; `left_norm` is its Frobenius norm, used by the pencil guard.
pub fn solve_sylvester_with_left(
    left: &SymEig,
    left_norm: f64,
    m_right: &Matrix,
    c: &Matrix,
) -> Result<Matrix> {
    let n = left.eigenvalues.len();
    let d = m_right.rows();
    m_right.ensure_shape(d, d)?;
    c.ensure_shape(n, d)?;
    m_right.ensure_finite()?;
    c.ensure_finite()?;

    let right = sym_eig(m_right)?;
    let guard = PENCIL_GUARD * (left_norm + m_right.frobenius());
    let mut min_abs_sum = f64::INFINITY;
    for &l in &left.eigenvalues {
        for &r in &right.eigenvalues {
            min_abs_sum = min_abs_sum.min((l + r).abs());
        }
    }
    if n > 0 && d > 0 && !(min_abs_sum >= guard && min_abs_sum > 0.0) {
        return Err(Error::SingularPencil { min_abs_sum, guard });
    }

    let ul = &left.eigenvectors;
    let ur = &right.eigenvectors;
    let mut t = ul.t_matmul(c)?.matmul(ur)?;
    for (i, &l) in left.eigenvalues.iter().enumerate() {
        for (v, &r) in t.row_mut(i).iter_mut().zip(&right.eigenvalues) {
            *v /= l + r;
        }
    }
    ul.matmul(&t)?.matmul_t(ur)
}
