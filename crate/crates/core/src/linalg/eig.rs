//! Symmetric eigendecomposition: Householder reduction to tridiagonal form
//! followed by the implicit QL iteration with Wilkinson-style shifts.
//!
//! Deterministic for a given input; no pivoting depends on anything but the
//! data. The layout follows the classic EISPACK `tred2`/`tql2` pair.

use alloc::vec;
use alloc::vec::Vec;

use super::Matrix;
use crate::{Error, Result};

/// Per-eigenvalue cap on QL sweeps before reporting `NoConvergence`.
const MAX_QL_ITERS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: Matrix,
}

impl SymEig {
    /// `U · diag(λ) · Uᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        let mut scaled = u.clone();
        for i in 0..n {
            for (v, &l) in scaled.row_mut(i).iter_mut().zip(&self.eigenvalues) {
                *v *= l;
            }
        }
        scaled.matmul_t(u).expect("square factors")
    }
}

/// Eigendecomposition of the symmetric part `(A + Aᵀ)/2` of `a`.
pub fn sym_eig(a: &Matrix) -> Result<SymEig> {
    let n = a.rows();
    a.ensure_shape(n, n)?;
    a.ensure_finite()?;
    if n == 0 {
        return Ok(SymEig {
            eigenvalues: Vec::new(),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let sym = a.symmetrized();
    // z[i][j], row-major working copy
    let mut z: Vec<f64> = sym.into_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut z, &mut d, &mut e);

    // QL rotations act on eigenvector columns; keep them as contiguous rows.
    let mut zt = transpose_flat(n, &z);
    tql2(n, &mut zt, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |row, col| zt[order[col] * n + row]);
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

fn transpose_flat(n: usize, z: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = z[i * n + j];
        }
    }
    t
}

fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for &dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in j + 1..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// `vt` holds eigenvectors as rows.
fn tql2(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    // One threshold for the whole matrix. A running maximum starts near zero
    // for rank-deficient input and lets QL rotate on subnormal noise, where
    // the computed rotations stop being orthogonal.
    let tst1 = d.iter().zip(e.iter()).fold(0.0f64, |m, (a, b)| m.max(a.abs() + b.abs()));
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERS {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality_defect;

    fn check(a: &Matrix, eig: &SymEig) {
        let rel = eig.reconstruct().sub(a).unwrap().frobenius() / a.frobenius().max(1e-300);
        assert!(rel <= 1e-10, "reconstruction {rel}");
        let ut = eig.eigenvectors.transpose();
        assert!(orthogonality_defect(&ut) <= 1e-10);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_input() {
        let a = Matrix::from_diag(&[1.0, 2.0]);
        let eig = sym_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![2.0, 1.0]);
        // columns are ±e_1 / ±e_0
        assert!((eig.eigenvectors[(1, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((eig.eigenvectors[(0, 1)].abs() - 1.0).abs() < 1e-15);
        check(&a, &eig);

        let a = Matrix::from_diag(&[2.0, 1.0]);
        let eig = sym_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![2.0, 1.0]);
        assert!(eig.eigenvectors.map(f64::abs).sub(&Matrix::identity(2)).unwrap().frobenius() < 1e-15);
    }

    #[test]
    fn swap_matrix() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((eig.eigenvalues[1] + 1.0).abs() < 1e-15);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let u = &eig.eigenvectors;
        // (1,1)/√2 and (1,−1)/√2 up to sign
        assert!((u[(0, 0)].abs() - h).abs() < 1e-15 && (u[(0, 0)] - u[(1, 0)]).abs() < 1e-15);
        assert!((u[(0, 1)].abs() - h).abs() < 1e-15 && (u[(0, 1)] + u[(1, 1)]).abs() < 1e-15);
        check(&a, &eig);
    }

    #[test]
    fn degenerate_and_zero() {
        let eig = sym_eig(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![0.0; 3]);
        check(&Matrix::identity(4), &sym_eig(&Matrix::identity(4)).unwrap());
        for n in [5, 64, 100] {
            let ones = Matrix::from_fn(n, n, |_, _| 1.0);
            let eig = sym_eig(&ones).unwrap();
            assert!((eig.eigenvalues[0] - n as f64).abs() < 1e-12);
            check(&ones, &eig);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Matrix::identity(2);
        // bypass the constructor check
        a[(0, 1)] = f64::NAN;
        assert_eq!(sym_eig(&a).unwrap_err(), Error::NonFinite);
    }
}
