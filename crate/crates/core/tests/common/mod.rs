//! Helpers shared by the integration tests: seeded random matrices and a
//! dense Gaussian-elimination oracle.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use uvds_core::linalg::orthonormalize;
use uvds_core::Matrix;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random(rows: usize, cols: usize, rng: &mut StdRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_sym(n: usize, rng: &mut StdRng) -> Matrix {
    random(n, n, rng).symmetrized()
}

/// `BBᵀ + shift·I`.
pub fn random_spd(n: usize, shift: f64, rng: &mut StdRng) -> Matrix {
    let b = random(n, n, rng);
    let mut m = b.matmul_t(&b).unwrap();
    for i in 0..n {
        m[(i, i)] += shift;
    }
    m
}

pub fn random_orthogonal(n: usize, rng: &mut StdRng) -> Matrix {
    orthonormalize(&random(n, n, rng)).unwrap()
}

pub fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().frobenius() / b.frobenius().max(1e-300)
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `(AᵀA)⁻¹AᵀB` column by column through the oracle solver.
pub fn normal_equations(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = a.shape();
    let d = b.cols();
    let ata: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| (0..n).map(|r| a[(r, i)] * a[(r, j)]).sum()).collect())
        .collect();
    let mut p = Matrix::zeros(m, d);
    for c in 0..d {
        let rhs: Vec<f64> = (0..m).map(|i| (0..n).map(|r| a[(r, i)] * b[(r, c)]).sum()).collect();
        for (i, v) in gauss_solve(ata.clone(), rhs).into_iter().enumerate() {
            p[(i, c)] = v;
        }
    }
    p
}
