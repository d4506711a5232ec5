use super::Matrix;
use crate::{Error, Result};

/// Solves `a · x = b` for square `a` by LU with partial pivoting.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    a.ensure_shape(n, n)?;
    if b.rows() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, b.cols()),
            found: b.shape(),
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = scale * f64::EPSILON * n as f64;
    let m = x.cols();

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= tiny || pivot == 0.0 {
            return Err(Error::Singular);
        }
        if p != k {
            swap_rows(&mut lu.data, n, k, p);
            swap_rows(&mut x.data, m, k, p);
        }
        let (upper, lower) = lu.data.split_at_mut((k + 1) * n);
        let pivot_row = &upper[k * n..];
        let (x_upper, x_lower) = x.data.split_at_mut((k + 1) * m);
        let x_pivot = &x_upper[k * m..];
        for (row, x_row) in lower.chunks_exact_mut(n).zip(x_lower.chunks_exact_mut(m)) {
            let f = row[k] / pivot_row[k];
            row[k] = f;
            if f == 0.0 {
                continue;
            }
            for (v, &u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *v -= f * u;
            }
            for (v, &u) in x_row.iter_mut().zip(x_pivot) {
                *v -= f * u;
            }
        }
    }
    for k in (0..n).rev() {
        let (head, tail) = x.data.split_at_mut((k + 1) * m);
        let row = &mut head[k * m..];
        for (i, solved) in tail.chunks_exact(m).enumerate() {
            let c = lu.data[k * n + k + 1 + i];
            if c != 0.0 {
                for (v, &s) in row.iter_mut().zip(solved) {
                    *v -= c * s;
                }
            }
        }
        let piv = lu.data[k * n + k];
        row.iter_mut().for_each(|v| *v /= piv);
    }
    Ok(x)
}

fn swap_rows(data: &mut [f64], cols: usize, a: usize, b: usize) {
    let (lo, hi) = (a.min(b), a.max(b));
    let (first, second) = data.split_at_mut(hi * cols);
    first[lo * cols..(lo + 1) * cols].swap_with_slice(&mut second[..cols]);
}
