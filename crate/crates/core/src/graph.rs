//! Dual k-nn graphs over the visual and semantic spaces and their Laplacian.

use alloc::vec::Vec;

use crate::dataset::{class_rows, AttributeLevel, Dataset};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Neighbourhood size used when none is given.
pub const DEFAULT_K: usize = 10;

/// Visual graph, semantic graph, their mean and the Laplacian of the mean.
#[derive(Clone, Debug)]
pub struct GraphSet {
    pub w_visual: Matrix,
    pub w_semantic: Matrix,
    pub w_mean: Matrix,
    pub laplacian: Matrix,
}

/// Binary symmetric k-nn graph: `w_ij = 1` when either point is among the
/// other's `k` nearest neighbours. Distance ties go to the lower index.
pub fn knn_graph(points: &Matrix, k: usize) -> Result<Matrix> {
    let n = points.rows();
    if n < 2 || k == 0 || k > n - 1 {
        return Err(Error::BadK { k, n });
    }
    points.ensure_finite()?;
    let mut w = Matrix::zeros(n, n);
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        dist.clear();
        let pi = points.row(i);
        for j in (0..n).filter(|&j| j != i) {
            let d2: f64 = pi
                .iter()
                .zip(points.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist.push((d2, j));
        }
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in dist.iter().take(k) {
            w[(i, j)] = 1.0;
            w[(j, i)] = 1.0;
        }
    }
    Ok(w)
}

/// Same-class graph with weight `k / n_c` between distinct members of class `c`.
/// `labels` run over `1..=C`.
pub fn class_graph(labels: &[usize], k: usize) -> Result<Matrix> {
    if labels.is_empty() || k == 0 {
        return Err(Error::BadK { k, n: labels.len() });
    }
    if labels.contains(&0) {
        return Err(Error::InvalidArgument("class labels start at 1"));
    }
    let n = labels.len();
    let n_classes = labels.iter().copied().max().unwrap_or(0);
    let mut w = Matrix::zeros(n, n);
    for rows in class_rows(labels, n_classes) {
        if rows.len() < 2 {
            continue;
        }
        let weight = k as f64 / rows.len() as f64;
        for &i in &rows {
            for &j in &rows {
                if i != j {
                    w[(i, j)] = weight;
                }
            }
        }
    }
    Ok(w)
}

/// `L = diag(row sums of W) − W`.
pub fn laplacian(w: &Matrix) -> Matrix {
    let n = w.rows();
    let mut l = w.scale(-1.0);
    for i in 0..n {
        let degree: f64 = w.row(i).iter().sum();
        l[(i, i)] += degree;
    }
    l
}

impl GraphSet {
    /// Builds the graphs from two weight matrices.
    pub fn from_weights(w_visual: Matrix, w_semantic: Matrix) -> Result<Self> {
        let mut w_mean = w_visual.add(&w_semantic)?.scale(0.5);
        for i in 0..w_mean.rows() {
            w_mean[(i, i)] = 0.0;
        }
        let laplacian = laplacian(&w_mean);
        Ok(Self {
            w_visual,
            w_semantic,
            w_mean,
            laplacian,
        })
    }
}

/// Visual k-nn graph on the features; semantic graph from k-nn on
/// image-level attributes or the class graph for class-level ones.
/// `k` is clamped to `N − 1`.
pub fn build_graphset(ds: &Dataset, k: usize) -> Result<GraphSet> {
    let n = ds.len();
    if n < 2 {
        return Err(Error::BadK { k, n });
    }
    let k_eff = k.min(n - 1);
    let w_visual = knn_graph(&ds.features, k_eff)?;
    let w_semantic = match ds.attribute_level {
        AttributeLevel::ImageLevel => knn_graph(&ds.attributes, k_eff)?,
        AttributeLevel::ClassLevel => class_graph(&ds.labels, k)?,
    };
    GraphSet::from_weights(w_visual, w_semantic)
}

/// `Tr(Vᵀ L V)`.
pub fn laplacian_quadratic(l: &Matrix, v: &Matrix) -> Result<f64> {
    let lv = l.matmul(v)?;
    Ok(v.as_slice().iter().zip(lv.as_slice()).map(|(a, b)| a * b).sum())
}
