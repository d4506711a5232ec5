//! Synthesis of unseen-class features and recognition by nearest neighbour
//! or a one-vs-rest linear SVM.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{class_means, AttributeLevel};
use crate::linalg::{dot, Matrix};
use crate::solver::ModelParams;
use crate::{Error, Result};

/// `A·P·Q`: features for attribute rows `A`, in the centred feature space.
pub fn synthesize(attrs: &Matrix, params: &ModelParams) -> Result<Matrix> {
    attrs.ensure_shape(attrs.rows(), params.p.rows())?;
    attrs.matmul(&params.p)?.matmul(&params.q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthMode {
    /// One row per class.
    Prototype,
    /// One row per attribute instance.
    Sample,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedSet {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub mode: SynthMode,
}

impl SynthesizedSet {
    pub fn new(features: Matrix, labels: Vec<usize>, mode: SynthMode) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: features.rows(),
                found: labels.len(),
            });
        }
        Ok(Self {
            features,
            labels,
            mode,
        })
    }

    /// Synthesises one sample per attribute row.
    pub fn samples(attrs: &Matrix, labels: &[usize], params: &ModelParams) -> Result<Self> {
        Self::new(synthesize(attrs, params)?, labels.to_vec(), SynthMode::Sample)
    }
}

/// How class prototypes are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrototypeMode {
    /// Synthesise from the class-mean attribute vector.
    CA,
    /// Average the features synthesised from each image's attributes.
    MF,
}

/// One prototype per class. `labels` run over `1..=n_classes`; every class
/// needs at least one row.
pub fn prototype_modes(
    attrs: &Matrix,
    labels: &[usize],
    n_classes: usize,
    level: AttributeLevel,
    params: &ModelParams,
    mode: PrototypeMode,
) -> Result<SynthesizedSet> {
    if attrs.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: attrs.rows(),
            found: labels.len(),
        });
    }
    if labels.iter().any(|&l| l == 0 || l > n_classes) {
        return Err(Error::InvalidArgument("labels must lie in 1..=n_classes"));
    }
    let features = match (mode, level) {
        (PrototypeMode::MF, AttributeLevel::ImageLevel) => {
            class_means(&synthesize(attrs, params)?, labels, n_classes)
        }
        _ => synthesize(&class_means(attrs, labels, n_classes), params)?,
    };
    SynthesizedSet::new(features, (1..=n_classes).collect(), SynthMode::Prototype)
}

/// Label of the nearest anchor row for every query. Exact distance ties go
/// to the lowest label.
pub fn nn_classify(queries: &Matrix, anchors: &SynthesizedSet) -> Result<Vec<usize>> {
    if anchors.labels.is_empty() {
        return Err(Error::EmptyAnchors);
    }
    queries.ensure_shape(queries.rows(), anchors.features.cols())?;
    let out = (0..queries.rows())
        .map(|i| {
            let q = queries.row(i);
            let mut best = (f64::INFINITY, usize::MAX);
            for (a, &label) in anchors.labels.iter().enumerate() {
                let d2: f64 = q
                    .iter()
                    .zip(anchors.features.row(a))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if d2 < best.0 || (d2 == best.0 && label < best.1) {
                    best = (d2, label);
                }
            }
            best.1
        })
        .collect();
    Ok(out)
}

pub const SVM_REG_C: f64 = 1.0;
pub const SVM_ITERS: usize = 500;

/// One-vs-rest linear classifiers `w_cᵀx + b_c`, one per class in `classes`
/// (ascending).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSvmModel {
    pub classes: Vec<usize>,
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub reg_c: f64,
    pub iters: usize,
}

/// Minimises `reg_c/2·‖w‖² + mean_i max(0, 1 − y_i(wᵀx_i + b))` per class by
/// full-batch subgradient descent with step `1/(reg_c·t)`. The bias is not
/// regularised. The procedure is deterministic; `seed` is accepted for
/// interface stability and does not influence the result.
pub fn svm_train(
    features: &Matrix,
    labels: &[usize],
    reg_c: f64,
    iters: usize,
    _seed: u64,
) -> Result<LinearSvmModel> {
    if features.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: features.rows(),
            found: labels.len(),
        });
    }
    if !(reg_c.is_finite() && reg_c > 0.0) {
        return Err(Error::InvalidArgument("reg_c must be positive"));
    }
    features.ensure_finite()?;
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let (n, d) = features.shape();
    let mut weights = Matrix::zeros(classes.len(), d);
    let mut biases = vec![0.0; classes.len()];
    let mut grad = vec![0.0; d];
    for (c, &class) in classes.iter().enumerate() {
        let w = weights.row_mut(c);
        let mut b = 0.0;
        for t in 1..=iters {
            let step = 1.0 / (reg_c * t as f64);
            grad.iter_mut().zip(w.iter()).for_each(|(g, &wi)| *g = reg_c * wi);
            let mut grad_b = 0.0;
            for (i, &label) in labels.iter().enumerate() {
                let y = if label == class { 1.0 } else { -1.0 };
                let x = features.row(i);
                if y * (dot(w, x) + b) < 1.0 {
                    for (g, &xi) in grad.iter_mut().zip(x) {
                        *g -= y * xi / n as f64;
                    }
                    grad_b -= y / n as f64;
                }
            }
            w.iter_mut().zip(&grad).for_each(|(wi, g)| *wi -= step * g);
            b -= step * grad_b;
        }
        biases[c] = b;
    }
    weights.ensure_finite()?;
    Ok(LinearSvmModel {
        classes,
        weights,
        biases,
        reg_c,
        iters,
    })
}

/// Class with the highest score per query; ties go to the lowest label.
pub fn svm_predict(model: &LinearSvmModel, queries: &Matrix) -> Result<Vec<usize>> {
    queries.ensure_shape(queries.rows(), model.weights.cols())?;
    let out = (0..queries.rows())
        .map(|i| {
            let x = queries.row(i);
            let mut best = (f64::NEG_INFINITY, model.classes[0]);
            for (c, &class) in model.classes.iter().enumerate() {
                let s = dot(model.weights.row(c), x) + model.biases[c];
                if s > best.0 {
                    best = (s, class);
                }
            }
            best.1
        })
        .collect();
    Ok(out)
}
