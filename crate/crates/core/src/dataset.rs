//! Training/test data model: centred visual features, raw attributes and
//! contiguously relabelled classes, split into seen and unseen sides.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{center_columns, Matrix};
use crate::{Error, Result};

/// Whether attributes are shared per class or given per image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttributeLevel {
    ClassLevel,
    ImageLevel,
}

/// Which original class ids are seen during training and which are held out.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitSpec {
    pub seen_classes: Vec<i64>,
    pub unseen_classes: Vec<i64>,
    pub validation_fraction: f64,
}

impl SplitSpec {
    pub fn new(seen: Vec<i64>, unseen: Vec<i64>, validation_fraction: f64) -> Result<Self> {
        let spec = Self {
            seen_classes: seen,
            unseen_classes: unseen,
            validation_fraction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seen_classes.is_empty() {
            return Err(Error::EmptySide("seen"));
        }
        if self.unseen_classes.is_empty() {
            return Err(Error::EmptySide("unseen"));
        }
        if let Some(&c) = self.seen_classes.iter().find(|c| self.unseen_classes.contains(c)) {
            return Err(Error::SplitOverlap(c));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidArgument("validation fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Seen-class training data. `labels` run over `1..=C`; `class_ids[c - 1]`
/// is the original id of class `c`.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub features: Matrix,
    pub attributes: Matrix,
    pub labels: Vec<usize>,
    pub attribute_level: AttributeLevel,
    /// Mean subtracted from the raw features.
    pub feature_mean: Vec<f64>,
    pub class_ids: Vec<i64>,
}

impl Dataset {
    /// Centres `features`, relabels `labels` to `1..=C` and checks the
    /// class-level attribute invariant.
    pub fn new(
        features: Matrix,
        attributes: Matrix,
        labels: &[i64],
        attribute_level: AttributeLevel,
    ) -> Result<Self> {
        check_rows(&features, &attributes, labels.len())?;
        if labels.is_empty() {
            return Err(Error::EmptySide("seen"));
        }
        let (features, feature_mean) = center_columns(&features)?;
        attributes.ensure_finite()?;
        let (labels, class_ids) = relabel(labels);
        let ds = Self {
            features,
            attributes,
            labels,
            attribute_level,
            feature_mean,
            class_ids,
        };
        if attribute_level == AttributeLevel::ClassLevel {
            ds.check_class_level()?;
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_ids.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn attribute_dim(&self) -> usize {
        self.attributes.cols()
    }

    /// Row indices of each class, ordered by class label.
    pub fn class_rows(&self) -> Vec<Vec<usize>> {
        class_rows(&self.labels, self.n_classes())
    }

    fn check_class_level(&self) -> Result<()> {
        for (c, rows) in self.class_rows().iter().enumerate() {
            if let Some((&first, rest)) = rows.split_first() {
                let reference = self.attributes.row(first);
                if rest.iter().any(|&r| self.attributes.row(r) != reference) {
                    return Err(Error::InconsistentClassAttributes {
                        class: self.class_ids[c],
                    });
                }
            }
        }
        Ok(())
    }
}

/// Unseen-class test data. Features, when present, are centred with the
/// seen-side mean and are only used for evaluation.
#[derive(Clone, Debug)]
pub struct UnseenSet {
    pub attributes: Matrix,
    pub labels: Vec<usize>,
    pub class_ids: Vec<i64>,
    pub true_features: Option<Matrix>,
}

impl UnseenSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_ids.len()
    }
}

/// Splits a labelled corpus into the seen training set and the unseen test set.
pub fn split_by_classes(
    features: &Matrix,
    attributes: &Matrix,
    labels: &[i64],
    level: AttributeLevel,
    split: &SplitSpec,
) -> Result<(Dataset, UnseenSet)> {
    split.validate()?;
    check_rows(features, attributes, labels.len())?;
    for &c in split.seen_classes.iter().chain(&split.unseen_classes) {
        if !labels.contains(&c) {
            return Err(Error::UnknownClass(c));
        }
    }
    let seen_idx: Vec<usize> = (0..labels.len())
        .filter(|&i| split.seen_classes.contains(&labels[i]))
        .collect();
    let unseen_idx: Vec<usize> = (0..labels.len())
        .filter(|&i| split.unseen_classes.contains(&labels[i]))
        .collect();
    if seen_idx.is_empty() {
        return Err(Error::EmptySide("seen"));
    }
    if unseen_idx.is_empty() {
        return Err(Error::EmptySide("unseen"));
    }

    let seen_labels: Vec<i64> = seen_idx.iter().map(|&i| labels[i]).collect();
    let seen = Dataset::new(
        features.select_rows(&seen_idx),
        attributes.select_rows(&seen_idx),
        &seen_labels,
        level,
    )?;

    let unseen_raw: Vec<i64> = unseen_idx.iter().map(|&i| labels[i]).collect();
    let (unseen_labels, unseen_ids) = relabel(&unseen_raw);
    let true_features = features
        .select_rows(&unseen_idx)
        .sub_row_vector(&seen.feature_mean)?;
    let unseen = UnseenSet {
        attributes: attributes.select_rows(&unseen_idx),
        labels: unseen_labels,
        class_ids: unseen_ids,
        true_features: Some(true_features),
    };
    if level == AttributeLevel::ClassLevel {
        let rows = class_rows(&unseen.labels, unseen.n_classes());
        for (c, rows) in rows.iter().enumerate() {
            if let Some((&first, rest)) = rows.split_first() {
                if rest.iter().any(|&r| unseen.attributes.row(r) != unseen.attributes.row(first)) {
                    return Err(Error::InconsistentClassAttributes {
                        class: unseen.class_ids[c],
                    });
                }
            }
        }
    }
    Ok((seen, unseen))
}

/// Per-class mean attribute rows. Row `c - 1` belongs to label `c`; the
/// returned labels are `1..=C` in ascending order.
pub fn class_mean_attributes(ds: &Dataset) -> (Matrix, Vec<usize>) {
    let means = class_means(&ds.attributes, &ds.labels, ds.n_classes());
    (means, (1..=ds.n_classes()).collect())
}

/// Row means per label (`labels` in `1..=n_classes`). Classes without rows
/// get a zero row.
pub fn class_means(m: &Matrix, labels: &[usize], n_classes: usize) -> Matrix {
    let mut out = Matrix::zeros(n_classes, m.cols());
    let mut counts = vec![0usize; n_classes];
    for (i, &l) in labels.iter().enumerate() {
        counts[l - 1] += 1;
        for (o, &v) in out.row_mut(l - 1).iter_mut().zip(m.row(i)) {
            *o += v;
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 {
            let inv = n as f64;
            out.row_mut(c).iter_mut().for_each(|v| *v /= inv);
        }
    }
    out
}

/// Class-stratified hold-out. Each class gives `⌈fraction·n_c⌉` rows (capped
/// at `n_c − 1`) to the validation side. The training side is re-centred with
/// its own mean, and the validation features are shifted by the same mean.
pub fn split_validation(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train_idx, val_idx) = validation_indices(ds, fraction, seed)?;
    let train_raw = ds.features.select_rows(&train_idx);
    let (train_features, delta) = center_columns(&train_raw)?;
    let val_features = ds.features.select_rows(&val_idx).sub_row_vector(&delta)?;
    let mean: Vec<f64> = ds.feature_mean.iter().zip(&delta).map(|(a, b)| a + b).collect();

    let pick = |idx: &[usize], features: Matrix| Dataset {
        features,
        attributes: ds.attributes.select_rows(idx),
        labels: idx.iter().map(|&i| ds.labels[i]).collect(),
        attribute_level: ds.attribute_level,
        feature_mean: mean.clone(),
        class_ids: ds.class_ids.clone(),
    };
    Ok((pick(&train_idx, train_features), pick(&val_idx, val_features)))
}

/// The row partition behind [`split_validation`], both sides sorted ascending.
pub fn validation_indices(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument("validation fraction must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for (c, mut rows) in ds.class_rows().into_iter().enumerate() {
        let n = rows.len();
        if n < 2 {
            return Err(Error::ClassTooSmall { class: c + 1, size: n });
        }
        rows.shuffle(&mut rng);
        let n_val = libm::ceil(fraction * n as f64) as usize;
        let n_val = n_val.clamp(1, n - 1);
        val.extend_from_slice(&rows[..n_val]);
        train.extend_from_slice(&rows[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Per-dimension affine normalisation of attributes, fitted on the seen side.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributeScaler {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl AttributeScaler {
    /// Z-scores each attribute dimension; constant dimensions keep scale 1.
    pub fn fit(attributes: &Matrix) -> Self {
        let shift = attributes.column_means();
        let n = attributes.rows().max(1) as f64;
        let mut var = vec![0.0; attributes.cols()];
        for i in 0..attributes.rows() {
            for ((v, &a), &m) in var.iter_mut().zip(attributes.row(i)).zip(&shift) {
                *v += (a - m) * (a - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = libm::sqrt(v / n);
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { shift, scale }
    }

    pub fn apply(&self, attributes: &Matrix) -> Result<Matrix> {
        let mut out = attributes.sub_row_vector(&self.shift)?;
        for i in 0..out.rows() {
            for (v, &s) in out.row_mut(i).iter_mut().zip(&self.scale) {
                *v /= s;
            }
        }
        Ok(out)
    }
}

pub(crate) fn class_rows(labels: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        rows[l - 1].push(i);
    }
    rows
}

/// Maps arbitrary ids to `1..=C` in ascending id order.
fn relabel(labels: &[i64]) -> (Vec<usize>, Vec<i64>) {
    let mut ids: Vec<i64> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mapped = labels
        .iter()
        .map(|l| ids.binary_search(l).expect("id present") + 1)
        .collect();
    (mapped, ids)
}

fn check_rows(features: &Matrix, attributes: &Matrix, n_labels: usize) -> Result<()> {
    if features.rows() != attributes.rows() {
        return Err(Error::ShapeMismatch {
            expected: (features.rows(), attributes.cols()),
            found: attributes.shape(),
        });
    }
    if features.rows() != n_labels {
        return Err(Error::LengthMismatch {
            expected: features.rows(),
            found: n_labels,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix, Matrix, Vec<i64>) {
        let features = Matrix::from_rows(&[
            vec![1.0, 2.0],
            vec![3.0, 2.0],
            vec![5.0, 0.0],
            vec![7.0, 0.0],
            vec![9.0, 1.0],
            vec![11.0, 1.0],
        ])
        .unwrap();
        let attributes = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        (features, attributes, vec![10, 10, 20, 20, 30, 30])
    }

    #[test]
    fn toy_split_counts_and_centering() {
        let (f, a, l) = toy();
        let split = SplitSpec::new(vec![10, 30], vec![20], 0.5).unwrap();
        let (seen, unseen) = split_by_classes(&f, &a, &l, AttributeLevel::ClassLevel, &split).unwrap();
        assert_eq!(seen.len(), 4);
        assert_eq!(unseen.len(), 2);
        assert_eq!(seen.labels, vec![1, 1, 2, 2]);
        assert_eq!(seen.class_ids, vec![10, 30]);
        assert_eq!(unseen.labels, vec![1, 1]);
        // seen-only mean: rows 0,1,4,5
        assert_eq!(seen.feature_mean, vec![6.0, 1.5]);
        let tf = unseen.true_features.unwrap();
        assert_eq!(tf.row(0), &[-1.0, -1.5]);
    }

    #[test]
    fn overlapping_split_rejected() {
        assert_eq!(
            SplitSpec::new(vec![1, 2], vec![2], 0.5).unwrap_err(),
            Error::SplitOverlap(2)
        );
    }

    #[test]
    fn unknown_class_and_empty_side() {
        let (f, a, l) = toy();
        let split = SplitSpec::new(vec![10], vec![99], 0.5).unwrap();
        assert_eq!(
            split_by_classes(&f, &a, &l, AttributeLevel::ImageLevel, &split).unwrap_err(),
            Error::UnknownClass(99)
        );
    }

    #[test]
    fn zero_features_stay_zero() {
        let ds = Dataset::new(
            Matrix::zeros(4, 3),
            Matrix::identity(4),
            &[1, 1, 2, 2],
            AttributeLevel::ImageLevel,
        )
        .unwrap();
        assert_eq!(ds.features, Matrix::zeros(4, 3));
        assert_eq!(ds.feature_mean, vec![0.0; 3]);
    }

    #[test]
    fn class_level_invariant_enforced() {
        let a = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let err = Dataset::new(Matrix::zeros(2, 1), a, &[5, 5], AttributeLevel::ClassLevel).unwrap_err();
        assert_eq!(err, Error::InconsistentClassAttributes { class: 5 });
    }

    #[test]
    fn two_point_class_mean() {
        let ds = Dataset::new(
            Matrix::zeros(3, 1),
            Matrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0], vec![5.0, 5.0]]).unwrap(),
            &[1, 1, 2],
            AttributeLevel::ImageLevel,
        )
        .unwrap();
        let (means, ids) = class_mean_attributes(&ds);
        assert_eq!(means.row(0), &[1.0, 1.0]);
        assert_eq!(means.row(1), &[5.0, 5.0]);
        assert_eq!(ids, vec![1, 2]);
    }

    fn sized(sizes: &[usize]) -> Dataset {
        let labels: Vec<i64> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| core::iter::repeat_n(c as i64 + 1, n))
            .collect();
        let n = labels.len();
        Dataset::new(
            Matrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64),
            Matrix::from_fn(n, 1, |i, _| i as f64),
            &labels,
            AttributeLevel::ImageLevel,
        )
        .unwrap()
    }

    fn val_sizes(val: &Dataset, c: usize) -> Vec<usize> {
        (1..=c).map(|k| val.labels.iter().filter(|&&l| l == k).count()).collect()
    }

    #[test]
    fn validation_sizes_follow_ceiling() {
        let (_, val) = split_validation(&sized(&[4, 4]), 0.5, 7).unwrap();
        assert_eq!(val_sizes(&val, 2), vec![2, 2]);
        let (train, val) = split_validation(&sized(&[3, 5]), 0.5, 7).unwrap();
        assert_eq!(val_sizes(&val, 2), vec![2, 3]);
        assert_eq!(train.len(), 3);
    }

    #[test]
    fn validation_is_deterministic_and_disjoint() {
        let ds = sized(&[6, 7, 5]);
        let a = validation_indices(&ds, 0.5, 42).unwrap();
        let b = validation_indices(&ds, 0.5, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.0.iter().all(|i| !a.1.contains(i)));
        assert_eq!(a.0.len() + a.1.len(), ds.len());
        assert_eq!(
            split_validation(&sized(&[1, 3]), 0.5, 0).unwrap_err(),
            Error::ClassTooSmall { class: 1, size: 1 }
        );
    }

    #[test]
    fn validation_train_side_is_centered() {
        let ds = sized(&[6, 6]);
        let (train, val) = split_validation(&ds, 0.5, 3).unwrap();
        assert!(train.features.column_means().iter().all(|m| m.abs() < 1e-12));
        assert_eq!(train.feature_mean, val.feature_mean);
    }
}
