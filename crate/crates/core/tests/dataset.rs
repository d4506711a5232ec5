//! Seen/unseen splits, class means and validation hold-outs.

mod common;

use common::*;
use uvds_core::dataset::{class_mean_attributes, split_by_classes, split_validation, validation_indices};
use uvds_core::{AttributeLevel, Dataset, Error, Matrix, SplitSpec};

fn toy() -> (Matrix, Matrix, Vec<i64>) {
    let features = Matrix::from_fn(6, 2, |i, j| (i * 2 + j) as f64);
    let attributes = Matrix::from_fn(6, 2, |i, _| (i / 2) as f64);
    (features, attributes, vec![4, 4, 7, 7, 9, 9])
}

fn sized(sizes: &[usize]) -> Dataset {
    let labels: Vec<i64> = sizes.iter().enumerate().flat_map(|(c, &n)| vec![c as i64 + 1; n]).collect();
    let n = labels.len();
    let mut r = rng(n as u64);
    Dataset::new(random(n, 2, &mut r), random(n, 2, &mut r), &labels, AttributeLevel::ImageLevel).unwrap()
}

#[test]
fn toy_split_counts_rows() {
    let (f, a, l) = toy();
    let spec = SplitSpec::new(vec![4, 9], vec![7], 0.5).unwrap();
    let (ds, unseen) = split_by_classes(&f, &a, &l, AttributeLevel::ClassLevel, &spec).unwrap();
    assert_eq!(ds.len(), 4);
    assert_eq!(unseen.len(), 2);
    assert_eq!(ds.labels, vec![1, 1, 2, 2]);
    assert_eq!(ds.class_ids, vec![4, 9]);
    assert_eq!(unseen.class_ids, vec![7]);

    // seen mean only, applied to the unseen rows
    let seen_mean = [(0.0 + 2.0 + 8.0 + 10.0) / 4.0, (1.0 + 3.0 + 9.0 + 11.0) / 4.0];
    assert_eq!(ds.feature_mean, seen_mean.to_vec());
    let tf = unseen.true_features.unwrap();
    assert_eq!(tf.row(0), &[4.0 - seen_mean[0], 5.0 - seen_mean[1]]);
}

#[test]
fn overlapping_or_unknown_classes_rejected() {
    assert!(matches!(SplitSpec::new(vec![4, 7], vec![7], 0.5), Err(Error::SplitOverlap(7))));
    let (f, a, l) = toy();
    let spec = SplitSpec::new(vec![4], vec![5], 0.5).unwrap();
    assert_eq!(
        split_by_classes(&f, &a, &l, AttributeLevel::ImageLevel, &spec).unwrap_err(),
        Error::UnknownClass(5)
    );
}

#[test]
fn zero_features_stay_zero() {
    let ds = Dataset::new(Matrix::zeros(4, 3), Matrix::zeros(4, 1), &[1, 1, 2, 2], AttributeLevel::ImageLevel).unwrap();
    assert_eq!(ds.features, Matrix::zeros(4, 3));
    assert_eq!(ds.feature_mean, vec![0.0; 3]);
}

#[test]
fn class_level_rows_must_match() {
    let (f, mut a, l) = toy();
    assert!(Dataset::new(f.clone(), a.clone(), &l, AttributeLevel::ClassLevel).is_ok());
    a[(1, 0)] += 1.0;
    assert!(matches!(
        Dataset::new(f, a, &l, AttributeLevel::ClassLevel),
        Err(Error::InconsistentClassAttributes { class: 4 })
    ));
}

#[test]
fn class_mean_cases() {
    let (f, a, l) = toy();
    let ds = Dataset::new(f, a.clone(), &l, AttributeLevel::ClassLevel).unwrap();
    let (means, ids) = class_mean_attributes(&ds);
    assert_eq!(ids, vec![1, 2, 3]);
    for c in 0..3 {
        assert_eq!(means.row(c), a.row(2 * c));
    }

    let two = Matrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
    let ds = Dataset::new(Matrix::zeros(2, 1), two, &[1, 1], AttributeLevel::ImageLevel).unwrap();
    assert_eq!(class_mean_attributes(&ds).0.row(0), &[1.0, 1.0]);

    let mut r = rng(3);
    let labels: Vec<i64> = vec![1, 2, 3, 1, 2, 3, 1, 1, 2, 3];
    let attrs = random(10, 4, &mut r);
    let ds = Dataset::new(random(10, 2, &mut r), attrs.clone(), &labels, AttributeLevel::ImageLevel).unwrap();
    let (means, _) = class_mean_attributes(&ds);
    for c in 1..=3i64 {
        let rows: Vec<usize> = (0..10).filter(|&i| labels[i] == c).collect();
        for j in 0..4 {
            let s: f64 = rows.iter().map(|&i| attrs[(i, j)]).sum::<f64>() / rows.len() as f64;
            assert!((means[((c - 1) as usize, j)] - s).abs() <= 1e-12);
        }
    }
}

fn val_sizes(ds: &Dataset, fraction: f64) -> Vec<usize> {
    let (_, val) = split_validation(ds, fraction, 0).unwrap();
    (1..=ds.n_classes()).map(|c| val.labels.iter().filter(|&&l| l == c).count()).collect()
}

#[test]
fn validation_sizes_follow_ceiling() {
    assert_eq!(val_sizes(&sized(&[4, 4]), 0.5), vec![2, 2]);
    // ⌈1.5⌉ = 2 and ⌈2.5⌉ = 3
    assert_eq!(val_sizes(&sized(&[3, 5]), 0.5), vec![2, 3]);
}

#[test]
fn validation_is_deterministic_and_disjoint() {
    let ds = sized(&[6, 5, 7]);
    let a = validation_indices(&ds, 0.5, 42).unwrap();
    assert_eq!(a, validation_indices(&ds, 0.5, 42).unwrap());
    let (train, val) = a;
    assert!(train.iter().all(|i| !val.contains(i)));
    assert_eq!(train.len() + val.len(), ds.len());
    let (t, v) = split_validation(&ds, 0.5, 42).unwrap();
    for j in 0..2 {
        let s: f64 = (0..t.len()).map(|i| t.features[(i, j)]).sum();
        assert!(s.abs() <= 1e-9);
    }
    assert_eq!(t.feature_mean, v.feature_mean);
}

#[test]
fn validation_class_too_small() {
    let ds = sized(&[3, 1]);
    assert!(matches!(split_validation(&ds, 0.5, 0), Err(Error::ClassTooSmall { class: 2, size: 1 })));
}
