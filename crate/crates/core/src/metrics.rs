//! Recognition accuracy and per-dimension variance profiles.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::linalg::{center_columns, Matrix};
use crate::solver::DiffusionStats;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Accuracy {
    /// `correct / total`.
    pub overall: f64,
    /// Accuracy per class present in the ground truth.
    pub per_class: BTreeMap<usize, f64>,
    /// Unweighted mean of `per_class`.
    pub mean_class: f64,
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<Accuracy> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty prediction set"));
    }
    let mut counts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for (&p, &t) in pred.iter().zip(truth) {
        let e = counts.entry(t).or_insert((0, 0));
        e.1 += 1;
        if p == t {
            e.0 += 1;
            correct += 1;
        }
    }
    let per_class: BTreeMap<usize, f64> = counts
        .into_iter()
        .map(|(c, (ok, n))| (c, ok as f64 / n as f64))
        .collect();
    let mean_class = per_class.values().sum::<f64>() / per_class.len() as f64;
    Ok(Accuracy {
        overall: correct as f64 / truth.len() as f64,
        per_class,
        mean_class,
    })
}

/// Per-dimension variances about the column mean, divided by the largest and
/// sorted descending. A matrix without variance gives all zeros.
pub fn variance_profile(m: &Matrix) -> Result<Vec<f64>> {
    let (centred, _) = center_columns(m)?;
    let n = m.rows() as f64;
    let mut var: Vec<f64> = centred.column_sq_norms().into_iter().map(|s| s / n).collect();
    var.sort_by(|a, b| b.total_cmp(a));
    let max = var.first().copied().unwrap_or(0.0);
    if max > 0.0 {
        var.iter_mut().for_each(|v| *v /= max);
    } else {
        var.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(var)
}

/// Number of leading dimensions counted as the "top 10%":
/// `max(1, round(0.1·D))`.
pub fn top_decile_count(d: usize) -> usize {
    (libm::round(d as f64 * 0.1) as usize).max(1)
}

/// Share of the total held by the first `top_decile_count` entries of a
/// descending profile.
pub fn top_decile_share(profile: &[f64]) -> f64 {
    let total: f64 = profile.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    profile.iter().take(top_decile_count(profile.len())).sum::<f64>() / total
}

/// `Π` of a variance profile: the variance of the square roots of its
/// entries. Scale-free when the profile is normalised.
pub fn profile_pi(profile: &[f64]) -> f64 {
    if profile.is_empty() {
        return 0.0;
    }
    let d = profile.len() as f64;
    let pi: Vec<f64> = profile.iter().map(|&v| libm::sqrt(v.max(0.0))).collect();
    let mean = pi.iter().sum::<f64>() / d;
    pi.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / d
}

/// `Π` of `m` after centring its columns.
pub fn pi_variance(m: &Matrix) -> Result<f64> {
    Ok(DiffusionStats::of(&center_columns(m)?.0).pi_variance)
}
