//! Grid search over (λ, β) by repeated stratified hold-out on the seen classes.

use serde::Serialize;
use uvds_core::dataset::{class_mean_attributes, split_validation};
use uvds_core::graph::build_graphset;
use uvds_core::metrics::accuracy;
use uvds_core::solver::{fit_with_left, LeftOperator};
use uvds_core::zsl::{nn_classify, synthesize, SynthMode, SynthesizedSet};
use uvds_core::{Dataset, Error as CoreError, SolverConfig};

use crate::error::{Error, Result};

pub const DEFAULT_GRID: [f64; 7] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub lambda_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub validation_fraction: f64,
    /// Independent hold-out draws averaged per grid point.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lambda_values: DEFAULT_GRID.to_vec(),
            beta_values: DEFAULT_GRID.to_vec(),
            validation_fraction: 0.5,
            repeats: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvCell {
    pub lambda: f64,
    pub beta: f64,
    /// Mean held-out NN accuracy; a failed fit counts as 0.
    pub score: f64,
    pub failed_fits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvResult {
    pub best_lambda: f64,
    pub best_beta: f64,
    pub best_score: f64,
    /// Cells in grid order: λ outer, β inner.
    pub table: Vec<CvCell>,
}

/// Seed of hold-out draw `r`.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(r as u64)
}

/// NN accuracy on `val` of seen-class prototypes synthesised from the class
/// mean attributes of `train`.
fn holdout_score(train: &Dataset, val: &Dataset, cfg: &SolverConfig, left: &LeftOperator, gs: &uvds_core::GraphSet) -> uvds_core::Result<f64> {
    let fit = fit_with_left(train, gs, cfg, left)?;
    let (attrs, labels) = class_mean_attributes(train);
    let protos = SynthesizedSet::new(synthesize(&attrs, &fit.params)?, labels, SynthMode::Prototype)?;
    let pred = nn_classify(&val.features, &protos)?;
    Ok(accuracy(&pred, &val.labels)?.overall)
}

/// Scores every grid point and returns the best, preferring smaller λ and
/// then smaller β on ties. Only `ds` (the seen side) is consulted.
pub fn cross_validate(ds: &Dataset, grid: &GridSpec, template: &SolverConfig) -> Result<CvResult> {
    if grid.lambda_values.is_empty() || grid.beta_values.is_empty() || grid.repeats == 0 {
        return Err(Error::Invalid("grid needs at least one λ, one β and one repeat".into()));
    }
    template.validate()?;
    let n_beta = grid.beta_values.len();
    let mut sums = vec![0.0; grid.lambda_values.len() * n_beta];
    let mut failures = vec![0usize; sums.len()];

    for r in 0..grid.repeats {
        let (train, val) = split_validation(ds, grid.validation_fraction, repeat_seed(grid.seed, r))?;
        let gs = build_graphset(&train, template.k)?;
        for (li, &lambda) in grid.lambda_values.iter().enumerate() {
            let left = LeftOperator::new(&gs.laplacian, lambda, template.gamma)?;
            for (bi, &beta) in grid.beta_values.iter().enumerate() {
                let cfg = SolverConfig {
                    lambda,
                    beta,
                    ..template.clone()
                };
                match holdout_score(&train, &val, &cfg, &left, &gs) {
                    Ok(s) => sums[li * n_beta + bi] += s,
                    Err(e) if e.is_numerical() || e == CoreError::NonFinite => {
                        failures[li * n_beta + bi] += 1
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }

    let mut table = Vec::with_capacity(sums.len());
    for (li, &lambda) in grid.lambda_values.iter().enumerate() {
        for (bi, &beta) in grid.beta_values.iter().enumerate() {
            let idx = li * n_beta + bi;
            table.push(CvCell {
                lambda,
                beta,
                score: sums[idx] / grid.repeats as f64,
                failed_fits: failures[idx],
            });
        }
    }
    let best = table
        .iter()
        .reduce(|best, c| {
            let better = c.score > best.score
                || (c.score == best.score
                    && (c.lambda < best.lambda || (c.lambda == best.lambda && c.beta < best.beta)));
            if better {
                c
            } else {
                best
            }
        })
        .expect("non-empty grid");
    Ok(CvResult {
        best_lambda: best.lambda,
        best_beta: best.beta,
        best_score: best.score,
        table,
    })
}
