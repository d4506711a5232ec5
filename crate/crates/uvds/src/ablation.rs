//! Component ablation: ridge regression, graph term only, diffusion term
//! only and the full model, each evaluated with CA / MF prototypes and
//! per-sample synthesis under NN and SVM.

use serde::Serialize;
use uvds_core::baseline::{linear_regression, DEFAULT_RIDGE};
use uvds_core::dataset::split_validation;
use uvds_core::graph::build_graphset;
use uvds_core::metrics::{accuracy, profile_pi, variance_profile};
use uvds_core::solver::fit;
use uvds_core::zsl::{
    nn_classify, prototype_modes, svm_predict, svm_train, PrototypeMode, SynthesizedSet, SVM_ITERS,
    SVM_REG_C,
};
use uvds_core::{AttributeLevel, Dataset, Matrix, ModelParams, SolverConfig, UnseenSet};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    LinearRegression,
    GrOnly,
    DrOnly,
    Full,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::LinearRegression, Method::GrOnly, Method::DrOnly, Method::Full];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scenario {
    CA,
    MF,
    Sample,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::CA, Scenario::MF, Scenario::Sample];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classifier {
    Nn,
    Svm,
}

impl Classifier {
    pub const ALL: [Classifier; 2] = [Classifier::Nn, Classifier::Svm];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationCell {
    pub method: Method,
    pub scenario: Scenario,
    pub classifier: Classifier,
    /// Accuracy on the held-out half of the seen classes.
    pub seen_accuracy: f64,
    pub unseen_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodStats {
    pub method: Method,
    /// `Π` of the max-normalised variance profile of the synthesised unseen samples.
    pub pi: f64,
    /// `Π` of the raw synthesised unseen samples.
    pub pi_raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationReport {
    pub cells: Vec<AblationCell>,
    pub stats: Vec<MethodStats>,
}

impl AblationReport {
    pub fn cell(&self, method: Method, scenario: Scenario, classifier: Classifier) -> Option<&AblationCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.scenario == scenario && c.classifier == classifier)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationOptions {
    pub ridge: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for AblationOptions {
    fn default() -> Self {
        Self {
            ridge: DEFAULT_RIDGE,
            validation_fraction: 0.5,
            seed: 0,
        }
    }
}

pub fn method_config(method: Method, cfg: &SolverConfig) -> SolverConfig {
    match method {
        Method::GrOnly => SolverConfig {
            beta: 0.0,
            ..cfg.clone()
        },
        Method::DrOnly => SolverConfig {
            lambda: 0.0,
            ..cfg.clone()
        },
        _ => cfg.clone(),
    }
}

/// Trains one method on `ds`.
pub fn train_method(method: Method, ds: &Dataset, cfg: &SolverConfig, ridge: f64) -> Result<ModelParams> {
    if method == Method::LinearRegression {
        return Ok(linear_regression(ds, ridge)?);
    }
    let gs = build_graphset(ds, cfg.k)?;
    Ok(fit(ds, &gs, &method_config(method, cfg))?.params)
}

/// Test-side data for one evaluation: attributes to synthesise from, the real
/// features to classify and their labels in `1..=n_classes`.
pub struct EvalSet<'a> {
    pub attributes: &'a Matrix,
    pub features: &'a Matrix,
    pub labels: &'a [usize],
    pub n_classes: usize,
    pub level: AttributeLevel,
}

/// Synthesised anchors for one scenario.
pub fn anchors(set: &EvalSet<'_>, params: &ModelParams, scenario: Scenario) -> Result<SynthesizedSet> {
    Ok(match scenario {
        Scenario::CA | Scenario::MF => {
            let mode = if scenario == Scenario::CA {
                PrototypeMode::CA
            } else {
                PrototypeMode::MF
            };
            prototype_modes(set.attributes, set.labels, set.n_classes, set.level, params, mode)?
        }
        Scenario::Sample => SynthesizedSet::samples(set.attributes, set.labels, params)?,
    })
}

/// Predicted labels for the real features of `set`.
pub fn predict(anchors: &SynthesizedSet, features: &Matrix, classifier: Classifier, seed: u64) -> Result<Vec<usize>> {
    Ok(match classifier {
        Classifier::Nn => nn_classify(features, anchors)?,
        Classifier::Svm => {
            let model = svm_train(&anchors.features, &anchors.labels, SVM_REG_C, SVM_ITERS, seed)?;
            svm_predict(&model, features)?
        }
    })
}

pub fn evaluate(set: &EvalSet<'_>, params: &ModelParams, scenario: Scenario, classifier: Classifier, seed: u64) -> Result<f64> {
    let a = anchors(set, params, scenario)?;
    let pred = predict(&a, set.features, classifier, seed)?;
    Ok(accuracy(&pred, set.labels)?.overall)
}

pub fn run_ablation(ds: &Dataset, unseen: &UnseenSet, cfg: &SolverConfig, opts: &AblationOptions) -> Result<AblationReport> {
    let test_features = unseen
        .true_features
        .as_ref()
        .ok_or_else(|| Error::Invalid("unseen set has no features to evaluate".into()))?;
    let (train, val) = split_validation(ds, opts.validation_fraction, opts.seed)?;
    let seen_set = EvalSet {
        attributes: &val.attributes,
        features: &val.features,
        labels: &val.labels,
        n_classes: val.n_classes(),
        level: val.attribute_level,
    };
    let unseen_set = EvalSet {
        attributes: &unseen.attributes,
        features: test_features,
        labels: &unseen.labels,
        n_classes: unseen.n_classes(),
        level: ds.attribute_level,
    };

    let mut cells = Vec::new();
    let mut stats = Vec::new();
    for method in Method::ALL {
        let seen_params = train_method(method, &train, cfg, opts.ridge)?;
        let params = train_method(method, ds, cfg, opts.ridge)?;
        for scenario in Scenario::ALL {
            for classifier in Classifier::ALL {
                cells.push(AblationCell {
                    method,
                    scenario,
                    classifier,
                    seen_accuracy: evaluate(&seen_set, &seen_params, scenario, classifier, opts.seed)?,
                    unseen_accuracy: evaluate(&unseen_set, &params, scenario, classifier, opts.seed)?,
                });
            }
        }
        let samples = anchors(&unseen_set, &params, Scenario::Sample)?.features;
        stats.push(MethodStats {
            method,
            pi: profile_pi(&variance_profile(&samples)?),
            pi_raw: uvds_core::metrics::pi_variance(&samples)?,
        });
    }
    Ok(AblationReport { cells, stats })
}
