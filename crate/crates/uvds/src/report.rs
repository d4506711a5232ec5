//! Training and evaluation pipelines shared by the CLI and tests, and the
//! JSON evaluation report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use uvds_core::dataset::AttributeScaler;
use uvds_core::graph::build_graphset;
use uvds_core::metrics::accuracy;
use uvds_core::solver::fit;
use uvds_core::zsl::synthesize;
use uvds_core::{Dataset, FitResult, GraphSet, SolverConfig, UnseenSet};

use crate::ablation::{anchors, predict, Classifier, EvalSet, Scenario};
use crate::diagnostics::{variance_diagnostic, VarianceDiagnostic, VarianceProfiles};
use crate::error::{Error, Result};
use crate::model_file::Model;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub k: usize,
    pub outer_iters: usize,
    pub q_max_iters: usize,
    pub q_tol: f64,
    pub tau_init: f64,
    pub eps_pi: f64,
    pub refresh_weights_per_inner: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifier: Option<Classifier>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Scenario>,
}

impl ConfigEcho {
    pub fn new(c: &SolverConfig) -> Self {
        Self {
            lambda: c.lambda,
            beta: c.beta,
            gamma: c.gamma,
            alpha: c.alpha,
            k: c.k,
            outer_iters: c.outer_iters,
            q_max_iters: c.q_max_iters,
            q_tol: c.q_tol,
            tau_init: c.tau_init,
            eps_pi: c.eps_pi,
            refresh_weights_per_inner: c.refresh_weights_per_inner,
            seed: c.seed,
            classifier: None,
            mode: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub overall_accuracy: f64,
    /// Keyed by original class id.
    pub per_class_accuracy: BTreeMap<i64, f64>,
    pub mean_class_accuracy: f64,
    pub loss_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_profile: Option<VarianceProfiles>,
    pub config: ConfigEcho,
}

/// One classified test row, labels as original class ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub row_index: usize,
    pub predicted_label: i64,
    pub true_label: i64,
}

pub fn predictions_csv(preds: &[Prediction]) -> String {
    let mut out = String::from("row_index,predicted_label,true_label\n");
    for p in preds {
        writeln!(out, "{},{},{}", p.row_index, p.predicted_label, p.true_label).unwrap();
    }
    out
}

/// A fitted model together with the training artefacts.
pub struct Trained {
    pub model: Model,
    pub graphs: GraphSet,
    pub fit: FitResult,
}

/// Optionally normalises attributes with statistics of the seen side.
pub fn prepare(ds: &Dataset, unseen: &UnseenSet, normalize_attributes: bool) -> Result<(Dataset, UnseenSet, Option<AttributeScaler>)> {
    if !normalize_attributes {
        return Ok((ds.clone(), unseen.clone(), None));
    }
    let scaler = AttributeScaler::fit(&ds.attributes);
    let mut ds = ds.clone();
    let mut unseen = unseen.clone();
    ds.attributes = scaler.apply(&ds.attributes)?;
    unseen.attributes = scaler.apply(&unseen.attributes)?;
    Ok((ds, unseen, Some(scaler)))
}

/// Fits on `ds`, whose attributes are already normalised by `scaler` if any.
pub fn train(ds: &Dataset, cfg: &SolverConfig, scaler: Option<AttributeScaler>) -> Result<Trained> {
    let graphs = build_graphset(ds, cfg.k)?;
    let fit = fit(ds, &graphs, cfg)?;
    let model = Model {
        n_train: ds.len(),
        config: cfg.clone(),
        p: fit.params.p.clone(),
        q: fit.params.q.clone(),
        feature_mean: ds.feature_mean.clone(),
        scaler,
        loss_trace: fit.loss_trace.clone(),
    };
    Ok(Trained { model, graphs, fit })
}

/// Classifies the unseen features with anchors synthesised by `model`.
/// `unseen` must carry raw attributes; the model's scaler is applied here.
pub fn evaluate_model(
    model: &Model,
    unseen: &UnseenSet,
    level: uvds_core::AttributeLevel,
    classifier: Classifier,
    scenario: Scenario,
) -> Result<(EvaluationReport, Vec<Prediction>)> {
    let features = unseen
        .true_features
        .as_ref()
        .ok_or_else(|| Error::Invalid("no unseen features to evaluate".into()))?;
    let attributes = model.prepare_attributes(&unseen.attributes)?;
    let set = EvalSet {
        attributes: &attributes,
        features,
        labels: &unseen.labels,
        n_classes: unseen.n_classes(),
        level,
    };
    let params = model.params();
    let a = anchors(&set, &params, scenario)?;
    let pred = predict(&a, features, classifier, model.config.seed)?;
    let acc = accuracy(&pred, &unseen.labels)?;
    let id = |l: usize| unseen.class_ids[l - 1];
    let preds = pred
        .iter()
        .zip(&unseen.labels)
        .enumerate()
        .map(|(i, (&p, &t))| Prediction {
            row_index: i,
            predicted_label: id(p),
            true_label: id(t),
        })
        .collect();
    let mut config = ConfigEcho::new(&model.config);
    config.classifier = Some(classifier);
    config.mode = Some(scenario);
    let report = EvaluationReport {
        overall_accuracy: acc.overall,
        per_class_accuracy: acc.per_class.iter().map(|(&c, &v)| (id(c), v)).collect(),
        mean_class_accuracy: acc.mean_class,
        loss_trace: model.loss_trace.clone(),
        variance_profile: None,
        config,
    };
    Ok((report, preds))
}

/// Variance profiles of the real unseen features and of samples synthesised
/// with `cfg` and with the same config at `β = 0`.
pub fn diag_variance(ds: &Dataset, unseen: &UnseenSet, cfg: &SolverConfig) -> Result<VarianceDiagnostic> {
    let real = unseen
        .true_features
        .as_ref()
        .ok_or_else(|| Error::Invalid("no unseen features for the diagnostic".into()))?;
    let with_dr = train(ds, cfg, None)?;
    let without_cfg = SolverConfig {
        beta: 0.0,
        ..cfg.clone()
    };
    let without_dr = train(ds, &without_cfg, None)?;
    variance_diagnostic(
        real,
        &synthesize(&unseen.attributes, &with_dr.fit.params)?,
        &synthesize(&unseen.attributes, &without_dr.fit.params)?,
    )
}
