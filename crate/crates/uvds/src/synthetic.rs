//! Synthetic zero-shot corpus: class attribute signatures mapped linearly to
//! features.
//!
//! Every class gets a Gaussian signature; each image carries its class
//! signature plus small Gaussian jitter, and the last attribute is a constant
//! 1 so the linear map can absorb the feature mean. Features are
//! `attributes · G + noise`. The columns of `G` are rescaled so that the
//! first `max(1, round(0.1·D))` feature dimensions have standard deviation
//! `dominant_scale` over the corpus and the rest have 1.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use uvds_core::metrics::top_decile_count;
use uvds_core::Matrix;

use crate::error::{Error, Result};
use crate::io::{Level, Meta, RawData};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub n_seen_classes: usize,
    pub n_unseen_classes: usize,
    pub per_class: usize,
    pub d: usize,
    pub m: usize,
    pub noise_sigma: f64,
    pub attribute_jitter: f64,
    pub dominant_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_seen_classes: 20,
            n_unseen_classes: 5,
            per_class: 20,
            d: 64,
            m: 16,
            noise_sigma: 0.01,
            attribute_jitter: 0.1,
            dominant_scale: 5.0,
            seed: 0,
        }
    }
}

/// The ground-truth map alongside the generated corpus.
#[derive(Clone, Debug)]
pub struct Synthetic {
    pub data: RawData,
    pub map: Matrix,
}

pub fn gen_synthetic(cfg: &SyntheticConfig) -> Result<Synthetic> {
    if cfg.m < 2 || cfg.d < cfg.m {
        return Err(Error::Invalid("need D >= M >= 2".into()));
    }
    if cfg.per_class < 2 || cfg.n_seen_classes == 0 || cfg.n_unseen_classes == 0 {
        return Err(Error::Invalid("need per_class >= 2 and both class sets non-empty".into()));
    }
    if !(cfg.noise_sigma >= 0.0 && cfg.attribute_jitter >= 0.0 && cfg.dominant_scale > 0.0) {
        return Err(Error::Invalid("scales must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

    let n_classes = cfg.n_seen_classes + cfg.n_unseen_classes;
    let (d, m) = (cfg.d, cfg.m);
    let mut g = Matrix::from_fn(m, d, |_, _| normal());
    let signatures = Matrix::from_fn(n_classes, m, |_, _| normal());
    let n = n_classes * cfg.per_class;
    let labels: Vec<i64> = (0..n).map(|i| (i / cfg.per_class) as i64 + 1).collect();
    let attributes = Matrix::from_fn(n, m, |i, j| {
        let jitter = cfg.attribute_jitter * normal();
        if j == m - 1 {
            1.0
        } else {
            signatures[(i / cfg.per_class, j)] + jitter
        }
    });

    // rescale G so each clean feature column has the target spread
    let clean = attributes.matmul(&g)?;
    let means = clean.column_means();
    let n_top = top_decile_count(d);
    for j in 0..d {
        let var = (0..n).map(|i| (clean[(i, j)] - means[j]).powi(2)).sum::<f64>() / n as f64;
        let target = if j < n_top { cfg.dominant_scale } else { 1.0 };
        if var > 0.0 {
            let s = target / var.sqrt();
            for r in 0..m {
                g[(r, j)] *= s;
            }
        }
    }
    let mut features = attributes.matmul(&g)?;
    if cfg.noise_sigma > 0.0 {
        for i in 0..n {
            for v in features.row_mut(i) {
                *v += cfg.noise_sigma * normal();
            }
        }
    }
    let seen_classes = (1..=cfg.n_seen_classes as i64).collect();
    let unseen_classes = (cfg.n_seen_classes as i64 + 1..=n_classes as i64).collect();
    Ok(Synthetic {
        data: RawData {
            features,
            attributes,
            labels,
            meta: Meta {
                attribute_level: Level::Image,
                seen_classes,
                unseen_classes,
            },
        },
        map: g,
    })
}
