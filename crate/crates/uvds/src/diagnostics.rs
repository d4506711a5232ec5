//! Per-dimension variance profiles of real and synthesised features.

use std::fmt::Write as _;

use serde::Serialize;
use uvds_core::metrics::{profile_pi, top_decile_share, variance_profile};
use uvds_core::Matrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceProfiles {
    pub real: Vec<f64>,
    pub with_dr: Vec<f64>,
    pub without_dr: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceDiagnostic {
    pub profiles: VarianceProfiles,
    /// `Π` of each normalised profile.
    pub pi_real: f64,
    pub pi_with_dr: f64,
    pub pi_without_dr: f64,
    /// Share of the profile total in the top 10% of dimensions.
    pub top_share_real: f64,
    pub top_share_with_dr: f64,
    pub top_share_without_dr: f64,
}

/// Normalised, descending variance profiles of the three sources.
pub fn variance_diagnostic(real: &Matrix, with_dr: &Matrix, without_dr: &Matrix) -> Result<VarianceDiagnostic> {
    let d = real.cols();
    if with_dr.cols() != d || without_dr.cols() != d {
        return Err(Error::Core(uvds_core::Error::ShapeMismatch {
            expected: (with_dr.rows(), d),
            found: if with_dr.cols() != d { with_dr.shape() } else { without_dr.shape() },
        }));
    }
    let profiles = VarianceProfiles {
        real: variance_profile(real)?,
        with_dr: variance_profile(with_dr)?,
        without_dr: variance_profile(without_dr)?,
    };
    Ok(VarianceDiagnostic {
        pi_real: profile_pi(&profiles.real),
        pi_with_dr: profile_pi(&profiles.with_dr),
        pi_without_dr: profile_pi(&profiles.without_dr),
        top_share_real: top_decile_share(&profiles.real),
        top_share_with_dr: top_decile_share(&profiles.with_dr),
        top_share_without_dr: top_decile_share(&profiles.without_dr),
        profiles,
    })
}

impl VarianceDiagnostic {
    /// `dim,real,with_dr,without_dr` with 1-based dimension index.
    pub fn to_csv(&self) -> String {
        let p = &self.profiles;
        let mut out = String::from("dim,real,with_dr,without_dr\n");
        for i in 0..p.real.len() {
            writeln!(out, "{},{},{},{}", i + 1, p.real[i], p.with_dr[i], p.without_dr[i]).unwrap();
        }
        out
    }
}
