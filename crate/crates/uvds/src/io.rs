//! Dataset directories: `features.csv`, `attributes.csv`, `labels.csv` and
//! `meta.json`. CSV files have no header, `.` as decimal point and `\n` line
//! endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use uvds_core::dataset::split_by_classes;
use uvds_core::{AttributeLevel, Dataset, Matrix, SplitSpec, UnseenSet};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Class,
    Image,
}

impl From<Level> for AttributeLevel {
    fn from(l: Level) -> Self {
        match l {
            Level::Class => AttributeLevel::ClassLevel,
            Level::Image => AttributeLevel::ImageLevel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub attribute_level: Level,
    pub seen_classes: Vec<i64>,
    pub unseen_classes: Vec<i64>,
}

impl Meta {
    pub fn split(&self, validation_fraction: f64) -> Result<SplitSpec> {
        Ok(SplitSpec::new(
            self.seen_classes.clone(),
            self.unseen_classes.clone(),
            validation_fraction,
        )?)
    }
}

/// The full labelled corpus as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct RawData {
    pub features: Matrix,
    pub attributes: Matrix,
    pub labels: Vec<i64>,
    pub meta: Meta,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, s: &str) -> Result<()> {
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<Matrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("not a number: {field:?}"),
            })?;
            data.push(v);
        }
        let n = data.len() - before;
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: format!("expected {c} fields, found {n}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: "empty matrix".into(),
    })?;
    Ok(Matrix::new(rows, cols, data)?)
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    parse_matrix(&read_to_string(path)?, path)
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn format_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    write_string(path, &format_matrix(m))
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    let text = read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("not an integer label: {l:?}"),
            })
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &[i64]) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        writeln!(out, "{l}").expect("write to string");
    }
    write_string(path, &out)
}

pub fn read_meta(dir: &Path) -> Result<Meta> {
    let path = dir.join("meta.json");
    Ok(serde_json::from_str(&read_to_string(&path)?)?)
}

pub fn read_raw(dir: &Path) -> Result<RawData> {
    Ok(RawData {
        features: read_matrix(&dir.join("features.csv"))?,
        attributes: read_matrix(&dir.join("attributes.csv"))?,
        labels: read_labels(&dir.join("labels.csv"))?,
        meta: read_meta(dir)?,
    })
}

pub fn write_dataset(dir: &Path, raw: &RawData) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix(&dir.join("features.csv"), &raw.features)?;
    write_matrix(&dir.join("attributes.csv"), &raw.attributes)?;
    write_labels(&dir.join("labels.csv"), &raw.labels)?;
    let mut meta = serde_json::to_string_pretty(&raw.meta)?;
    meta.push('\n');
    write_string(&dir.join("meta.json"), &meta)
}

impl RawData {
    pub fn split(&self, split: &SplitSpec) -> Result<(Dataset, UnseenSet)> {
        Ok(split_by_classes(
            &self.features,
            &self.attributes,
            &self.labels,
            self.meta.attribute_level.into(),
            split,
        )?)
    }
}

/// Reads a dataset directory and splits it into seen training data and the
/// unseen test set. The attribute level comes from `meta.json`.
pub fn load_dataset(dir: &Path, split: &SplitSpec) -> Result<(Dataset, UnseenSet)> {
    read_raw(dir)?.split(split)
}

/// [`load_dataset`] with the split stored in `meta.json`.
pub fn load_dataset_dir(dir: &Path, validation_fraction: f64) -> Result<(RawData, Dataset, UnseenSet)> {
    let raw = read_raw(dir)?;
    let split = raw.meta.split(validation_fraction)?;
    let (seen, unseen) = raw.split(&split)?;
    Ok((raw, seen, unseen))
}
