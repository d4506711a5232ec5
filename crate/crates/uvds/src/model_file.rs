//! Flat text model format.
//!
//! ```text
//! uvds-model 1
//! dims <N> <D> <M>
//! <config key> <value>          one line per SolverConfig field
//! P <M> <D>                     followed by M comma-separated rows
//! Q <D> <D>                     followed by D rows
//! feature_mean <D>              followed by one row
//! attribute_scaler none | attribute_scaler <M>   then shift and scale rows
//! loss_trace <T>                followed by one row (empty when T = 0)
//! ```
//!
//! Numbers are written in shortest round-trip exponent form, so reading a
//! file back gives bit-identical values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use uvds_core::dataset::AttributeScaler;
use uvds_core::{Matrix, ModelParams, SolverConfig};

use crate::error::{Error, Result};

const MAGIC: &str = "uvds-model 1";

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    /// Training rows `N`.
    pub n_train: usize,
    pub config: SolverConfig,
    pub p: Matrix,
    pub q: Matrix,
    pub feature_mean: Vec<f64>,
    pub scaler: Option<AttributeScaler>,
    pub loss_trace: Vec<f64>,
}

impl Model {
    pub fn feature_dim(&self) -> usize {
        self.q.rows()
    }

    pub fn attribute_dim(&self) -> usize {
        self.p.rows()
    }

    /// Parameters for synthesis. `V` is not stored and comes back empty.
    pub fn params(&self) -> ModelParams {
        ModelParams {
            p: self.p.clone(),
            q: self.q.clone(),
            v: Matrix::zeros(0, self.feature_dim()),
        }
    }

    /// Applies the stored attribute normalisation, if any.
    pub fn prepare_attributes(&self, attributes: &Matrix) -> Result<Matrix> {
        match &self.scaler {
            Some(s) => Ok(s.apply(attributes)?),
            None => Ok(attributes.clone()),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "dims {} {} {}", self.n_train, self.feature_dim(), self.attribute_dim()).unwrap();
        writeln!(out, "lambda {:e}", c.lambda).unwrap();
        writeln!(out, "beta {:e}", c.beta).unwrap();
        writeln!(out, "gamma {:e}", c.gamma).unwrap();
        writeln!(out, "alpha {:e}", c.alpha).unwrap();
        writeln!(out, "k {}", c.k).unwrap();
        writeln!(out, "outer_iters {}", c.outer_iters).unwrap();
        writeln!(out, "q_max_iters {}", c.q_max_iters).unwrap();
        writeln!(out, "q_tol {:e}", c.q_tol).unwrap();
        writeln!(out, "tau_init {:e}", c.tau_init).unwrap();
        writeln!(out, "eps_pi {:e}", c.eps_pi).unwrap();
        writeln!(out, "refresh_weights_per_inner {}", c.refresh_weights_per_inner).unwrap();
        writeln!(out, "seed {}", c.seed).unwrap();
        write_block(&mut out, "P", &self.p);
        write_block(&mut out, "Q", &self.q);
        writeln!(out, "feature_mean {}", self.feature_mean.len()).unwrap();
        write_row(&mut out, &self.feature_mean);
        match &self.scaler {
            None => writeln!(out, "attribute_scaler none").unwrap(),
            Some(s) => {
                writeln!(out, "attribute_scaler {}", s.shift.len()).unwrap();
                write_row(&mut out, &s.shift);
                write_row(&mut out, &s.scale);
            }
        }
        writeln!(out, "loss_trace {}", self.loss_trace.len()).unwrap();
        write_row(&mut out, &self.loss_trace);
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut r = Reader {
            lines: text.lines().enumerate(),
            path,
            line: 0,
        };
        if r.next()? != MAGIC {
            return r.fail("not a uvds model file");
        }
        let dims = r.keyed("dims")?;
        let dims: Vec<usize> = dims.split_whitespace().map(|t| r.num(t)).collect::<Result<_>>()?;
        let [n_train, d, m] = dims[..] else {
            return r.fail("dims needs three values");
        };
        let config = SolverConfig {
            lambda: r.keyed_num("lambda")?,
            beta: r.keyed_num("beta")?,
            gamma: r.keyed_num("gamma")?,
            alpha: r.keyed_num("alpha")?,
            k: r.keyed_num("k")?,
            outer_iters: r.keyed_num("outer_iters")?,
            q_max_iters: r.keyed_num("q_max_iters")?,
            q_tol: r.keyed_num("q_tol")?,
            tau_init: r.keyed_num("tau_init")?,
            eps_pi: r.keyed_num("eps_pi")?,
            refresh_weights_per_inner: r.keyed_num("refresh_weights_per_inner")?,
            seed: r.keyed_num("seed")?,
        };
        let p = r.block("P", m, d)?;
        let q = r.block("Q", d, d)?;
        let len: usize = r.keyed_num("feature_mean")?;
        let feature_mean = r.row(len)?;
        let scaler = match r.keyed("attribute_scaler")? {
            "none" => None,
            t => {
                let len: usize = r.num(t)?;
                Some(AttributeScaler {
                    shift: r.row(len)?,
                    scale: r.row(len)?,
                })
            }
        };
        let len: usize = r.keyed_num("loss_trace")?;
        let loss_trace = r.row(len)?;
        if feature_mean.len() != d {
            return r.fail("feature_mean length differs from D");
        }
        Ok(Self {
            n_train,
            config,
            p,
            q,
            feature_mean,
            scaler,
            loss_trace,
        })
    }
}

fn write_row(out: &mut String, row: &[f64]) {
    for (j, v) in row.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        write!(out, "{v:e}").unwrap();
    }
    out.push('\n');
}

fn write_block(out: &mut String, name: &str, m: &Matrix) {
    writeln!(out, "{name} {} {}", m.rows(), m.cols()).unwrap();
    for i in 0..m.rows() {
        write_row(out, m.row(i));
    }
}

struct Reader<'a, I> {
    lines: I,
    path: &'a Path,
    line: usize,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Reader<'a, I> {
    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => self.fail("unexpected end of file"),
        }
    }

    fn num<T: std::str::FromStr>(&self, t: &str) -> Result<T> {
        t.trim().parse().or_else(|_| self.fail(&format!("bad value {t:?}")))
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest),
            _ => self.fail(&format!("expected `{key}`")),
        }
    }

    fn keyed_num<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.keyed(key)?;
        self.num(v)
    }

    fn row(&mut self, len: usize) -> Result<Vec<f64>> {
        let line = self.next()?;
        let row: Vec<f64> = if line.is_empty() {
            Vec::new()
        } else {
            line.split(',').map(|t| self.num(t)).collect::<Result<_>>()?
        };
        if row.len() != len {
            return self.fail(&format!("expected {len} values, found {}", row.len()));
        }
        Ok(row)
    }

    fn block(&mut self, name: &str, rows: usize, cols: usize) -> Result<Matrix> {
        let head = self.keyed(name)?;
        if head.split_whitespace().map(|t| self.num::<usize>(t)).collect::<Result<Vec<_>>>()? != [rows, cols] {
            return self.fail(&format!("{name} has unexpected shape"));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.row(cols)?);
        }
        Ok(Matrix::new(rows, cols, data)?)
    }
}
