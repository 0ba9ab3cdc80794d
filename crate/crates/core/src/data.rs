use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Covariates stored row-major (`n × p`) together with the responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    p: usize,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidConfig(
                "at least one covariate is required".into(),
            ));
        }
        let n = y.len();
        if x.len() != n * p {
            return Err(Error::LengthMismatch {
                what: "covariate matrix",
                expected: n * p,
                actual: x.len(),
            });
        }
        if let Some(&v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "covariates",
                value: v,
            });
        }
        if let Some(&v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "responses",
                value: v,
            });
        }
        Ok(Self { x, y, p })
    }

    /// Builds a dataset from a slice of rows.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.len() != y.len() {
            return Err(Error::LengthMismatch {
                what: "responses",
                expected: rows.len(),
                actual: y.len(),
            });
        }
        let mut x = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::LengthMismatch {
                    what: "covariate row",
                    expected: p,
                    actual: row.len(),
                });
            }
            x.extend_from_slice(row);
        }
        Self::new(x, y, p)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.p)
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Row-major covariate storage.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Same covariates, different responses.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y, self.p)
    }

    /// Covariates centred to zero mean and scaled to unit (sample) variance,
    /// column by column. Constant columns are only centred.
    pub fn standardized_x(&self) -> Vec<f64> {
        let n = self.n();
        let p = self.p;
        let mut out = self.x.clone();
        if n == 0 {
            return out;
        }
        for l in 0..p {
            let mean = self.rows().map(|r| r[l]).sum::<f64>() / n as f64;
            let ss: f64 = self.rows().map(|r| (r[l] - mean) * (r[l] - mean)).sum();
            let sd = if n > 1 {
                libm::sqrt(ss / (n - 1) as f64)
            } else {
                0.0
            };
            let scale = if sd > 0.0 { sd } else { 1.0 };
            for i in 0..n {
                out[i * p + l] = (self.x[i * p + l] - mean) / scale;
            }
        }
        out
    }
}
