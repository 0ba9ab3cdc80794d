//! Bandwidth choice: minimize the weighted leave-one-out squared error over
//! a grid, then shrink by `n^{-2/15}` to move from the `n^{-1/5}` rate to
//! the undersmoothing rate `n^{-1/3}`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::index::IndexFit;
use crate::smoother::{LooSmoother, SmootherConfig};

/// Exponent of the undersmoothing factor, `-1/3 + 1/5`.
pub const UNDERSMOOTH_EXPONENT: f64 = -1.0 / 3.0 + 1.0 / 5.0;

/// Log-spaced search grid `[lower · n^{-1/5}, upper · n^{-1/5}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Default for GridBounds {
    fn default() -> Self {
        Self {
            lower: 0.5,
            upper: 3.0,
            points: 30,
        }
    }
}

impl GridBounds {
    pub fn grid(&self, n: usize) -> Result<Vec<f64>> {
        if !(self.lower > 0.0) || !(self.upper >= self.lower) || !self.upper.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "bandwidth grid bounds must satisfy 0 < lower <= upper, got [{}, {}]",
                self.lower,
                self.upper
            )));
        }
        if self.points == 0 {
            return Err(Error::Empty("bandwidth grid"));
        }
        let rate = libm::pow(n as f64, -0.2);
        let (lo, hi) = (libm::log(self.lower * rate), libm::log(self.upper * rate));
        if self.points == 1 {
            return Ok(alloc::vec![self.lower * rate]);
        }
        let step = (hi - lo) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| libm::exp(lo + step * k as f64))
            .collect())
    }
}

/// 30 log-spaced points in `[0.5 n^{-1/5}, 3 n^{-1/5}]`.
pub fn default_grid(n: usize) -> Vec<f64> {
    GridBounds::default()
        .grid(n)
        .expect("default bounds are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthChoice {
    Auto(GridBounds),
    Fixed(f64),
}

impl Default for BandwidthChoice {
    fn default() -> Self {
        BandwidthChoice::Auto(GridBounds::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthSelection {
    /// Grid minimizer of the criterion.
    pub h1: f64,
    /// Bandwidth actually used, `h1 · n^{-2/15}` capped at 1.
    pub h_final: f64,
    pub criterion: f64,
}

/// `Σ_j (Y_j - ψ_n^{(j)}(Û_j))² W(X_j)²`.
pub fn mise(data: &Dataset, fit: &IndexFit, w_values: &[f64], h: f64) -> Result<f64> {
    let n = data.n();
    if w_values.len() != n {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: n,
            actual: w_values.len(),
        });
    }
    if fit.n() != n {
        return Err(Error::LengthMismatch {
            what: "index fit",
            expected: n,
            actual: fit.n(),
        });
    }
    let smoother = LooSmoother::new(fit, &SmootherConfig::probe(h)?)?;
    let eps = smoother.centered(data.y())?;
    Ok(eps.iter().zip(w_values).map(|(e, w)| e * e * w * w).sum())
}

/// Grid minimizer of [`mise`] (ties go to the smaller bandwidth) and the
/// undersmoothed bandwidth derived from it.
pub fn select_bandwidth(
    data: &Dataset,
    fit: &IndexFit,
    w_values: &[f64],
    grid: &[f64],
) -> Result<BandwidthSelection> {
    if grid.is_empty() {
        return Err(Error::Empty("bandwidth grid"));
    }
    let mut best: Option<(f64, f64)> = None;
    for &h in grid {
        let value = mise(data, fit, w_values, h)?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                what: "bandwidth criterion",
                value,
            });
        }
        best = match best {
            Some((bh, bv)) if bv < value || (bv == value && bh <= h) => Some((bh, bv)),
            _ => Some((h, value)),
        };
    }
    let (h1, criterion) = best.expect("grid is nonempty");
    Ok(BandwidthSelection {
        h1,
        h_final: undersmooth(h1, data.n()).min(1.0),
        criterion,
    })
}

/// `h1 · n^{-1/3 + 1/5}`.
pub fn undersmooth(h1: f64, n: usize) -> f64 {
    h1 * libm::pow(n as f64, UNDERSMOOTH_EXPONENT)
}
