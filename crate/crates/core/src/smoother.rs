//! Leave-one-out kernel smoothing on the rank scale.
//!
//! For an observation `j` the smoother returns
//! `(1/((n-1)h)) Σ_{i≠j} v_i K((Û_j - Û_i)/h)`. There is no denominator
//! and no boundary correction; an empty kernel window yields 0.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::index::IndexFit;
use crate::kernel::KernelId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmootherConfig {
    pub kernel: KernelId,
    pub h: f64,
}

impl SmootherConfig {
    /// Quartic kernel with bandwidth `h ∈ (0, 1]`.
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::InvalidBandwidth(h));
        }
        Ok(Self {
            kernel: KernelId::Quartic,
            h,
        })
    }

    pub fn with_kernel(mut self, kernel: KernelId) -> Self {
        self.kernel = kernel;
        self
    }

    // Bandwidth search may probe h > 1.
    pub(crate) fn probe(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidBandwidth(h));
        }
        Ok(Self {
            kernel: KernelId::Quartic,
            h,
        })
    }
}

/// Leave-one-out estimate at `u` with observation `j` removed.
pub fn loo_smooth(
    values: &[f64],
    u_ranks: &[f64],
    j: usize,
    u: f64,
    cfg: &SmootherConfig,
) -> Result<f64> {
    let n = values.len();
    if u_ranks.len() != n {
        return Err(Error::LengthMismatch {
            what: "ranks",
            expected: n,
            actual: u_ranks.len(),
        });
    }
    if n < 2 {
        return Err(Error::InsufficientData(
            "leave-one-out smoothing needs n ≥ 2".into(),
        ));
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    if !(cfg.h > 0.0) || !cfg.h.is_finite() {
        return Err(Error::InvalidBandwidth(cfg.h));
    }
    let mut sum = 0.0;
    for i in (0..n).filter(|&i| i != j) {
        sum += values[i] * cfg.kernel.eval((u - u_ranks[i]) / cfg.h);
    }
    Ok(sum / ((n - 1) as f64 * cfg.h))
}

/// Precomputed leave-one-out weights for a fixed rank configuration and
/// bandwidth, stored sparsely (only nonzero kernel values).
///
/// Kernel arguments are formed from the integer rank counts, so the weights
/// are exactly invariant under reflection of the ranks.
#[derive(Debug, Clone)]
pub struct LooSmoother {
    n: usize,
    offsets: Vec<usize>,
    neighbours: Vec<usize>,
    weights: Vec<f64>,
    scale: f64,
    empty_windows: usize,
}

impl LooSmoother {
    pub fn new(fit: &IndexFit, cfg: &SmootherConfig) -> Result<Self> {
        Self::from_counts(&fit.rank_counts, cfg)
    }

    pub fn from_counts(counts: &[usize], cfg: &SmootherConfig) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(Error::InsufficientData(
                "leave-one-out smoothing needs n ≥ 2".into(),
            ));
        }
        if !(cfg.h > 0.0) || !cfg.h.is_finite() {
            return Err(Error::InvalidBandwidth(cfg.h));
        }
        let nf = n as f64;
        // kernel value for every possible count difference
        let table: Vec<f64> = (0..=n)
            .map(|d| cfg.kernel.eval(d as f64 / nf / cfg.h))
            .collect();

        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbours = Vec::new();
        let mut weights = Vec::new();
        let mut empty_windows = 0;
        offsets.push(0);
        for j in 0..n {
            let start = neighbours.len();
            for i in (0..n).filter(|&i| i != j) {
                let k = table[counts[j].abs_diff(counts[i])];
                if k != 0.0 {
                    neighbours.push(i);
                    weights.push(k);
                }
            }
            if neighbours.len() == start {
                empty_windows += 1;
            }
            offsets.push(neighbours.len());
        }
        Ok(Self {
            n,
            offsets,
            neighbours,
            weights,
            scale: (n - 1) as f64 * cfg.h,
            empty_windows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of observations whose leave-one-out window contains no other point.
    pub fn empty_windows(&self) -> usize {
        self.empty_windows
    }

    /// Leave-one-out smooth of `values` at every observation.
    pub fn smooth(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.n {
            return Err(Error::LengthMismatch {
                what: "smoothed values",
                expected: self.n,
                actual: values.len(),
            });
        }
        Ok((0..self.n).map(|j| self.smooth_at(values, j)).collect())
    }

    #[inline]
    fn smooth_at(&self, values: &[f64], j: usize) -> f64 {
        let range = self.offsets[j]..self.offsets[j + 1];
        let sum: f64 = self.neighbours[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .fold(0.0, |acc, (&i, &k)| acc + values[i] * k);
        sum / self.scale
    }

    /// `values_j - smooth(values)_j`.
    pub fn centered(&self, values: &[f64]) -> Result<Vec<f64>> {
        let s = self.smooth(values)?;
        Ok(values.iter().zip(s).map(|(v, s)| v - s).collect())
    }
}

/// Residuals `ε̂_j = Y_j - ψ_n^{(j)}(Û_j)`.
pub fn residuals(data: &Dataset, fit: &IndexFit, cfg: &SmootherConfig) -> Result<Vec<f64>> {
    check_fit(data.n(), fit)?;
    LooSmoother::new(fit, cfg)?.centered(data.y())
}

/// Leave-one-out smooth `W̄_n^{(j)}(Û_j)` of weight values.
pub fn smoothed_weights(
    w_values: &[f64],
    fit: &IndexFit,
    cfg: &SmootherConfig,
) -> Result<Vec<f64>> {
    check_fit(w_values.len(), fit)?;
    LooSmoother::new(fit, cfg)?.smooth(w_values)
}

fn check_fit(n: usize, fit: &IndexFit) -> Result<()> {
    if fit.n() != n {
        return Err(Error::LengthMismatch {
            what: "index fit",
            expected: n,
            actual: fit.n(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn fit_from(t: &[f64]) -> (Dataset, IndexFit) {
        let rows: Vec<Vec<f64>> = t.iter().map(|v| vec![*v]).collect();
        let d = Dataset::from_rows(&rows, vec![0.0; t.len()]).unwrap();
        let fit = IndexFit::from_direction(&d, vec![1.0]).unwrap();
        (d, fit)
    }

    #[test]
    fn loo_examples() {
        let cfg = SmootherConfig::new(0.1).unwrap();
        let u = [0.2, 0.5, 0.9];
        assert_eq!(loo_smooth(&[1.0, 2.0, 3.0], &u, 0, 0.2, &cfg).unwrap(), 0.0);

        let cfg = SmootherConfig::new(1.0).unwrap();
        let v = loo_smooth(&[99.0, 2.0], &[0.5, 1.0], 0, 1.0, &cfg).unwrap();
        assert_eq!(v, 1.875);
        assert_eq!(
            loo_smooth(&[0.0; 4], &[0.25, 0.5, 0.75, 1.0], 2, 0.75, &cfg).unwrap(),
            0.0
        );

        assert!(loo_smooth(&[1.0], &[1.0], 0, 1.0, &cfg).is_err());
        assert!(matches!(
            loo_smooth(&[1.0, 2.0], &[0.5, 1.0], 2, 1.0, &cfg),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn residual_examples() {
        let (d, fit) = fit_from(&[0.1, 0.2, 0.3]);
        let cfg = SmootherConfig::new(0.4).unwrap();
        let eps = residuals(&d, &fit, &cfg).unwrap();
        assert_eq!(eps, vec![0.0; 3]);

        let d = d.with_response(vec![1.0, 2.0, 3.0]).unwrap();
        // Below the rank spacing every window is empty.
        let tiny = SmootherConfig::new(0.2).unwrap();
        let s = LooSmoother::new(&fit, &tiny).unwrap();
        assert_eq!(s.empty_windows(), 3);
        assert_eq!(residuals(&d, &fit, &tiny).unwrap(), vec![1.0, 2.0, 3.0]);

        // Ranks 1/3, 2/3, 1 with h = 0.4: only adjacent ranks interact,
        // K((1/3)/0.4) = 0.9375 (1 - (5/6)²)² = 0.9375 · (11/36)².
        let k = 0.9375 * (11.0f64 / 36.0).powi(2);
        let scale = 2.0 * 0.4;
        let expected = [
            1.0 - 2.0 * k / scale,
            2.0 - (1.0 + 3.0) * k / scale,
            3.0 - 2.0 * k / scale,
        ];
        let eps = residuals(&d, &fit, &cfg).unwrap();
        for (e, x) in eps.iter().zip(expected) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-14);
        }

        let w = smoothed_weights(&[1.0, 2.0, 3.0], &fit, &cfg).unwrap();
        for ((w, e), y) in w.iter().zip(&eps).zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*w, y - e, epsilon = 1e-15);
        }
        assert_eq!(
            smoothed_weights(&[0.0; 3], &fit, &cfg).unwrap(),
            vec![0.0; 3]
        );
    }

    #[test]
    fn two_point_weights() {
        let (_, fit) = fit_from(&[0.0, 1.0]);
        let cfg = SmootherConfig::new(1.0).unwrap();
        // ranks 1/2 and 1: K(0.5) = 0.52734375 for both
        let w = smoothed_weights(&[5.0, 2.0], &fit, &cfg).unwrap();
        assert_eq!(w, vec![2.0 * 0.52734375, 5.0 * 0.52734375]);
    }

    #[test]
    fn config_bounds() {
        assert!(SmootherConfig::new(0.0).is_err());
        assert!(SmootherConfig::new(1.5).is_err());
        assert!(SmootherConfig::new(f64::NAN).is_err());
        assert!(SmootherConfig::new(1.0).is_ok());
    }

    #[test]
    fn constant_reproduced_in_interior() {
        let n = 1000;
        let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let (_, fit) = fit_from(&t);
        let h = libm::pow(n as f64, -1.0 / 3.0);
        let cfg = SmootherConfig::new(h).unwrap();
        let s = LooSmoother::new(&fit, &cfg).unwrap();
        let a = 2.5;
        let fitted = s.smooth(&vec![a; n]).unwrap();
        for (u, f) in fit.ranks_u.iter().zip(fitted) {
            if *u > h && *u < 1.0 - h {
                assert!((f - a).abs() < 0.05, "u={u}, fit={f}");
            }
        }
    }

    #[test]
    fn affine_linear_in_response() {
        let t = [0.3, -1.2, 0.8, 2.1, -0.4, 1.1, 0.05];
        let (d, fit) = fit_from(&t);
        let cfg = SmootherConfig::new(0.45).unwrap();
        let y1 = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.5, -0.7];
        let y2 = vec![0.2, 0.4, -1.1, 2.0, 5.0, -3.0, 0.9];
        let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
        let r1 = residuals(&d.with_response(y1).unwrap(), &fit, &cfg).unwrap();
        let r2 = residuals(&d.with_response(y2).unwrap(), &fit, &cfg).unwrap();
        let r = residuals(&d.with_response(sum).unwrap(), &fit, &cfg).unwrap();
        for i in 0..t.len() {
            assert_abs_diff_eq!(r[i], r1[i] + r2[i], epsilon = 1e-12);
        }
    }
}
