//! Characteristic-function residual process `T̂_n(γ)`, its supremum over a
//! compact grid of `γ`, and multiplier-bootstrap critical values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::index::IndexFit;
use crate::score::check_alpha;
use crate::smoother::{LooSmoother, SmootherConfig};
use crate::weight::dot;

/// Dense grids larger than this switch to quasi-random points.
pub const MAX_DENSE_POINTS: usize = 2401;
/// Number of `±γ` pairs in a quasi-random grid.
pub const QUASI_RANDOM_PAIRS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Grid spans `[-bound, bound]^p` in standardized covariate units.
    pub bound: f64,
    pub per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            bound: 3.0,
            per_axis: 7,
        }
    }
}

/// Finite set of frequencies, symmetric about and containing the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaGrid {
    pub points: Vec<Vec<f64>>,
    pub bound: f64,
    pub per_axis: usize,
    pub dense: bool,
}

impl GammaGrid {
    pub fn build(p: usize, cfg: &GridConfig) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidConfig("gamma grid needs p ≥ 1".into()));
        }
        if !(cfg.bound > 0.0) || !cfg.bound.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid bound must be positive, got {}",
                cfg.bound
            )));
        }
        if cfg.per_axis < 2 {
            return Err(Error::InvalidConfig(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        let dense_size = u32::try_from(p)
            .ok()
            .and_then(|e| cfg.per_axis.checked_pow(e))
            .filter(|&s| s <= MAX_DENSE_POINTS);
        let points = match dense_size {
            Some(_) => dense_points(p, cfg),
            None => quasi_random_points(p, cfg.bound),
        };
        Ok(Self {
            points,
            bound: cfg.bound,
            per_axis: cfg.per_axis,
            dense: dense_size.is_some(),
        })
    }

    /// Grid from explicit points; `-γ` is added for every `γ`, and the origin if missing.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let p = points
            .first()
            .map(Vec::len)
            .ok_or(Error::Empty("gamma grid"))?;
        if points.iter().any(|g| g.len() != p) {
            return Err(Error::InvalidConfig(
                "gamma points differ in dimension".into(),
            ));
        }
        let mut all: Vec<Vec<f64>> = Vec::with_capacity(2 * points.len() + 1);
        for g in points {
            let neg: Vec<f64> = g.iter().map(|v| -v).collect();
            for q in [g, neg] {
                if !all.contains(&q) {
                    all.push(q);
                }
            }
        }
        let origin = vec![0.0; p];
        if !all.iter().any(|g| is_zero(g)) {
            all.insert(0, origin);
        }
        let bound = all.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            points: all,
            bound,
            per_axis: 0,
            dense: false,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// The origin plus every point whose first nonzero coordinate is
    /// positive. Since `T̂_n(-γ)` is the conjugate of `T̂_n(γ)`, the supremum
    /// of the modulus over this half equals the one over the full grid.
    pub fn half(&self) -> Vec<&[f64]> {
        self.points
            .iter()
            .filter(|g| match g.iter().find(|v| **v != 0.0) {
                None => true,
                Some(v) => *v > 0.0,
            })
            .map(Vec::as_slice)
            .collect()
    }
}

fn is_zero(g: &[f64]) -> bool {
    g.iter().all(|v| *v == 0.0)
}

fn dense_points(p: usize, cfg: &GridConfig) -> Vec<Vec<f64>> {
    let k = cfg.per_axis;
    // mirrored so that the axis is exactly symmetric; odd k keeps 0 in the middle
    let mut axis = vec![0.0; k];
    for i in 0..k / 2 {
        let v = cfg.bound * (1.0 - 2.0 * i as f64 / (k - 1) as f64);
        axis[i] = -v;
        axis[k - 1 - i] = v;
    }
    let total = k.pow(p as u32);
    let mut points = Vec::with_capacity(total + 1);
    for mut idx in 0..total {
        let mut g = vec![0.0; p];
        for slot in g.iter_mut() {
            *slot = axis[idx % k];
            idx /= k;
        }
        points.push(g);
    }
    if k % 2 == 0 {
        points.push(vec![0.0; p]);
    }
    points
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes
            .iter()
            .take_while(|&&q| q * q <= c)
            .all(|&q| c % q != 0)
        {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Origin plus `QUASI_RANDOM_PAIRS` Halton points in the box and their negations.
fn quasi_random_points(p: usize, bound: f64) -> Vec<Vec<f64>> {
    let bases = first_primes(p);
    let mut points = Vec::with_capacity(2 * QUASI_RANDOM_PAIRS + 1);
    points.push(vec![0.0; p]);
    for i in 1..=QUASI_RANDOM_PAIRS as u64 {
        let g: Vec<f64> = bases
            .iter()
            .map(|&b| bound * (2.0 * radical_inverse(i, b) - 1.0))
            .collect();
        let neg = g.iter().map(|v| -v).collect();
        points.push(g);
        points.push(neg);
    }
    points
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub m: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.m < 100 {
            return Err(Error::InvalidConfig(format!(
                "bootstrap needs at least 100 replicates, got {}",
                self.m
            )));
        }
        if (self.m as f64) * self.alpha < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "m·alpha must be at least 1 (m = {}, alpha = {})",
                self.m, self.alpha
            )));
        }
        Ok(())
    }

    /// One-based rank of the critical value among the sorted replicates, `⌊(1-α)m⌋`.
    pub fn critical_rank(&self) -> usize {
        let r = libm::floor((1.0 - self.alpha) * self.m as f64 + 1e-9) as usize;
        r.clamp(1, self.m)
    }

    /// Multiplier stream for replicate `b`: ChaCha20 keyed by the seed,
    /// stream number `b`.
    pub fn replicate_rng(&self, b: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(b);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub bound: f64,
    pub per_axis: usize,
    pub points: usize,
    pub evaluated: usize,
    pub dense: bool,
    pub standardized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmnibusReport {
    pub t_tilde: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub m: usize,
    pub seed: u64,
    pub h: f64,
    pub grid: GridSummary,
    pub empty_windows: usize,
}

fn check_shapes(eps_hat: &[f64], x: &[f64], p: usize) -> Result<()> {
    if p == 0 || x.len() != eps_hat.len() * p {
        return Err(Error::LengthMismatch {
            what: "covariate matrix",
            expected: eps_hat.len() * p,
            actual: x.len(),
        });
    }
    Ok(())
}

/// `T̂_n(γ) = n^{-1/2} Σ_j ε̂_j exp(i γᵀX_j)` for row-major `x`.
pub fn cf_process(eps_hat: &[f64], x: &[f64], gamma: &[f64]) -> Result<Complex64> {
    let p = gamma.len();
    check_shapes(eps_hat, x, p)?;
    if eps_hat.is_empty() {
        return Err(Error::Empty("residuals"));
    }
    Ok(cf_unchecked(eps_hat, x, gamma))
}

fn cf_unchecked(eps_hat: &[f64], x: &[f64], gamma: &[f64]) -> Complex64 {
    let p = gamma.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (e, row) in eps_hat.iter().zip(x.chunks_exact(p)) {
        let (s, c) = libm::sincos(dot(gamma, row));
        re += e * c;
        im += e * s;
    }
    Complex64::new(re, im) / libm::sqrt(eps_hat.len() as f64)
}

/// `sup_γ |T̂_n(γ)|` over the given points.
pub fn sup_statistic<'a>(
    eps_hat: &[f64],
    x: &[f64],
    grid: impl IntoIterator<Item = &'a [f64]>,
) -> Result<f64> {
    let mut best: Option<f64> = None;
    for g in grid {
        let v = cf_process(eps_hat, x, g)?.norm();
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    best.ok_or(Error::Empty("gamma grid"))
}

/// Table of `ε̂_i [W_i(γ) - W̄_n^{(i)}(γ, Û_i)]` for every `γ`, shared by
/// all bootstrap replicates.
#[derive(Debug, Clone)]
pub struct BootstrapTable {
    n: usize,
    rows: Vec<Vec<Complex64>>,
}

impl BootstrapTable {
    /// `centered_w[g][i] = W_i(γ_g) - W̄_n^{(i)}(γ_g, Û_i)`.
    pub fn new(eps_hat: &[f64], centered_w: &[Vec<Complex64>]) -> Result<Self> {
        let n = eps_hat.len();
        if n == 0 {
            return Err(Error::Empty("residuals"));
        }
        if centered_w.is_empty() {
            return Err(Error::Empty("gamma grid"));
        }
        let mut rows = Vec::with_capacity(centered_w.len());
        for cw in centered_w {
            if cw.len() != n {
                return Err(Error::LengthMismatch {
                    what: "centered weights",
                    expected: n,
                    actual: cw.len(),
                });
            }
            rows.push(cw.iter().zip(eps_hat).map(|(w, e)| w * *e).collect());
        }
        Ok(Self { n, rows })
    }

    /// `T_n^r(γ_g)` for multipliers `e`.
    pub fn process_at(&self, g: usize, e: &[f64]) -> Complex64 {
        let s = self.rows[g]
            .iter()
            .zip(e)
            .fold(Complex64::new(0.0, 0.0), |acc, (a, e)| acc + a * *e);
        s / libm::sqrt(self.n as f64)
    }

    /// `sup_γ |T_n^r(γ)|`.
    pub fn replicate(&self, e: &[f64]) -> Result<f64> {
        if e.len() != self.n {
            return Err(Error::LengthMismatch {
                what: "multipliers",
                expected: self.n,
                actual: e.len(),
            });
        }
        Ok((0..self.rows.len())
            .map(|g| self.process_at(g, e).norm())
            .fold(0.0, f64::max))
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// One bootstrap draw: `sup_γ |n^{-1/2} Σ_i e_i ε̂_i [W_i(γ) - W̄_n^{(i)}(γ, Û_i)]|`.
pub fn bootstrap_replicate(
    eps_hat: &[f64],
    centered_w: &[Vec<Complex64>],
    e: &[f64],
) -> Result<f64> {
    BootstrapTable::new(eps_hat, centered_w)?.replicate(e)
}

/// Centered characteristic-function weights at each point of `grid`,
/// evaluated on (standardized) covariates `z`.
pub fn centered_cf_weights(
    smoother: &LooSmoother,
    z: &[f64],
    grid: &[&[f64]],
) -> Result<Vec<Vec<Complex64>>> {
    let n = smoother.n();
    let mut out = Vec::with_capacity(grid.len());
    for g in grid {
        let p = g.len();
        if z.len() != n * p {
            return Err(Error::LengthMismatch {
                what: "covariate matrix",
                expected: n * p,
                actual: z.len(),
            });
        }
        let (sin, cos): (Vec<f64>, Vec<f64>) =
            z.chunks_exact(p).map(|r| libm::sincos(dot(g, r))).unzip();
        let cos_c = smoother.centered(&cos)?;
        let sin_c = smoother.centered(&sin)?;
        out.push(
            cos_c
                .into_iter()
                .zip(sin_c)
                .map(|(c, s)| Complex64::new(c, s))
                .collect(),
        );
    }
    Ok(out)
}

/// Draws the `n` standard normal multipliers of bootstrap replicate `b`.
pub fn multipliers(boot: &BootstrapConfig, b: u64, n: usize) -> Vec<f64> {
    let mut rng = boot.replicate_rng(b);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Sup-type omnibus test calibrated by the multiplier bootstrap.
///
/// `γ` is applied to covariates standardized column-wise, and only the
/// half grid is evaluated (conjugate symmetry makes this lossless).
pub fn omnibus_test(
    data: &Dataset,
    fit: &IndexFit,
    cfg: &SmootherConfig,
    grid: &GammaGrid,
    boot: &BootstrapConfig,
) -> Result<OmnibusReport> {
    boot.validate()?;
    if grid.dim() != data.p() {
        return Err(Error::LengthMismatch {
            what: "gamma grid dimension",
            expected: data.p(),
            actual: grid.dim(),
        });
    }
    if fit.n() != data.n() {
        return Err(Error::LengthMismatch {
            what: "index fit",
            expected: data.n(),
            actual: fit.n(),
        });
    }
    let smoother = LooSmoother::new(fit, cfg)?;
    let eps = smoother.centered(data.y())?;
    let z = data.standardized_x();
    let half = grid.half();

    let t_tilde = sup_statistic(&eps, &z, half.iter().copied())?;
    let table = BootstrapTable::new(&eps, &centered_cf_weights(&smoother, &z, &half)?)?;

    let n = data.n();
    let mut reps: Vec<f64> = (0..boot.m as u64)
        .map(|b| table.replicate(&multipliers(boot, b, n)))
        .collect::<Result<_>>()?;
    let exceed = reps.iter().filter(|&&r| r >= t_tilde).count();
    reps.sort_by(f64::total_cmp);
    let critical_value = reps[boot.critical_rank() - 1];

    Ok(OmnibusReport {
        t_tilde,
        critical_value,
        p_value: (1 + exceed) as f64 / (boot.m + 1) as f64,
        reject: t_tilde >= critical_value,
        alpha: boot.alpha,
        m: boot.m,
        seed: boot.seed,
        h: cfg.h,
        grid: GridSummary {
            bound: grid.bound,
            per_axis: grid.per_axis,
            points: grid.len(),
            evaluated: half.len(),
            dense: grid.dense,
            standardized: true,
        },
        empty_windows: smoother.empty_windows(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dense_grid_shape() {
        let g = GammaGrid::build(2, &GridConfig::default()).unwrap();
        assert_eq!(g.len(), 49);
        assert!(g.points.iter().any(|p| is_zero(p)));
        for p in &g.points {
            let neg: Vec<f64> = p.iter().map(|v| -v).collect();
            assert!(g.points.contains(&neg));
        }
        assert_eq!(g.half().len(), 25);
        assert_eq!(
            GammaGrid::build(4, &GridConfig::default()).unwrap().len(),
            2401
        );

        let even = GammaGrid::build(
            1,
            &GridConfig {
                bound: 1.0,
                per_axis: 4,
            },
        )
        .unwrap();
        assert_eq!(even.len(), 5);
        assert_eq!(even.half().len(), 3);
    }

    #[test]
    fn quasi_random_grid_for_large_p() {
        let g = GammaGrid::build(5, &GridConfig::default()).unwrap();
        assert!(!g.dense);
        assert_eq!(g.len(), 2 * QUASI_RANDOM_PAIRS + 1);
        assert!(g.points.iter().flatten().all(|v| v.abs() <= 3.0));
        assert_eq!(g.half().len(), QUASI_RANDOM_PAIRS + 1);
    }

    #[test]
    fn grid_errors() {
        assert!(GammaGrid::build(
            2,
            &GridConfig {
                bound: 0.0,
                per_axis: 7
            }
        )
        .is_err());
        assert!(GammaGrid::build(
            2,
            &GridConfig {
                bound: 1.0,
                per_axis: 1
            }
        )
        .is_err());
        assert!(GammaGrid::from_points(vec![]).is_err());
        let g = GammaGrid::from_points(vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn process_examples() {
        let eps = [0.5, -1.0, 2.0];
        let x = [0.1, 0.2, -0.3, 1.0, 0.7, -0.4];
        let at0 = cf_process(&eps, &x, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(at0.re, 1.5 / libm::sqrt(3.0), epsilon = 1e-15);
        assert_eq!(at0.im, 0.0);

        let g = [0.8, -1.3];
        let a = cf_process(&eps, &x, &g).unwrap();
        let b = cf_process(&eps, &x, &[-0.8, 1.3]).unwrap();
        assert_eq!(a, b.conj());

        let one = cf_process(&[1.0], &[0.4, 2.2], &g).unwrap();
        assert_abs_diff_eq!(one.norm(), 1.0, epsilon = 1e-15);
        assert!(cf_process(&eps, &x[..5], &g).is_err());
    }

    #[test]
    fn sup_examples() {
        let x = [0.1, 0.2, -0.3, 1.0, 0.7, -0.4];
        let grid = GammaGrid::build(2, &GridConfig::default()).unwrap();
        let full = || grid.points.iter().map(Vec::as_slice);
        assert_eq!(sup_statistic(&[0.0; 3], &x, full()).unwrap(), 0.0);
        let eps = [0.5, -1.0, 2.0];
        let origin: [&[f64]; 1] = [&[0.0, 0.0]];
        assert_abs_diff_eq!(
            sup_statistic(&eps, &x, origin).unwrap(),
            1.5 / libm::sqrt(3.0),
            epsilon = 1e-15
        );
        let s_full = sup_statistic(&eps, &x, full()).unwrap();
        assert_eq!(s_full, sup_statistic(&eps, &x, grid.half()).unwrap());
        let negated: Vec<Vec<f64>> = grid
            .points
            .iter()
            .map(|g| g.iter().map(|v| -v).collect())
            .collect();
        assert_eq!(
            s_full,
            sup_statistic(&eps, &x, negated.iter().map(Vec::as_slice)).unwrap()
        );
        let empty: [&[f64]; 0] = [];
        assert!(sup_statistic(&eps, &x, empty).is_err());
    }

    #[test]
    fn replicate_examples() {
        let eps = [1.5, -0.5];
        let cw = vec![vec![Complex64::new(0.3, -0.2), Complex64::new(-0.6, 0.9)]];
        assert_eq!(bootstrap_replicate(&eps, &cw, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(
            bootstrap_replicate(&[0.0, 0.0], &cw, &[1.0, -1.0]).unwrap(),
            0.0
        );
        // (1.5·(0.3 - 0.2i) - (-0.5)·(-0.6 + 0.9i)) / √2 = (0.15 + 0.15i)/√2
        let v = bootstrap_replicate(&eps, &cw, &[1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(
            v,
            libm::hypot(0.15, 0.15) / libm::sqrt(2.0),
            epsilon = 1e-15
        );
        assert!(bootstrap_replicate(&eps, &cw, &[1.0]).is_err());
    }

    #[test]
    fn bootstrap_config_rules() {
        let b = BootstrapConfig {
            m: 1000,
            alpha: 0.05,
            seed: 1,
        };
        assert_eq!(b.critical_rank(), 950);
        assert!(b.validate().is_ok());
        assert!(BootstrapConfig {
            m: 100,
            alpha: 0.001,
            seed: 1
        }
        .validate()
        .is_err());
        assert!(BootstrapConfig {
            m: 50,
            alpha: 0.1,
            seed: 1
        }
        .validate()
        .is_err());
        assert_eq!(
            BootstrapConfig {
                m: 500,
                alpha: 0.05,
                seed: 1
            }
            .critical_rank(),
            475
        );
        assert_eq!(
            BootstrapConfig {
                m: 300,
                alpha: 0.1,
                seed: 1
            }
            .critical_rank(),
            270
        );
        assert_eq!(multipliers(&b, 7, 5), multipliers(&b, 7, 5));
        assert_ne!(multipliers(&b, 7, 5), multipliers(&b, 8, 5));
    }
}
