//! Directional score test and the maximin chi-square test built from
//! several weight functions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::index::IndexFit;
use crate::smoother::{LooSmoother, SmootherConfig};
use crate::special;
use crate::weight::WeightSpec;

/// Condition numbers above this make `Σ_n` unusable.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub weight: String,
    pub t_hat: f64,
    pub sigma_n2: f64,
    pub t_bar: f64,
    /// `λ_{1-α/2}`
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub h: f64,
    pub empty_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximinReport {
    pub weights: Vec<String>,
    pub t_vec: Vec<f64>,
    /// Rows of `Σ_n`.
    pub sigma_mat: Vec<Vec<f64>>,
    pub statistic: f64,
    pub c_alpha: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub d: usize,
    pub h: f64,
    pub empty_windows: usize,
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// `T̂_n = n^{-1/2} Σ_j ε̂_j W_j`.
pub fn score_statistic(eps_hat: &[f64], w_values: &[f64]) -> Result<f64> {
    check_len("weights", eps_hat.len(), w_values.len())?;
    if eps_hat.is_empty() {
        return Err(Error::Empty("residuals"));
    }
    let s: f64 = eps_hat.iter().zip(w_values).map(|(e, w)| e * w).sum();
    Ok(s / libm::sqrt(eps_hat.len() as f64))
}

/// `σ_n² = (1/n) Σ_j ε̂_j² [W_j - W̄_n^{(j)}(Û_j)]²`.
pub fn variance_estimate(eps_hat: &[f64], w_values: &[f64], w_smoothed: &[f64]) -> Result<f64> {
    check_len("weights", eps_hat.len(), w_values.len())?;
    check_len("smoothed weights", eps_hat.len(), w_smoothed.len())?;
    if eps_hat.is_empty() {
        return Err(Error::Empty("residuals"));
    }
    let s: f64 = eps_hat
        .iter()
        .zip(w_values.iter().zip(w_smoothed))
        .map(|(e, (w, wb))| {
            let c = e * (w - wb);
            c * c
        })
        .sum();
    Ok(s / eps_hat.len() as f64)
}

/// `Σ_n` with entries `(1/n) Σ_k ε̂_k² [s_i - s̄_i^{(k)}][s_j - s̄_j^{(k)}]`.
///
/// `s_values` and `s_smoothed` hold one column (of length `n`) per weight.
pub fn covariance_matrix(
    eps_hat: &[f64],
    s_values: &[Vec<f64>],
    s_smoothed: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let n = eps_hat.len();
    let d = s_values.len();
    check_len("smoothed weight columns", d, s_smoothed.len())?;
    if n == 0 {
        return Err(Error::Empty("residuals"));
    }
    for (s, sb) in s_values.iter().zip(s_smoothed) {
        check_len("weight column", n, s.len())?;
        check_len("smoothed weight column", n, sb.len())?;
    }
    let centered: Vec<Vec<f64>> = s_values
        .iter()
        .zip(s_smoothed)
        .map(|(s, sb)| s.iter().zip(sb).map(|(a, b)| a - b).collect())
        .collect();
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let mut acc = 0.0;
            for k in 0..n {
                acc += eps_hat[k] * eps_hat[k] * centered[i][k] * centered[j][k];
            }
            out[i][j] = acc / n as f64;
            out[j][i] = out[i][j];
        }
    }
    Ok(out)
}

struct Residualized {
    smoother: LooSmoother,
    eps: Vec<f64>,
}

impl Residualized {
    fn new(data: &Dataset, fit: &IndexFit, cfg: &SmootherConfig) -> Result<Self> {
        check_len("index fit", data.n(), fit.n())?;
        let smoother = LooSmoother::new(fit, cfg)?;
        let eps = smoother.centered(data.y())?;
        Ok(Self { smoother, eps })
    }
}

/// Two-sided normal-calibrated score test with weight `w`.
pub fn standardized_test(
    data: &Dataset,
    fit: &IndexFit,
    w: &WeightSpec,
    cfg: &SmootherConfig,
    alpha: f64,
) -> Result<ScoreReport> {
    check_alpha(alpha)?;
    let r = Residualized::new(data, fit, cfg)?;
    let w_values = w.evaluate(data)?;
    let w_smoothed = r.smoother.smooth(&w_values)?;
    let t_hat = score_statistic(&r.eps, &w_values)?;
    let sigma_n2 = variance_estimate(&r.eps, &w_values, &w_smoothed)?;
    if !(sigma_n2 > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let t_bar = t_hat / libm::sqrt(sigma_n2);
    let p_value = (2.0 * special::normal_sf(t_bar.abs())).min(1.0);
    Ok(ScoreReport {
        weight: w.label(),
        t_hat,
        sigma_n2,
        t_bar,
        critical_value: special::normal_quantile(1.0 - alpha / 2.0),
        p_value,
        reject: p_value <= alpha,
        alpha,
        h: cfg.h,
        empty_windows: r.smoother.empty_windows(),
    })
}

/// Maximin test `T̂ᵀ Σ_n^{-1} T̂ ≥ c_α` over a family of weights. Complex
/// weights contribute their real and imaginary parts as two components.
pub fn maximin_test(
    data: &Dataset,
    fit: &IndexFit,
    s_specs: &[WeightSpec],
    cfg: &SmootherConfig,
    alpha: f64,
) -> Result<MaximinReport> {
    check_alpha(alpha)?;
    let specs: Vec<WeightSpec> = s_specs
        .iter()
        .flat_map(WeightSpec::real_components)
        .collect();
    if specs.is_empty() {
        return Err(Error::Empty("weight family"));
    }
    let d = specs.len();
    let r = Residualized::new(data, fit, cfg)?;
    let mut s_values = Vec::with_capacity(d);
    let mut s_smoothed = Vec::with_capacity(d);
    let mut t_vec = Vec::with_capacity(d);
    for spec in &specs {
        let v = spec.evaluate(data)?;
        t_vec.push(score_statistic(&r.eps, &v)?);
        s_smoothed.push(r.smoother.smooth(&v)?);
        s_values.push(v);
    }
    let sigma_mat = covariance_matrix(&r.eps, &s_values, &s_smoothed)?;
    let statistic = factored_quadratic_form(&r.eps, &s_values, &s_smoothed, &sigma_mat, &t_vec)?;
    let c_alpha = special::chi2_quantile(1.0 - alpha, d);
    Ok(MaximinReport {
        weights: specs.iter().map(WeightSpec::label).collect(),
        t_vec,
        sigma_mat,
        statistic,
        c_alpha,
        p_value: special::chi2_sf(statistic, d),
        reject: statistic >= c_alpha,
        alpha,
        d,
        h: cfg.h,
        empty_windows: r.smoother.empty_windows(),
    })
}

/// `tᵀ Σ^{-1} t` via Cholesky, after rejecting ill-conditioned `Σ`.
pub fn quadratic_form(sigma: &[Vec<f64>], t: &[f64]) -> Result<f64> {
    let d = t.len();
    check_len("covariance rows", d, sigma.len())?;
    let m = DMatrix::from_fn(d, d, |i, j| sigma[i][j]);
    let eig = m.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        let (first, second) = most_dependent_pair(sigma);
        return Err(Error::NearSingularCovariance {
            condition,
            first,
            second,
        });
    }
    let chol = m.cholesky().ok_or(Error::NearSingularCovariance {
        condition,
        first: 0,
        second: 0,
    })?;
    let tv = DVector::from_column_slice(t);
    let x = chol.solve(&tv);
    Ok(tv.dot(&x).max(0.0))
}

// Same value as `quadratic_form(Σ_n, t)`, but from the SVD of `B` with
// `Σ_n = BᵀB`, `B_ki = ε̂_k [s_i - s̄_i^{(k)}] / √n`. Rounding then grows with
// cond(B) = √cond(Σ_n) instead of cond(Σ_n).
fn factored_quadratic_form(
    eps_hat: &[f64],
    s_values: &[Vec<f64>],
    s_smoothed: &[Vec<f64>],
    sigma: &[Vec<f64>],
    t: &[f64],
) -> Result<f64> {
    let n = eps_hat.len();
    let d = t.len();
    let root_n = libm::sqrt(n as f64);
    let b = DMatrix::from_fn(n, d, |k, i| {
        eps_hat[k] * (s_values[i][k] - s_smoothed[i][k]) / root_n
    });
    let svd = b.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::NearSingularCovariance {
        condition: f64::INFINITY,
        first: 0,
        second: 0,
    })?;
    let sv = &svd.singular_values;
    let (lo, hi) = (sv.min(), sv.max());
    let condition = if lo > 0.0 {
        (hi / lo) * (hi / lo)
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        let (first, second) = most_dependent_pair(sigma);
        return Err(Error::NearSingularCovariance {
            condition,
            first,
            second,
        });
    }
    let tv = DVector::from_column_slice(t);
    Ok((0..d)
        .map(|i| {
            let z = v_t.row(i).transpose().dot(&tv) / sv[i];
            z * z
        })
        .sum())
}

// Pair with the largest absolute correlation; a zero-variance weight is
// reported paired with itself.
fn most_dependent_pair(sigma: &[Vec<f64>]) -> (usize, usize) {
    let d = sigma.len();
    if let Some(i) = (0..d).find(|&i| !(sigma[i][i] > 0.0)) {
        return (i, i);
    }
    let mut best = (0, 0, -1.0);
    for i in 0..d {
        for j in i + 1..d {
            let c = (sigma[i][j] / libm::sqrt(sigma[i][i] * sigma[j][j])).abs();
            if c > best.2 {
                best = (i, j, c);
            }
        }
    }
    (best.0, best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn statistic_examples() {
        assert_eq!(score_statistic(&[1.0, -1.0, 0.0], &[1.0; 3]).unwrap(), 0.0);
        assert_eq!(score_statistic(&[2.0], &[3.0]).unwrap(), 6.0);
        assert_eq!(score_statistic(&[1.0; 4], &[1.0; 4]).unwrap(), 2.0);
        assert!(score_statistic(&[1.0; 2], &[1.0; 3]).is_err());
    }

    #[test]
    fn variance_examples() {
        assert_eq!(
            variance_estimate(&[0.0; 3], &[1.0, 2.0, 3.0], &[0.0; 3]).unwrap(),
            0.0
        );
        assert_eq!(
            variance_estimate(&[1.0, 2.0], &[4.0, 5.0], &[4.0, 5.0]).unwrap(),
            0.0
        );
        assert_eq!(variance_estimate(&[2.0], &[3.0], &[1.0]).unwrap(), 16.0);
        assert!(variance_estimate(&[1.0], &[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn covariance_examples() {
        let eps = [1.0, -2.0, 0.5];
        let s1 = vec![1.0, 2.0, 3.0];
        let b1 = vec![0.5, 0.5, 0.5];
        let s2 = vec![-1.0, 0.0, 4.0];
        let b2 = vec![0.0, 1.0, 2.0];
        let m =
            covariance_matrix(&eps, &[s1.clone(), s2.clone()], &[b1.clone(), b2.clone()]).unwrap();
        // hand computation: centered c1 = (0.5, 1.5, 2.5), c2 = (-1, -1, 2), ε² = (1, 4, 0.25)
        let s11 = (0.25 + 4.0 * 2.25 + 0.25 * 6.25) / 3.0;
        let s12 = (-0.5 + 4.0 * -1.5 + 0.25 * 5.0) / 3.0;
        let s22 = (1.0 + 4.0 + 0.25 * 4.0) / 3.0;
        assert_abs_diff_eq!(m[0][0], s11, epsilon = 1e-15);
        assert_abs_diff_eq!(m[0][1], s12, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][1], s22, epsilon = 1e-15);
        assert_eq!(m[0][1], m[1][0]);

        let one = covariance_matrix(&eps, core::slice::from_ref(&s1), core::slice::from_ref(&b1))
            .unwrap();
        assert_eq!(one[0][0], variance_estimate(&eps, &s1, &b1).unwrap());

        let zero = covariance_matrix(&[0.0; 3], &[s1, s2], &[b1, b2]).unwrap();
        assert_eq!(zero, vec![vec![0.0; 2]; 2]);
    }

    #[test]
    fn quadratic_form_cases() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_abs_diff_eq!(
            quadratic_form(&id, &[1.0, 1.0]).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(
            quadratic_form(&singular, &[1.0, 1.0]),
            Err(Error::NearSingularCovariance {
                first: 0,
                second: 1,
                ..
            })
        ));
        let zero_var = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        assert!(matches!(
            quadratic_form(&zero_var, &[1.0, 1.0, 1.0]),
            Err(Error::NearSingularCovariance {
                first: 1,
                second: 1,
                ..
            })
        ));
    }

    #[test]
    fn alpha_validation() {
        assert!(check_alpha(0.05).is_ok());
        assert!(check_alpha(1.5).is_err());
        assert!(check_alpha(0.0).is_err());
    }
}
