//! Direction estimation and rank transform of the projected covariates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// A fitted index: unit-norm direction, projections `β̂ᵀX_i` and their
/// normalized ranks `Û_i = F_n(β̂ᵀX_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexFit {
    pub beta_hat: Vec<f64>,
    pub projections: Vec<f64>,
    pub ranks_u: Vec<f64>,
    /// `#{j : t_j ≤ t_i}`, the integer numerators of `ranks_u`.
    #[serde(skip)]
    pub rank_counts: Vec<usize>,
}

impl IndexFit {
    /// Least-squares direction followed by projection and ranking.
    pub fn estimate(data: &Dataset) -> Result<Self> {
        let beta = fit_index_ols(data)?;
        Self::from_direction(data, beta)
    }

    /// Uses a given direction as is (no normalization).
    pub fn from_direction(data: &Dataset, beta: Vec<f64>) -> Result<Self> {
        let projections = project(data, &beta)?;
        let rank_counts = rank_counts(&projections)?;
        let n = projections.len() as f64;
        let ranks_u = rank_counts.iter().map(|&c| c as f64 / n).collect();
        Ok(Self {
            beta_hat: beta,
            projections,
            ranks_u,
            rank_counts,
        })
    }

    pub fn n(&self) -> usize {
        self.ranks_u.len()
    }
}

/// Least-squares regression of `Y` on `(1, X)`; the slope vector is
/// normalized to unit length with its first non-negligible entry positive.
pub fn fit_index_ols(data: &Dataset) -> Result<Vec<f64>> {
    let n = data.n();
    let p = data.p();
    if n <= p + 1 {
        return Err(Error::InsufficientData(format!(
            "least squares with intercept needs n > p + 1 (n = {n}, p = {p})"
        )));
    }
    let design = DMatrix::from_fn(
        n,
        p + 1,
        |i, k| if k == 0 { 1.0 } else { data.row(i)[k - 1] },
    );
    let y = DVector::from_column_slice(data.y());

    let qr = design.qr();
    let r = qr.r();
    let max_diag = (0..=p).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..=p).any(|k| r[(k, k)].abs() <= 1e-10 * max_diag) {
        return Err(Error::SingularDesign);
    }
    let qty = qr.q().tr_mul(&y);
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularDesign)?;
    let mut slope: Vec<f64> = coef.iter().skip(1).copied().collect();

    // A zero slope leaves only rounding noise; judge it against the scale of Y.
    let mut x_mean = vec![0.0; p];
    for row in data.rows() {
        for (m, v) in x_mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let fitted_spread = data
        .rows()
        .map(|row| {
            row.iter()
                .zip(&x_mean)
                .zip(&slope)
                .map(|((x, m), b)| (x - m) * b)
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);
    let y_scale = data.y().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if fitted_spread <= 1e-10 * y_scale {
        return Err(Error::DegenerateDirection);
    }

    let norm = libm::sqrt(slope.iter().map(|b| b * b).sum::<f64>());
    for b in &mut slope {
        *b /= norm;
    }
    if let Some(first) = slope.iter().find(|b| b.abs() > 1e-10) {
        if *first < 0.0 {
            for b in &mut slope {
                *b = -*b;
            }
        }
    }
    Ok(slope)
}

/// `βᵀX_i` for every row.
pub fn project(data: &Dataset, beta: &[f64]) -> Result<Vec<f64>> {
    if beta.len() != data.p() {
        return Err(Error::LengthMismatch {
            what: "direction vector",
            expected: data.p(),
            actual: beta.len(),
        });
    }
    Ok(data
        .rows()
        .map(|row| row.iter().zip(beta).map(|(x, b)| x * b).sum())
        .collect())
}

fn rank_counts(t: &[f64]) -> Result<Vec<usize>> {
    if t.is_empty() {
        return Err(Error::Empty("rank transform input"));
    }
    if let Some(&v) = t.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "rank transform input",
            value: v,
        });
    }
    let n = t.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    let mut counts = vec![0usize; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && t[order[end]] == t[order[start]] {
            end += 1;
        }
        // ties share the largest position: #{j : t_j ≤ t_i}
        for &i in &order[start..end] {
            counts[i] = end;
        }
        start = end;
    }
    Ok(counts)
}

/// Empirical distribution function of `t` evaluated at each `t_i`,
/// i.e. `#{j : t_j ≤ t_i} / n`.
pub fn rank_transform(t: &[f64]) -> Result<Vec<f64>> {
    let n = t.len() as f64;
    Ok(rank_counts(t)?.into_iter().map(|c| c as f64 / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ranks_by_count() {
        assert_eq!(
            rank_transform(&[3.0, 1.0, 2.0]).unwrap(),
            vec![1.0, 1.0 / 3.0, 2.0 / 3.0]
        );
        assert_eq!(rank_transform(&[5.7]).unwrap(), vec![1.0]);
        assert_eq!(
            rank_transform(&[1.0, 1.0, 2.0]).unwrap(),
            vec![2.0 / 3.0, 2.0 / 3.0, 1.0]
        );
        assert!(matches!(rank_transform(&[]), Err(Error::Empty(_))));
        assert!(rank_transform(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn projection_examples() {
        let d = Dataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(project(&d, &[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project(&d, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(project(&d, &[1.0]).is_err());
        let d = Dataset::from_rows(&[vec![1.0, 2.0]], vec![0.0]).unwrap();
        assert_eq!(project(&d, &[3.0, -1.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn ols_exact_linear() {
        let d =
            Dataset::from_rows(&[vec![1.0], vec![2.0], vec![3.0]], vec![2.0, 4.0, 6.0]).unwrap();
        let b = fit_index_ols(&d).unwrap();
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-12);

        let rows = [
            vec![0.3, 1.2],
            vec![-1.0, 0.4],
            vec![2.2, -0.7],
            vec![0.9, 0.9],
            vec![-0.5, -1.8],
        ];
        let y = rows.iter().map(|r| r[0] - r[1]).collect();
        let d = Dataset::from_rows(&rows, y).unwrap();
        let b = fit_index_ols(&d).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(b[0], s, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], -s, epsilon = 1e-12);
    }

    #[test]
    fn ols_sign_convention() {
        let d =
            Dataset::from_rows(&[vec![1.0], vec![2.0], vec![3.0]], vec![6.0, 4.0, 2.0]).unwrap();
        assert_abs_diff_eq!(fit_index_ols(&d).unwrap()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ols_errors() {
        let d = Dataset::from_rows(&[vec![1.0], vec![2.0], vec![3.0]], vec![5.0; 3]).unwrap();
        assert_eq!(fit_index_ols(&d), Err(Error::DegenerateDirection));

        let d = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![1.0, 2.0]).unwrap();
        assert!(matches!(fit_index_ols(&d), Err(Error::InsufficientData(_))));

        // second column duplicates the first
        let rows = [
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![3.0, 3.0],
            vec![4.0, 4.0],
        ];
        let d = Dataset::from_rows(&rows, vec![1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(fit_index_ols(&d), Err(Error::SingularDesign));

        // constant column is collinear with the intercept
        let rows = [
            vec![1.0, 7.0],
            vec![2.0, 7.0],
            vec![3.0, 7.0],
            vec![4.0, 7.0],
        ];
        let d = Dataset::from_rows(&rows, vec![1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!(fit_index_ols(&d), Err(Error::SingularDesign));
    }

    proptest! {
        #[test]
        fn rank_invariances(t in proptest::collection::vec(-1e3f64..1e3, 1..40), c in 0.01f64..100.0) {
            let r = rank_transform(&t).unwrap();
            let scaled: Vec<f64> = t.iter().map(|v| v * c).collect();
            prop_assert_eq!(&rank_transform(&scaled).unwrap(), &r);
            let warped: Vec<f64> = t.iter().map(|v| libm::atan(*v) + v * v * v).collect();
            prop_assert_eq!(&rank_transform(&warped).unwrap(), &r);

            let mut sorted = t.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            if sorted.len() == t.len() {
                let n = t.len() as f64;
                let neg: Vec<f64> = t.iter().map(|v| -v).collect();
                let rn = rank_transform(&neg).unwrap();
                for (a, b) in r.iter().zip(&rn) {
                    prop_assert!((b - ((n + 1.0) / n - a)).abs() < 1e-12);
                }
                let mut counts: Vec<f64> = r.iter().map(|u| (u * n).round()).collect();
                counts.sort_by(f64::total_cmp);
                let expected: Vec<f64> = (1..=t.len()).map(|k| k as f64).collect();
                prop_assert_eq!(counts, expected);
            }
            for i in 0..t.len() {
                for j in 0..t.len() {
                    prop_assert_eq!(r[i] <= r[j], t[i] <= t[j]);
                }
            }
        }
    }
}
