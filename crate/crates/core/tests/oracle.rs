//! Small-sample fuzzing against direct double-loop evaluation of the
//! defining sums. The oracle computes ranks and kernel values on its own.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use sitest_core::{
    cf_process, covariance_matrix, maximin_test, residuals, score_statistic, smoothed_weights,
    standardized_test, variance_estimate, Dataset, IndexFit, SmootherConfig, WeightSpec,
};

const REL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * b.abs().max(1.0)
}

fn quartic(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let v = 1.0 - u * u;
        15.0 / 16.0 * v * v
    } else {
        0.0
    }
}

struct Oracle {
    n: usize,
    u: Vec<f64>,
    h: f64,
}

impl Oracle {
    fn new(t: &[f64], h: f64) -> Self {
        let n = t.len();
        let u = t
            .iter()
            .map(|ti| t.iter().filter(|tj| *tj <= ti).count() as f64 / n as f64)
            .collect();
        Self { n, u, h }
    }

    fn loo(&self, v: &[f64], j: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            if i != j {
                s += v[i] * quartic((self.u[j] - self.u[i]) / self.h);
            }
        }
        s / ((self.n - 1) as f64 * self.h)
    }

    fn residuals(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| y[j] - self.loo(y, j)).collect()
    }

    fn smoothed(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| self.loo(w, j)).collect()
    }
}

fn sum_abs(row: &[f64]) -> f64 {
    row.iter().map(|v| v.abs()).sum()
}

fn sum_sq(row: &[f64]) -> f64 {
    row.iter().map(|v| v * v).sum()
}

#[derive(Debug, Clone)]
struct Case {
    rows: Vec<Vec<f64>>,
    y: Vec<f64>,
    beta: Vec<f64>,
    h: f64,
    gamma: Vec<f64>,
}

fn coord(ties: bool) -> BoxedStrategy<f64> {
    if ties {
        (-4i32..=4).prop_map(|k| k as f64 / 2.0).boxed()
    } else {
        (-3.0..3.0f64).boxed()
    }
}

fn case() -> impl Strategy<Value = Case> {
    (2usize..=6, 1usize..=3, any::<bool>()).prop_flat_map(|(n, p, ties)| {
        (
            prop::collection::vec(prop::collection::vec(coord(ties), p), n),
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(-2.0..2.0f64, p)
                .prop_filter("nonzero direction", |b| b.iter().any(|v| v.abs() > 1e-3)),
            0.05..=1.0f64,
            prop::collection::vec(-3.0..3.0f64, p),
        )
            .prop_map(|(rows, y, beta, h, gamma)| Case {
                rows,
                y,
                beta,
                h,
                gamma,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn defining_sums(c in case()) {
        let data = Dataset::from_rows(&c.rows, c.y.clone()).unwrap();
        let fit = IndexFit::from_direction(&data, c.beta.clone()).unwrap();
        let cfg = SmootherConfig::new(c.h).unwrap();
        let n = data.n();

        let t: Vec<f64> = c.rows.iter().map(|r| r.iter().zip(&c.beta).map(|(a, b)| a * b).sum()).collect();
        let o = Oracle::new(&t, c.h);

        let eps = residuals(&data, &fit, &cfg).unwrap();
        let eps_o = o.residuals(&c.y);
        for (a, b) in eps.iter().zip(&eps_o) {
            prop_assert!(close(*a, *b), "residual {a} vs {b}");
        }

        let w1: Vec<f64> = c.rows.iter().map(|r| sum_abs(r)).collect();
        let w2: Vec<f64> = c.rows.iter().map(|r| sum_sq(r)).collect();
        let w1_bar = smoothed_weights(&w1, &fit, &cfg).unwrap();
        let w1_bar_o = o.smoothed(&w1);
        let w2_bar_o = o.smoothed(&w2);
        for (a, b) in w1_bar.iter().zip(&w1_bar_o) {
            prop_assert!(close(*a, *b), "smoothed weight {a} vs {b}");
        }

        let t_hat_o = eps_o.iter().zip(&w1).map(|(e, w)| e * w).sum::<f64>() / (n as f64).sqrt();
        let mut s2_o = 0.0;
        for j in 0..n {
            s2_o += eps_o[j] * eps_o[j] * (w1[j] - w1_bar_o[j]) * (w1[j] - w1_bar_o[j]);
        }
        s2_o /= n as f64;
        prop_assert!(close(score_statistic(&eps, &w1).unwrap(), t_hat_o));
        prop_assert!(close(variance_estimate(&eps, &w1, &w1_bar).unwrap(), s2_o));

        // same quantities through the full test
        if s2_o > 1e-9 {
            let rep = standardized_test(&data, &fit, &WeightSpec::SumAbs, &cfg, 0.05).unwrap();
            prop_assert!(close(rep.t_hat, t_hat_o));
            prop_assert!(close(rep.sigma_n2, s2_o));
        }

        let cols = [&w1, &w2];
        let bars = [&w1_bar_o, &w2_bar_o];
        let mut sigma_o = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for k in 0..n {
                    s += eps_o[k] * eps_o[k] * (cols[a][k] - bars[a][k]) * (cols[b][k] - bars[b][k]);
                }
                sigma_o[a][b] = s / n as f64;
            }
        }
        let w2_bar = smoothed_weights(&w2, &fit, &cfg).unwrap();
        let sigma = covariance_matrix(&eps, &[w1.clone(), w2.clone()], &[w1_bar, w2_bar]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                prop_assert!(close(sigma[a][b], sigma_o[a][b]), "sigma[{a}][{b}]");
            }
        }
        let family = [WeightSpec::SumAbs, WeightSpec::SumSquares];
        if let Ok(rep) = maximin_test(&data, &fit, &family, &cfg, 0.05) {
            for a in 0..2 {
                for b in 0..2 {
                    prop_assert!(close(rep.sigma_mat[a][b], sigma_o[a][b]));
                }
            }
        }

        let (mut re, mut im) = (0.0, 0.0);
        for (e, r) in eps_o.iter().zip(&c.rows) {
            let arg: f64 = r.iter().zip(&c.gamma).map(|(x, g)| x * g).sum();
            re += e * arg.cos();
            im += e * arg.sin();
        }
        let scale = (n as f64).sqrt();
        let z = cf_process(&eps, data.x(), &c.gamma).unwrap();
        prop_assert!(close(z.re, re / scale) && close(z.im, im / scale), "T(γ) {z} vs {re},{im}");
    }
}
