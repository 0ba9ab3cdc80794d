//! Data generators for the simulation models.
//!
//! Every model draws `X ~ N(0, I_p)`. Replicate `r` of a scenario uses the
//! ChaCha20 stream `r` under the scenario seed, so datasets do not depend on
//! how replicates are scheduled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::weight::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// `Y = (βᵀX)³ + c Σ|x_l| + ε`, `ε ~ N(0, 1)`.
    Continuous { c: f64 },
    /// `P(Y = 1 | x) = logistic(-βᵀx + c Σ|x_l|)`.
    Binary { c: f64 },
    /// `Y = (βᵀX)³ + c₁|x₁x₂| + c₂|x₁x₃| + c₃|x₂x₃| + ε`, `p = 3`.
    Interaction { c: [f64; 3] },
    /// `Y = x₁ + x₂ + 4 exp(-(x₁+x₂)²) + c ‖x‖ + ε`, `ε ~ N(0, σ²)`, `p = 2`.
    Xltz { c: f64, sigma_eps: f64 },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Continuous { .. } => "continuous",
            Model::Binary { .. } => "binary",
            Model::Interaction { .. } => "interaction",
            Model::Xltz { .. } => "xltz",
        }
    }

    /// True when the single-index null holds.
    pub fn is_null(&self) -> bool {
        match self {
            Model::Continuous { c } | Model::Binary { c } | Model::Xltz { c, .. } => *c == 0.0,
            Model::Interaction { c } => c.iter().all(|v| *v == 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub model: Model,
    pub n: usize,
    pub p: usize,
    /// Defaults to `(1, -1, 1, ...)/√p`; ignored by [`Model::Xltz`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Noise {
    Gaussian,
    /// Test hook: no additive error term.
    #[cfg_attr(not(test), allow(dead_code))]
    Zero,
}

impl Scenario {
    pub fn new(model: Model, n: usize, p: usize, seed: u64) -> Self {
        Self {
            model,
            n,
            p,
            beta: None,
            seed,
        }
    }

    /// Direction of the index under the null.
    pub fn beta(&self) -> Vec<f64> {
        if let Model::Xltz { .. } = self.model {
            let s = core::f64::consts::FRAC_1_SQRT_2;
            return vec![s, s];
        }
        match &self.beta {
            Some(b) => b.clone(),
            None => {
                let s = 1.0 / libm::sqrt(self.p as f64);
                (0..self.p)
                    .map(|l| if l % 2 == 0 { s } else { -s })
                    .collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidConfig(
                "scenario needs n ≥ 1 and p ≥ 1".into(),
            ));
        }
        match &self.model {
            Model::Interaction { .. } if self.p != 3 => {
                return Err(Error::InvalidConfig(format!(
                    "interaction model needs p = 3, got {}",
                    self.p
                )))
            }
            Model::Xltz { sigma_eps, .. } => {
                if self.p != 2 {
                    return Err(Error::InvalidConfig(format!(
                        "xltz model needs p = 2, got {}",
                        self.p
                    )));
                }
                if !(*sigma_eps >= 0.0) || !sigma_eps.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "sigma_eps must be ≥ 0, got {sigma_eps}"
                    )));
                }
            }
            _ => {}
        }
        if let (Some(b), false) = (&self.beta, matches!(self.model, Model::Xltz { .. })) {
            if b.len() != self.p {
                return Err(Error::LengthMismatch {
                    what: "beta",
                    expected: self.p,
                    actual: b.len(),
                });
            }
            let norm = libm::sqrt(b.iter().map(|v| v * v).sum::<f64>());
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "beta must have unit norm, got {norm}"
                )));
            }
        }
        Ok(())
    }

    /// Dataset for replicate `replicate`.
    pub fn generate(&self, replicate: u64) -> Result<Dataset> {
        self.generate_with(replicate, Noise::Gaussian)
    }

    pub(crate) fn generate_with(&self, replicate: u64, noise: Noise) -> Result<Dataset> {
        self.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate);
        let beta = self.beta();
        let (n, p) = (self.n, self.p);
        let mut x = Vec::with_capacity(n * p);
        let mut y = Vec::with_capacity(n);
        let gauss = |rng: &mut ChaCha20Rng| -> f64 { StandardNormal.sample(rng) };
        for _ in 0..n {
            let start = x.len();
            for _ in 0..p {
                x.push(gauss(&mut rng));
            }
            let row = &x[start..];
            let yi = match &self.model {
                Model::Continuous { c } => {
                    continuous_mean(row, &beta, *c) + additive(&mut rng, noise, 1.0)
                }
                Model::Interaction { c } => {
                    interaction_mean(row, &beta, *c) + additive(&mut rng, noise, 1.0)
                }
                Model::Xltz { c, sigma_eps } => {
                    xltz_mean(row, *c) + additive(&mut rng, noise, *sigma_eps)
                }
                Model::Binary { c } => bernoulli(&mut rng, binary_probability(row, &beta, *c)),
            };
            y.push(yi);
        }
        Dataset::new(x, y, p)
    }
}

fn additive(rng: &mut ChaCha20Rng, noise: Noise, sd: f64) -> f64 {
    match noise {
        Noise::Gaussian => {
            let e: f64 = StandardNormal.sample(rng);
            sd * e
        }
        Noise::Zero => 0.0,
    }
}

pub(crate) fn bernoulli<R: Rng + ?Sized>(rng: &mut R, prob: f64) -> f64 {
    if rng.random::<f64>() < prob {
        1.0
    } else {
        0.0
    }
}

fn sum_abs(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

pub fn continuous_mean(x: &[f64], beta: &[f64], c: f64) -> f64 {
    let t = dot(beta, x);
    t * t * t + c * sum_abs(x)
}

pub fn binary_probability(x: &[f64], beta: &[f64], c: f64) -> f64 {
    logistic(-dot(beta, x) + c * sum_abs(x))
}

pub fn interaction_mean(x: &[f64], beta: &[f64], c: [f64; 3]) -> f64 {
    let t = dot(beta, x);
    t * t * t + c[0] * (x[0] * x[1]).abs() + c[1] * (x[0] * x[2]).abs() + c[2] * (x[1] * x[2]).abs()
}

pub fn xltz_mean(x: &[f64], c: f64) -> f64 {
    let s = x[0] + x[1];
    s + 4.0 * libm::exp(-s * s) + c * libm::hypot(x[0], x[1])
}
