//! End-to-end check: direction estimate, ranks, bandwidth, residuals, test.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bandwidth::{select_bandwidth, BandwidthChoice, BandwidthSelection};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::index::IndexFit;
use crate::omnibus::{omnibus_test, BootstrapConfig, GammaGrid, GridConfig, OmnibusReport};
use crate::score::{check_alpha, maximin_test, standardized_test, MaximinReport, ScoreReport};
use crate::smoother::SmootherConfig;
use crate::weight::WeightSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum TestKind {
    Score {
        weight: WeightSpec,
    },
    Maximin {
        weights: Vec<WeightSpec>,
    },
    Omnibus {
        grid: GridConfig,
        m: usize,
        seed: u64,
        /// Weight in the bandwidth criterion.
        mise_weight: WeightSpec,
    },
}

impl TestKind {
    pub fn name(&self) -> &'static str {
        match self {
            TestKind::Score { .. } => "score",
            TestKind::Maximin { .. } => "maximin",
            TestKind::Omnibus { .. } => "omnibus",
        }
    }

    pub fn omnibus(m: usize, seed: u64) -> Self {
        TestKind::Omnibus {
            grid: GridConfig::default(),
            m,
            seed,
            mise_weight: WeightSpec::SumSquares,
        }
    }

    /// Weight used by the bandwidth criterion.
    pub fn mise_weight(&self) -> Result<WeightSpec> {
        match self {
            TestKind::Score { weight } => Ok(weight.clone()),
            TestKind::Maximin { weights } => weights
                .first()
                .and_then(|w| w.real_components().into_iter().next())
                .ok_or(Error::Empty("weight family")),
            TestKind::Omnibus { mise_weight, .. } => Ok(mise_weight.clone()),
        }
    }

    pub fn weight_labels(&self) -> Vec<String> {
        match self {
            TestKind::Score { weight } => alloc::vec![weight.label()],
            TestKind::Maximin { weights } => weights.iter().map(WeightSpec::label).collect(),
            TestKind::Omnibus { .. } => alloc::vec![String::from("cf")],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub kind: TestKind,
    pub alpha: f64,
    pub bandwidth: BandwidthChoice,
}

impl TestSpec {
    pub fn new(kind: TestKind, alpha: f64) -> Self {
        Self {
            kind,
            alpha,
            bandwidth: BandwidthChoice::default(),
        }
    }

    pub fn with_bandwidth(mut self, bandwidth: BandwidthChoice) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    /// Replaces the bootstrap seed (no effect on normal/chi-square tests).
    pub fn with_seed(mut self, new_seed: u64) -> Self {
        if let TestKind::Omnibus { seed, .. } = &mut self.kind {
            *seed = new_seed;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if let BandwidthChoice::Fixed(h) = self.bandwidth {
            SmootherConfig::new(h)?;
        }
        match &self.kind {
            TestKind::Score { weight } if weight.is_complex() => {
                Err(Error::ComplexWeight(weight.label()))
            }
            TestKind::Maximin { weights } if weights.is_empty() => {
                Err(Error::Empty("weight family"))
            }
            TestKind::Omnibus { m, seed, .. } => BootstrapConfig {
                m: *m,
                alpha: self.alpha,
                seed: *seed,
            }
            .validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum TestOutcome {
    Score(ScoreReport),
    Maximin(MaximinReport),
    Omnibus(OmnibusReport),
}

impl TestOutcome {
    pub fn reject(&self) -> bool {
        match self {
            TestOutcome::Score(r) => r.reject,
            TestOutcome::Maximin(r) => r.reject,
            TestOutcome::Omnibus(r) => r.reject,
        }
    }

    pub fn p_value(&self) -> f64 {
        match self {
            TestOutcome::Score(r) => r.p_value,
            TestOutcome::Maximin(r) => r.p_value,
            TestOutcome::Omnibus(r) => r.p_value,
        }
    }

    /// `T̄_n`, `T̂ᵀΣ_n^{-1}T̂` or `T̃_n`.
    pub fn statistic(&self) -> f64 {
        match self {
            TestOutcome::Score(r) => r.t_bar,
            TestOutcome::Maximin(r) => r.statistic,
            TestOutcome::Omnibus(r) => r.t_tilde,
        }
    }

    pub fn critical_value(&self) -> f64 {
        match self {
            TestOutcome::Score(r) => r.critical_value,
            TestOutcome::Maximin(r) => r.c_alpha,
            TestOutcome::Omnibus(r) => r.critical_value,
        }
    }

    pub fn calibration(&self) -> String {
        match self {
            TestOutcome::Score(_) => String::from("normal"),
            TestOutcome::Maximin(r) => format!("chi-square(d={})", r.d),
            TestOutcome::Omnibus(r) => format!("bootstrap(m={})", r.m),
        }
    }

    /// Number of components: 1 for the scalar tests, `d` for maximin.
    pub fn dimension(&self) -> usize {
        match self {
            TestOutcome::Maximin(r) => r.d,
            _ => 1,
        }
    }

    pub fn empty_windows(&self) -> usize {
        match self {
            TestOutcome::Score(r) => r.empty_windows,
            TestOutcome::Maximin(r) => r.empty_windows,
            TestOutcome::Omnibus(r) => r.empty_windows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRun {
    pub beta_hat: Vec<f64>,
    pub h: f64,
    /// Present when the bandwidth was selected from data.
    pub selection: Option<BandwidthSelection>,
    pub outcome: TestOutcome,
}

/// Runs the complete check on `data`.
pub fn run_test(data: &Dataset, spec: &TestSpec) -> Result<TestRun> {
    spec.validate()?;
    let fit = IndexFit::estimate(data)?;
    let (h, selection) = match spec.bandwidth {
        BandwidthChoice::Fixed(h) => (h, None),
        BandwidthChoice::Auto(bounds) => {
            let w = spec.kind.mise_weight()?.evaluate(data)?;
            let sel = select_bandwidth(data, &fit, &w, &bounds.grid(data.n())?)?;
            (sel.h_final, Some(sel))
        }
    };
    let cfg = SmootherConfig::new(h)?;
    let outcome = match &spec.kind {
        TestKind::Score { weight } => {
            TestOutcome::Score(standardized_test(data, &fit, weight, &cfg, spec.alpha)?)
        }
        TestKind::Maximin { weights } => {
            TestOutcome::Maximin(maximin_test(data, &fit, weights, &cfg, spec.alpha)?)
        }
        TestKind::Omnibus { grid, m, seed, .. } => {
            let grid = GammaGrid::build(data.p(), grid)?;
            let boot = BootstrapConfig {
                m: *m,
                alpha: spec.alpha,
                seed: *seed,
            };
            TestOutcome::Omnibus(omnibus_test(data, &fit, &cfg, &grid, &boot)?)
        }
    };
    Ok(TestRun {
        beta_hat: fit.beta_hat,
        h,
        selection,
        outcome,
    })
}
