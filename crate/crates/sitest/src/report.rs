//! The `check` pipeline and its JSON report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sitest_core::{run_test, BandwidthSelection, Dataset, Scenario, TestOutcome, TestSpec};
use thiserror::Error;

use crate::io::{load_dataset, DataError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where the data of a check comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Input(PathBuf),
    /// Replicate `replicate` of a simulated scenario.
    Scenario {
        scenario: Scenario,
        replicate: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub source: Source,
    pub spec: TestSpec,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("loading data: {0}")]
    Data(#[from] DataError),
    #[error("simulating scenario: {0}")]
    Simulate(sitest_core::Error),
    #[error("running {test} test: {source}")]
    Test {
        test: &'static str,
        source: sitest_core::Error,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Observations with no other point inside their kernel window.
    pub empty_windows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub config: RunConfig,
    pub test: &'static str,
    pub n: usize,
    pub p: usize,
    /// Number of weight components (`d` for maximin).
    pub d: usize,
    pub weight_kinds: Vec<String>,
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub calibration: String,
    /// Bootstrap seed, omnibus only.
    pub seed: Option<u64>,
    pub h: f64,
    pub h1: Option<f64>,
    pub bandwidth_selection: Option<BandwidthSelection>,
    pub beta_hat: Vec<f64>,
    pub diagnostics: Diagnostics,
    pub details: TestOutcome,
}

impl Report {
    /// One line that never states a decision without its p-value and calibration.
    pub fn summary(&self) -> String {
        format!(
            "{} test: statistic = {:.4}, p-value = {:.4} ({}), alpha = {}: {}",
            self.test,
            self.statistic,
            self.p_value,
            self.calibration,
            self.alpha,
            if self.reject {
                "reject the single-index model"
            } else {
                "do not reject"
            },
        )
    }
}

pub fn load(source: &Source) -> Result<Dataset, CheckError> {
    match source {
        Source::Input(path) => Ok(load_dataset(path)?),
        Source::Scenario {
            scenario,
            replicate,
        } => scenario.generate(*replicate).map_err(CheckError::Simulate),
    }
}

pub fn run_check(cfg: &RunConfig) -> Result<Report, CheckError> {
    let data = load(&cfg.source)?;
    check_dataset(&data, cfg)
}

pub fn check_dataset(data: &Dataset, cfg: &RunConfig) -> Result<Report, CheckError> {
    let test = cfg.spec.kind.name();
    let run = run_test(data, &cfg.spec).map_err(|source| CheckError::Test { test, source })?;
    let seed = match &run.outcome {
        TestOutcome::Omnibus(r) => Some(r.seed),
        _ => None,
    };
    Ok(Report {
        version: VERSION,
        config: cfg.clone(),
        test,
        n: data.n(),
        p: data.p(),
        d: run.outcome.dimension(),
        weight_kinds: cfg.spec.kind.weight_labels(),
        statistic: run.outcome.statistic(),
        critical_value: run.outcome.critical_value(),
        p_value: run.outcome.p_value(),
        alpha: cfg.spec.alpha,
        reject: run.outcome.reject(),
        calibration: run.outcome.calibration(),
        seed,
        h: run.h,
        h1: run.selection.map(|s| s.h1),
        bandwidth_selection: run.selection,
        beta_hat: run.beta_hat,
        diagnostics: Diagnostics {
            empty_windows: run.outcome.empty_windows(),
        },
        details: run.outcome,
    })
}
