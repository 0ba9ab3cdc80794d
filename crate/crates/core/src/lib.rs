//! Numerical core for testing single-index regression models
//! `Y = Φ(βᵀX) + ε` with an unspecified link `Φ`.
//!
//! The pipeline is: estimate a direction (`index`), rank-transform the
//! projected covariates, smooth the response over rank neighbours with a
//! leave-one-out kernel estimator (`smoother`), and test whether the
//! resulting residuals are orthogonal to chosen weight functions
//! (`score`, `omnibus`).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bandwidth;
pub mod data;
pub mod error;
pub mod index;
pub mod kernel;
pub mod omnibus;
pub mod pipeline;
pub mod score;
pub mod simulate;
pub mod smoother;
pub mod special;
pub mod weight;

pub use bandwidth::{default_grid, mise, select_bandwidth, BandwidthChoice, BandwidthSelection};
pub use data::Dataset;
pub use error::{Error, Result};
pub use index::{fit_index_ols, project, rank_transform, IndexFit};
pub use kernel::{kernel_weight, quartic_kernel, KernelId};
pub use omnibus::{
    bootstrap_replicate, cf_process, omnibus_test, sup_statistic, BootstrapConfig, GammaGrid,
    GridConfig, OmnibusReport,
};
pub use pipeline::{run_test, TestKind, TestOutcome, TestSpec};
pub use score::{
    covariance_matrix, maximin_test, score_statistic, standardized_test, variance_estimate,
    MaximinReport, ScoreReport,
};
pub use simulate::{Model, Scenario};
pub use smoother::{loo_smooth, residuals, smoothed_weights, LooSmoother, SmootherConfig};
pub use weight::WeightSpec;

pub use num_complex::Complex64;
