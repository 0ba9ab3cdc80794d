//! Empirical size and power by repeated simulation.

use rayon::prelude::*;
use serde::Serialize;
use sitest_core::{run_test, Dataset, Scenario, TestSpec};
use thiserror::Error;

/// Anything that can be run on one simulated dataset and either reject or not.
pub trait ReplicateTest: Sync {
    fn rejects(&self, data: &Dataset, replicate: u64) -> sitest_core::Result<bool>;
}

impl ReplicateTest for TestSpec {
    fn rejects(&self, data: &Dataset, replicate: u64) -> sitest_core::Result<bool> {
        let spec = self.clone().with_seed(replicate_seed(self, replicate));
        Ok(run_test(data, &spec)?.outcome.reject())
    }
}

/// Bootstrap seed for replicate `r`, derived from the configured seed so
/// replicates never share multiplier streams.
pub fn replicate_seed(spec: &TestSpec, r: u64) -> u64 {
    let base = match spec.kind {
        sitest_core::TestKind::Omnibus { seed, .. } => seed,
        _ => 0,
    };
    splitmix64(base ^ splitmix64(r))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tally {
    pub replications: u64,
    pub rejections: u64,
    pub rejection_rate: f64,
    /// `√(r(1-r)/reps)`.
    pub mc_stderr: f64,
}

impl Tally {
    pub fn new(replications: u64, rejections: u64) -> Self {
        let r = rejections as f64 / replications as f64;
        Self {
            replications,
            rejections,
            rejection_rate: r,
            mc_stderr: (r * (1.0 - r) / replications as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub scenario: Scenario,
    pub test: TestSpec,
    #[serde(flatten)]
    pub tally: Tally,
}

#[derive(Debug, Error)]
pub enum McError {
    #[error("replications must be at least 1")]
    NoReplications,
    #[error("invalid scenario: {0}")]
    Scenario(sitest_core::Error),
    #[error("replicate {replicate} of {model} scenario (n={n}, seed={seed}): {source}")]
    Replicate {
        replicate: u64,
        model: &'static str,
        n: usize,
        seed: u64,
        source: sitest_core::Error,
    },
}

/// Runs `test` on replicates `0..reps` of `scn` in parallel on the current
/// rayon pool. The first failing replicate (by index) aborts the run.
pub fn tally(scn: &Scenario, test: &impl ReplicateTest, reps: u64) -> Result<Tally, McError> {
    if reps == 0 {
        return Err(McError::NoReplications);
    }
    scn.validate().map_err(McError::Scenario)?;
    let outcomes: Vec<_> = (0..reps)
        .into_par_iter()
        .map(|r| scn.generate(r).and_then(|d| test.rejects(&d, r)))
        .collect();
    let mut rejections = 0;
    for (r, outcome) in (0..reps).zip(outcomes) {
        match outcome {
            Ok(rejected) => rejections += u64::from(rejected),
            Err(source) => {
                return Err(McError::Replicate {
                    replicate: r,
                    model: scn.model.name(),
                    n: scn.n,
                    seed: scn.seed,
                    source,
                })
            }
        }
    }
    Ok(Tally::new(reps, rejections))
}

pub fn monte_carlo(scn: &Scenario, spec: &TestSpec, reps: u64) -> Result<McResult, McError> {
    Ok(McResult {
        scenario: scn.clone(),
        test: spec.clone(),
        tally: tally(scn, spec, reps)?,
    })
}
