//! Simulation campaigns: a JSON Lines batch file in, one CSV row per entry out.
//!
//! Each non-blank line that does not start with `#` holds
//!
//! ```json
//! {"scenario": {"model": "continuous", "c": 0.0, "n": 50, "p": 2, "seed": 1},
//!  "options": {"test": "score", "weight": "sumabs"}, "reps": 500}
//! ```
//!
//! (on one line). `options` takes the same fields as the `check` flags.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sitest_core::{BandwidthChoice, Model, Scenario, TestKind, TestSpec};
use thiserror::Error;

use crate::montecarlo::{monte_carlo, McError};
use crate::options::TestOptions;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchEntry {
    pub scenario: Scenario,
    #[serde(default)]
    pub options: TestOptions,
    pub reps: u64,
}

/// A parsed entry together with its resolved test and source line.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub line: usize,
    pub scenario: Scenario,
    pub spec: TestSpec,
    pub reps: u64,
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("batch line {line}: {message}")]
    Entry { line: usize, message: String },
    #[error("batch line {line}: {source}")]
    Run { line: usize, source: McError },
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub fn parse_batch(text: &str) -> Result<Vec<Job>, BatchError> {
    let mut jobs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = |message: String| BatchError::Entry { line, message };
        let entry: BatchEntry = serde_json::from_str(trimmed).map_err(|e| bad(e.to_string()))?;
        entry.scenario.validate().map_err(|e| bad(e.to_string()))?;
        let spec = entry.options.to_spec().map_err(|e| bad(e.to_string()))?;
        if entry.reps == 0 {
            return Err(bad("reps must be at least 1".into()));
        }
        jobs.push(Job {
            line,
            scenario: entry.scenario,
            spec,
            reps: entry.reps,
        });
    }
    Ok(jobs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub line: usize,
    pub model: &'static str,
    pub n: usize,
    pub p: usize,
    /// `c`, or `c1;c2;c3` for the interaction model.
    pub c: String,
    pub sigma_eps: Option<f64>,
    pub scenario_seed: u64,
    pub test: &'static str,
    pub weights: String,
    pub alpha: f64,
    pub h: String,
    pub boot_m: Option<usize>,
    pub boot_seed: Option<u64>,
    pub replications: u64,
    pub rejections: u64,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
}

fn row(job: &Job, rejections: u64, rate: f64, stderr: f64) -> Row {
    let (c, sigma_eps) = match &job.scenario.model {
        Model::Continuous { c } | Model::Binary { c } => (c.to_string(), None),
        Model::Interaction { c } => (c.map(|v| v.to_string()).join(";"), None),
        Model::Xltz { c, sigma_eps } => (c.to_string(), Some(*sigma_eps)),
    };
    let (boot_m, boot_seed) = match job.spec.kind {
        TestKind::Omnibus { m, seed, .. } => (Some(m), Some(seed)),
        _ => (None, None),
    };
    Row {
        line: job.line,
        model: job.scenario.model.name(),
        n: job.scenario.n,
        p: job.scenario.p,
        c,
        sigma_eps,
        scenario_seed: job.scenario.seed,
        test: job.spec.kind.name(),
        weights: job.spec.kind.weight_labels().join(" "),
        alpha: job.spec.alpha,
        h: match job.spec.bandwidth {
            BandwidthChoice::Auto(_) => "auto".into(),
            BandwidthChoice::Fixed(h) => h.to_string(),
        },
        boot_m,
        boot_seed,
        replications: job.reps,
        rejections,
        rejection_rate: rate,
        mc_stderr: stderr,
    }
}

/// Runs every job on a pool of `threads` workers (0 means rayon's default).
pub fn run_jobs(jobs: &[Job], threads: usize) -> Result<Vec<Row>, BatchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    pool.install(|| {
        jobs.iter()
            .map(|job| {
                let res = monte_carlo(&job.scenario, &job.spec, job.reps).map_err(|source| {
                    BatchError::Run {
                        line: job.line,
                        source,
                    }
                })?;
                let t = res.tally;
                Ok(row(job, t.rejections, t.rejection_rate, t.mc_stderr))
            })
            .collect()
    })
}

/// CSV with a header row; an empty slice gives the header alone.
pub fn write_csv(rows: &[Row], writer: impl Write) -> Result<(), BatchError> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    wtr.write_record(HEADER)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

const HEADER: [&str; 17] = [
    "line",
    "model",
    "n",
    "p",
    "c",
    "sigma_eps",
    "scenario_seed",
    "test",
    "weights",
    "alpha",
    "h",
    "boot_m",
    "boot_seed",
    "replications",
    "rejections",
    "rejection_rate",
    "mc_stderr",
];
