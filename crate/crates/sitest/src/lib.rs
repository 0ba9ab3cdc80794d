//! File formats, reports, the Monte Carlo harness and the `sitest` command
//! line built on [`sitest_core`].

pub mod batch;
pub mod io;
pub mod montecarlo;
pub mod options;
pub mod report;

pub use io::{load_dataset, write_dataset, DataError};
pub use montecarlo::{monte_carlo, tally, McError, McResult, ReplicateTest, Tally};
pub use options::{HArg, TestName, TestOptions};
pub use report::{run_check, Report, RunConfig, Source};
