use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use sitest::batch::{parse_batch, run_jobs, write_csv};
use sitest::report::{run_check, RunConfig, Source};
use sitest::{write_dataset, TestOptions};
use sitest_core::Scenario;

#[derive(Debug, Parser)]
#[command(
    name = "sitest",
    version,
    about = "Rank-based checks of single-index regression models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test one dataset and write a JSON report.
    Check(CheckArgs),
    /// Run a batch of Monte Carlo size/power studies and write CSV.
    Simulate(SimulateArgs),
    /// Write one simulated dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "scenario"])))]
struct CheckArgs {
    /// CSV with a header row and a `y` column.
    #[arg(long)]
    input: Option<PathBuf>,
    /// JSON scenario to simulate instead of reading a file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Which replicate of the scenario to draw.
    #[arg(long, default_value_t = 0, requires = "scenario")]
    replicate: u64,
    #[command(flatten)]
    options: TestOptions,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON Lines batch file.
    #[arg(long)]
    batch: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    #[arg(long)]
    out: PathBuf,
}

fn read_scenario(path: &PathBuf) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scn: Scenario = serde_json::from_str(&text)
        .with_context(|| format!("parsing scenario {}", path.display()))?;
    scn.validate()
        .with_context(|| format!("scenario {}", path.display()))?;
    Ok(scn)
}

fn check(args: CheckArgs) -> Result<()> {
    let spec = args
        .options
        .to_spec()
        .context("invalid test configuration")?;
    let source = match (args.input, args.scenario) {
        (Some(path), _) => Source::Input(path),
        (None, Some(path)) => Source::Scenario {
            scenario: read_scenario(&path)?,
            replicate: args.replicate,
        },
        (None, None) => unreachable!("clap requires a source"),
    };
    let report = run_check(&RunConfig { source, spec })?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => {
            fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?
        }
        None => writeln!(std::io::stdout(), "{json}")?,
    }
    eprintln!("{}", report.summary());
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.batch)
        .with_context(|| format!("reading {}", args.batch.display()))?;
    let jobs = parse_batch(&text)?;
    let rows = run_jobs(&jobs, args.threads)?;
    let file =
        fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(&rows, file)?;
    eprintln!(
        "{} batch entries written to {}",
        rows.len(),
        args.out.display()
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let scn = read_scenario(&args.scenario)?;
    let data = scn.generate(args.replicate)?;
    write_dataset(&args.out, &data)?;
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Check(args) => check(args),
        Command::Simulate(args) => simulate(args),
        Command::Generate(args) => generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
