use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use facerot::exec::Execution;
use facerot_cli::experiments;
use facerot_cli::output::OutputDir;
use facerot_cli::registry::{FIELD_NAMES, PROFILE_NAMES};
use facerot_cli::spec::{Command, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "facerot",
    version,
    about = "Face-rotation exclusion process: exact checks and ensemble experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Exact identities by exhaustive enumeration
    Verify(Flags),
    /// Run an ensemble and write pairings, snapshots and counters
    Simulate(Flags),
    /// Empirical density against the continuum solution
    HydroCompare(Flags),
    /// Integrated currents against the weak-form prediction, with martingale diagnostics
    CurrentCompare(Flags),
    /// Linear response to a weak field and the stationary drift-diffusion profile
    Einstein(Flags),
    /// Hodge decomposition checks on random fields
    Hodge(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// TOML experiment file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice side
    #[arg(long)]
    n: Option<usize>,
    /// Rotation strength, with |alpha| < 1
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Final macroscopic time
    #[arg(long)]
    t: Option<f64>,
    /// Extra comparison times, comma separated
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Number of trajectories
    #[arg(long)]
    ensemble: Option<usize>,
    /// Base seed of the random number generator
    #[arg(long)]
    seed: Option<u64>,
    /// Sobolev order of the dual norm
    #[arg(long)]
    k: Option<f64>,
    /// Largest Fourier wave number of the test fields
    #[arg(long)]
    zmax: Option<i32>,
    #[arg(long, help = format!("External field: {FIELD_NAMES}"))]
    field: Option<String>,
    #[arg(long, help = format!("Initial profile: {PROFILE_NAMES}"))]
    profile: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the N=4 exhaustive checks
    #[arg(long)]
    exact_n4: bool,
    /// Corrupt the rates so every exact check must fail
    #[arg(long)]
    mutate: bool,
    /// Run trajectories on one thread
    #[arg(long)]
    sequential: bool,
}

impl Sub {
    fn split(self) -> (Command, Flags) {
        match self {
            Sub::Verify(f) => (Command::Verify, f),
            Sub::Simulate(f) => (Command::Simulate, f),
            Sub::HydroCompare(f) => (Command::HydroCompare, f),
            Sub::CurrentCompare(f) => (Command::CurrentCompare, f),
            Sub::Einstein(f) => (Command::Einstein, f),
            Sub::Hodge(f) => (Command::Hodge, f),
        }
    }
}

fn build_spec(command: Command, f: Flags) -> Result<ExperimentSpec> {
    let mut spec = match &f.config {
        Some(path) => {
            let s = ExperimentSpec::load(path)?;
            anyhow::ensure!(
                s.command == command,
                "config is for {:?} but the subcommand is {:?}",
                s.command,
                command
            );
            s
        }
        None => ExperimentSpec::defaults(command),
    };
    let sim = &mut spec.sim;
    if let Some(v) = f.n {
        sim.n = v;
    }
    if let Some(v) = f.alpha {
        sim.alpha = v;
    }
    if let Some(v) = f.t {
        sim.t = v;
    }
    if let Some(v) = f.times {
        sim.times = v;
    }
    if let Some(v) = f.ensemble {
        sim.ensemble = v;
    }
    if let Some(v) = f.seed {
        sim.seed = v;
    }
    if let Some(v) = f.field {
        sim.field = v;
    }
    if let Some(v) = f.profile {
        sim.profile = v;
    }
    if let Some(v) = f.k {
        spec.analysis.k = v;
    }
    if let Some(v) = f.zmax {
        spec.analysis.zmax = v;
    }
    if f.out.is_some() {
        spec.out = f.out;
    }
    spec.checks.exact_n4 |= f.exact_n4;
    spec.checks.mutate |= f.mutate;
    if f.sequential {
        spec.execution = Execution::Sequential;
    }
    spec.execution = spec.execution.effective();
    spec.validate()?;
    Ok(spec)
}

enum Failure {
    Usage(anyhow::Error),
    Checks,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (command, flags) = cli.command.split();
    let spec = build_spec(command, flags).map_err(Failure::Usage)?;
    let out = match &spec.out {
        Some(dir) => Some(OutputDir::create(dir, &spec).map_err(Failure::Usage)?),
        None => None,
    };
    let start = Instant::now();
    let outcome = experiments::run(&spec).map_err(Failure::Usage)?;
    let wall = start.elapsed().as_secs_f64();

    for c in &outcome.checks {
        println!("{}", c.line());
    }
    for r in &outcome.rows {
        println!("{}", r.line());
    }
    for n in &outcome.notes {
        println!("# {n}");
    }
    if let Some(out) = out {
        out.write(&spec, &outcome, wall)
            .context("writing artifacts")
            .map_err(Failure::Usage)?;
        println!("# artifacts in {}", out.path("").display());
    }
    let failed =
        outcome.checks.iter().filter(|c| !c.passed).count() + outcome.rows.iter().filter(|r| !r.passed).count();
    println!(
        "# {} checks, {} comparisons, {} failed, {:.1}s",
        outcome.checks.len(),
        outcome.rows.len(),
        failed,
        wall
    );
    if outcome.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
