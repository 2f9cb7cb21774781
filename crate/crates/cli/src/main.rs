//! Command-line front end for the multicast failover simulator.
//!
//! `run` executes one backend over a scenario; `compare` executes both and
//! adds a side-by-side flow table. Exit codes: 0 on success, 1 for scenario
//! problems (missing file, parse or validation error), 2 for internal
//! failures such as unwritable output directories.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pointsim::report;
use pointsim::scenario::{load_scenario, Scenario, ScenarioError};
use pointsim::sim::{run, BackendKind};

#[derive(Parser)]
#[command(
    name = "pointsim",
    about = "Deterministic simulator comparing ICN stateless multicast with an L2 IGMP baseline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one backend and report outages, link load and counters.
    Run {
        /// Scenario description (TOML).
        scenario: PathBuf,
        /// Which forwarding plane to simulate.
        #[arg(long, value_enum)]
        backend: Backend,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write episodes.csv, links.csv and summary.json here.
        /// Without it the summary is printed to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate both backends and write a side-by-side comparison.
    Compare {
        /// Scenario description (TOML).
        scenario: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; per-backend reports land in point/ and ip/.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Backend {
    Point,
    Ip,
}

impl From<Backend> for BackendKind {
    fn from(value: Backend) -> Self {
        match value {
            Backend::Point => BackendKind::Point,
            Backend::Ip => BackendKind::Ip,
        }
    }
}

enum CliError {
    Scenario(ScenarioError),
    Io(PathBuf, std::io::Error),
}

impl From<ScenarioError> for CliError {
    fn from(value: ScenarioError) -> Self {
        CliError::Scenario(value)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Scenario(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Io(path, e)) => {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(2)
        }
    }
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<Scenario, ScenarioError> {
    let mut sc = load_scenario(path)?;
    if let Some(seed) = seed {
        sc.params.seed = seed;
    }
    Ok(sc)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario, backend, seed, out } => {
            let sc = load(&scenario, seed)?;
            let backend = BackendKind::from(backend);
            let metrics = run(&sc, backend);
            match out {
                Some(dir) => report::write_run_reports(&dir, &sc, backend, &metrics)
                    .map_err(|e| CliError::Io(dir, e))?,
                None => print!("{}", report::render_summary_json(&sc, backend, &metrics)),
            }
            Ok(())
        }
        Command::Compare { scenario, seed, out } => {
            let sc = load(&scenario, seed)?;
            let point = run(&sc, BackendKind::Point);
            let ip = run(&sc, BackendKind::Ip);
            for (sub, backend, metrics) in
                [("point", BackendKind::Point, &point), ("ip", BackendKind::Ip, &ip)]
            {
                let dir = out.join(sub);
                report::write_run_reports(&dir, &sc, backend, metrics)
                    .map_err(|e| CliError::Io(dir, e))?;
            }
            let csv = out.join("compare.csv");
            std::fs::write(&csv, report::render_compare_csv(&point, &ip))
                .map_err(|e| CliError::Io(csv, e))?;
            print!("{}", report::render_compare_table(&point, &ip));
            Ok(())
        }
    }
}
