use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sctl::commands::{cmd_check, cmd_reduce, cmd_simulate, cmd_solve, parse_policy, SimArgs, SolverArgs};
use sctl::scenario::Scenario;
use sctl::CliError;

/// Condition checks, workload reduction, HJB solving and Monte Carlo
/// simulation for state-constrained singular control problems.
#[derive(Parser)]
#[command(name = "sctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the solvability and uniqueness conditions.
    Check {
        scenario: PathBuf,
        /// Exit with status 4 unless uniqueness holds.
        #[arg(long)]
        require_unique: bool,
    },
    /// Reduce a network scenario to a workload scenario.
    Reduce {
        scenario: PathBuf,
        /// Output scenario path (default `<stem>.reduced.json`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Solve the dynamic programming equation on a grid.
    Solve {
        scenario: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Value CSV path (default `<stem>.value.csv`).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Estimate the cost of a policy by simulation.
    Simulate {
        scenario: PathBuf,
        /// Policy name (`do_nothing`, `project_to_w`) or JSON object.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Initial state, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        w0: Option<Vec<f64>>,
        /// Path CSV output.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Value CSV to compare against (default `<stem>.value.csv` if it exists).
        #[arg(long)]
        field: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long)]
    grid_h: Option<f64>,
    #[arg(long)]
    dirs: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Comma separated offsets for the uniqueness probe.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    probe_offsets: Option<Vec<f64>>,
}

impl From<SolverFlags> for SolverArgs {
    fn from(f: SolverFlags) -> Self {
        SolverArgs {
            grid_h: f.grid_h,
            dirs: f.dirs,
            tol: f.tol,
            max_iter: f.max_iter,
            probe_offsets: f.probe_offsets,
        }
    }
}

fn run(cli: Cli) -> Result<sctl::commands::Report, CliError> {
    match cli.command {
        Command::Check { scenario, require_unique } => {
            let scn = Scenario::load(&scenario)?;
            cmd_check(&scenario, &scn, require_unique)
        }
        Command::Reduce { scenario, out, solver } => {
            let scn = Scenario::load(&scenario)?;
            cmd_reduce(&scenario, &scn, out.as_deref(), &solver.into())
        }
        Command::Solve { scenario, solver, dump } => {
            let scn = Scenario::load(&scenario)?;
            cmd_solve(&scenario, &scn, &solver.into(), dump.as_deref())
        }
        Command::Simulate {
            scenario,
            policy,
            paths,
            seed,
            dt,
            horizon,
            w0,
            dump,
            field,
            solver,
        } => {
            let scn = Scenario::load(&scenario)?;
            let args = SimArgs {
                policy: policy.as_deref().map(parse_policy).transpose()?,
                paths,
                seed,
                dt,
                horizon,
                w0,
                dump,
                field,
                solver: solver.into(),
            };
            cmd_simulate(&scenario, &scn, &args)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{}", report.json);
            ExitCode::from(report.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
