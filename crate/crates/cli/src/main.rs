//! `riskplan`: solve, check and simulate risk-aware delivery plans from
//! JSON files. Results go to stdout (or `-o`) as JSON; logs go to stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "riskplan", version, about = "Risk-aware package delivery planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an optimal plan.
    #[command(subcommand)]
    Solve(Solve),
    /// Monte Carlo estimate of a plan's expected reward.
    Simulate {
        #[arg(short, long)]
        input: PathBuf,
        /// Plan file: {"plans": [[id, ...], ...]} or {"stationary": [id, ...]}.
        #[arg(short, long)]
        plan: PathBuf,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Exhaustive search for small finite-horizon instances.
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Value every stationary action of an infinite-horizon instance.
    MdpEval {
        #[arg(short, long)]
        input: PathBuf,
        /// Evaluate one action given as a bit string over catalog positions.
        #[arg(long)]
        action: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Team planning with several agents.
    #[command(subcommand)]
    Team(Team),
    /// Distribution of the number of successes of independent trials.
    Pbd {
        /// Comma-separated success probabilities.
        #[arg(long, value_delimiter = ',')]
        probs: Vec<f64>,
        #[arg(long, value_enum, default_value_t = PbdMethod::Dft)]
        method: PbdMethod,
        #[command(flatten)]
        out: Output,
    },
    /// Convert between leg survival probability and distance.
    Convert {
        #[arg(long, required_unless_present = "distance", conflicts_with = "distance")]
        rho: Option<f64>,
        #[arg(long)]
        distance: Option<f64>,
        /// Survival probability per unit distance.
        #[arg(long)]
        phi: f64,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        /// Number of epochs, or "infinite".
        #[arg(long)]
        horizon: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = parse_range, default_value = "0,5")]
        theta: (f64, f64),
        #[arg(long, value_parser = parse_range, default_value = "0,10")]
        reward: (f64, f64),
        #[arg(long, value_parser = parse_range, default_value = "0,1")]
        rho: (f64, f64),
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
enum Solve {
    /// Backward induction over a finite horizon.
    Finite {
        #[arg(short, long)]
        input: PathBuf,
        /// Per-epoch CSV report.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write the mission plan on its own.
        #[arg(long)]
        plan_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Best stationary plan for an infinite horizon.
    Infinite {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        plan_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
enum Team {
    /// Greedy team plans per epoch and surviving agent count.
    Greedy {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        agents: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PbdMethod {
    Enum,
    Dft,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RISKPLAN_LOG", "off"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
