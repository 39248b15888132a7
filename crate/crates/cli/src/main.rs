use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlss_cli::config::{Scale, SweepSpec, SweepVar};
use nlss_cli::{cmd_solve, cmd_sweep, cmd_thresholds, CliError};

#[derive(Parser)]
#[command(name = "nlss", version, about = "Ground states and energy levels of a coupled cubic Schrödinger system")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one configuration; writes report.json and report.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter; writes sweep.csv and sweep.svg.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// beta, mu1, mu2, tau1 or tau2
        #[arg(long)]
        vary: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        log: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print Λ, β̂₁, β̂₂, 3√(μ₁μ₂) and max μ.
    Thresholds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Solve { config, out } => cmd_solve(&config, out.as_deref()),
        Cmd::Sweep { config, vary, from, to, steps, log, out } => {
            let spec = SweepSpec {
                vary: SweepVar::parse(&vary)?,
                from,
                to,
                steps,
                scale: if log { Scale::Log } else { Scale::Linear },
            };
            cmd_sweep(&config, &spec, out.as_deref())
        }
        Cmd::Thresholds { config, json } => {
            let (code, text) = cmd_thresholds(&config, json)?;
            print!("{text}");
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
