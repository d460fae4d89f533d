use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use wpir_cli::eval::{run_eval, EvalSpec};
use wpir_cli::sweep::{run_sweep, write_csv, GridSpec, SweepSpec};
use wpir_cli::verify::{run_verify, Suite};
use wpir_cli::{LeakageMetric, SchemeId, SubId};

/// Exact evaluation laboratory for weakly-private information retrieval.
#[derive(Parser)]
#[command(name = "wpir", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration and print its tuple as JSON.
    Eval {
        #[arg(long, value_enum)]
        scheme: SchemeId,
        /// Number of files.
        #[arg(long = "M")]
        m_count: usize,
        /// Number of servers.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Field modulus (prime).
        #[arg(long, default_value_t = 2)]
        q: u8,
        /// Bernoulli bias, for the Bernoulli families.
        #[arg(long)]
        p: Option<f64>,
        /// Sphere weight, for the sphere family.
        #[arg(long)]
        w: Option<usize>,
        /// Partition count, for the partition families.
        #[arg(long)]
        eta: Option<usize>,
        /// Subscheme of the generic partition wrapper.
        #[arg(long, value_enum)]
        sub: Option<SubId>,
        /// Also report the tuple in normalized units.
        #[arg(long)]
        normalize: bool,
    },
    /// Sweep a parameter grid and write one CSV row per point.
    Sweep {
        #[arg(long, value_enum)]
        scheme: SchemeId,
        /// Number of files.
        #[arg(long = "M")]
        m_count: usize,
        /// Number of servers.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Field modulus (prime).
        #[arg(long, default_value_t = 2)]
        q: u8,
        /// Bernoulli grid as start:stop:step.
        #[arg(long)]
        p_grid: Option<String>,
        /// Sphere-weight grid as start:stop:step.
        #[arg(long)]
        w_grid: Option<String>,
        /// Partition grid: comma-separated list, or "divisors".
        #[arg(long)]
        eta_grid: Option<String>,
        /// Subscheme of the generic partition wrapper.
        #[arg(long, value_enum)]
        sub: Option<SubId>,
        /// Leakage metric used to sort the rows.
        #[arg(long, value_enum, default_value = "mi")]
        metric: LeakageMetric,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification suite; exits nonzero on any failed check.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Seed for the simulated databases.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Largest file count in the enumerated grids.
        #[arg(long = "max-m", default_value_t = 6)]
        max_m: usize,
        /// Also write the JSON report to a file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn grid_for(
    m_count: usize,
    p_grid: Option<String>,
    w_grid: Option<String>,
    eta_grid: Option<String>,
) -> Result<GridSpec> {
    let given = [p_grid.is_some(), w_grid.is_some(), eta_grid.is_some()]
        .iter()
        .filter(|&&g| g)
        .count();
    if given != 1 {
        bail!("give exactly one of --p-grid, --w-grid, --eta-grid");
    }
    if let Some(text) = p_grid {
        return GridSpec::parse_p(&text);
    }
    if let Some(text) = w_grid {
        return GridSpec::parse_weights(&text);
    }
    GridSpec::parse_etas(&eta_grid.expect("one grid is set"), m_count)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Eval {
            scheme,
            m_count,
            n,
            q,
            p,
            w,
            eta,
            sub,
            normalize,
        } => {
            let report = run_eval(&EvalSpec {
                scheme,
                m_count,
                n_servers: n,
                q,
                p,
                weight: w,
                eta,
                sub,
                normalized: normalize,
            })?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(true)
        }
        Command::Sweep {
            scheme,
            m_count,
            n,
            q,
            p_grid,
            w_grid,
            eta_grid,
            sub,
            metric,
            out,
        } => {
            let grid = grid_for(m_count, p_grid, w_grid, eta_grid)?;
            let rows = run_sweep(&SweepSpec {
                scheme,
                m_count,
                n_servers: n,
                q,
                sub,
                grid,
                metric,
            })?;
            write_csv(&rows, &out)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            Ok(true)
        }
        Command::Verify { suite, seed, max_m, out } => {
            let report = run_verify(suite, seed, max_m)?;
            let rendered = serde_json::to_string_pretty(&report)?;
            if let Some(path) = &out {
                std::fs::write(path, &rendered)?;
            }
            println!("{rendered}");
            eprintln!(
                "suite {}: {}/{} checks passed",
                report.suite, report.passed, report.total
            );
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
