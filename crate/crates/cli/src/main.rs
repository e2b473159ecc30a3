//! `ham`: solve, tabulate and sweep HAM series for the built-in BSDE problems.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ham_core::problems::ProblemRegistry;
use ham_core::{Error, Result};

use config::{Format, RunConfig};

#[derive(Parser)]
#[command(name = "ham", version, about = "Homotopy analysis series solver for BSDEs and FBSDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the series to one order and report the observables.
    Solve(RunArgs),
    /// Reproduce an error table over several orders.
    Table(RunArgs),
    /// Scan the convergence parameter over a grid.
    Sweep(RunArgs),
    /// Check the solver against printed series and known invariants.
    Verify(VerifyArgs),
    /// List the registered problems and quadrature rules.
    List,
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Spatial dimension for `fbsdeNd`.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    /// Comma-separated orders, e.g. `3,6,9`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    orders: Option<Vec<usize>>,
    /// Convergence parameter as a rational or decimal, e.g. `-1` or `-7/10`.
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<String>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    c0_grid: Option<String>,
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Overrides such as `t=0:1,x=-pi:pi,raw`.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// `symbolic`, `tensor-gauss:N` or `quasi-random:N[:seed]`.
    #[arg(long)]
    quadrature: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Option<Vec<FormatArg>>,
    /// Maximum number of terms in any single series coefficient.
    #[arg(long)]
    term_cap: Option<usize>,
    /// Also compute the operator residual norm in `table`.
    #[arg(long)]
    residual: Option<bool>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    /// Fixture file of printed partial sums (defaults to the bundled one).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Run only checks whose name starts with this prefix.
    #[arg(long)]
    only: Option<String>,
    /// Write the results as JSON to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            problem: self.problem,
            d: self.d,
            order: self.order,
            orders: self.orders,
            c0: self.c0,
            c0_grid: self.c0_grid,
            precision_bits: self.precision_bits,
            domain: self.domain,
            quadrature: self.quadrature,
            seed: self.seed,
            out: self.out,
            format: self.format.map(|fs| {
                fs.into_iter()
                    .map(|f| match f {
                        FormatArg::Csv => Format::Csv,
                        FormatArg::Json => Format::Json,
                    })
                    .collect()
            }),
            term_cap: self.term_cap,
            residual: self.residual,
        };
        Ok(base.overlaid(flags))
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(a) => report(commands::solve(&a.into_config()?)?),
        Command::Table(a) => report(commands::table(&a.into_config()?)?),
        Command::Sweep(a) => report(commands::sweep(&a.into_config()?)?),
        Command::Verify(a) => {
            let checks = verify::run(a.fixtures.as_deref(), a.only.as_deref())?;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(path) = &a.json {
                std::fs::write(path, serde_json::to_string_pretty(&checks)?)?;
            }
            let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(true)
            } else {
                eprintln!("failed checks: {}", failed.join(", "));
                Ok(false)
            }
        }
        Command::List => {
            println!("problems:");
            for (id, desc) in ProblemRegistry::builtin().describe() {
                println!("  {id:<12} {desc}");
            }
            println!("quadrature rules:");
            for name in ham_core::diagnostics::QuadratureRegistry::builtin().names() {
                println!("  {name}");
            }
            Ok(true)
        }
    }
}

fn report(dir: PathBuf) -> Result<bool> {
    eprintln!("wrote {}", dir.display());
    Ok(true)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Domain(_) => 2,
        Error::TermCap { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
