use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use fedosov_index::cli::{self, ReportDoc, RunOptions, Scenario};
use fedosov_index::Result;

/// Exact Fedosov quantization, trace densities and index checks on charts and tori.
#[derive(Parser, Debug)]
#[command(name = "fedosov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here ("-" for stdout instead of the text summary).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Enable the n = 2 fixtures and larger random batteries.
    #[arg(long, global = true)]
    slow: bool,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Highest ħ order to report (defaults to the scenario's).
    #[arg(long, allow_hyphen_values = true)]
    hbar_order: Option<i32>,
    /// Override the filtration bound D.
    #[arg(long)]
    filtration: Option<i32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// a⋆b through the requested ħ order.
    Star {
        #[command(flatten)]
        s: ScenarioArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Build the Fedosov connection and check its post-conditions.
    Connection {
        #[command(flatten)]
        s: ScenarioArgs,
    },
    /// The trace density Ψ_D(a).
    TraceDensity {
        #[command(flatten)]
        s: ScenarioArgs,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        a: String,
    },
    /// Compare both sides of the index theorem.
    IndexCheck {
        #[command(flatten)]
        s: ScenarioArgs,
    },
    /// Run the property catalog and every fixture.
    Selftest {
        /// Read fixtures from this directory instead of the built-in copies.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, hide = true)]
        mutate_eps: bool,
    },
}

fn load(s: &ScenarioArgs) -> Result<(Scenario, RunOptions)> {
    let sc = Scenario::load(&s.scenario, s.filtration)?;
    Ok((sc, RunOptions { hbar_order: s.hbar_order, slow: false }))
}

fn run(cli: &Cli) -> Result<ReportDoc> {
    match &cli.command {
        Command::Star { s, a, b } => load(s).and_then(|(sc, o)| cli::cmd_star(&sc, a, b, &o)),
        Command::Connection { s } => load(s).and_then(|(sc, o)| cli::cmd_connection(&sc, &o)),
        Command::TraceDensity { s, a } => load(s).and_then(|(sc, o)| cli::cmd_trace_density(&sc, a, &o)),
        Command::IndexCheck { s } => load(s).and_then(|(sc, o)| cli::cmd_index_check(&sc, &o)),
        Command::Selftest { fixtures, mutate_eps } => cli::cmd_selftest(cli.slow, *mutate_eps, fixtures.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    let code = cli::exit_code(&result);
    match &result {
        Ok(report) => {
            let to_stdout = cli.output.as_deref().is_some_and(|p| p.as_os_str() == "-");
            if let Some(path) = cli.output.as_ref().filter(|_| !to_stdout) {
                if let Err(e) = std::fs::write(path, report.to_json()) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if to_stdout {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            // timings stay out of the report so reruns are byte-identical
            eprintln!("elapsed: {:.2?}", start.elapsed());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code as u8)
}
