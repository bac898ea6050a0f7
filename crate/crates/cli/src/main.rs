use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sifa_cli::{
    explain, fault_sites, load_circuit, verify, CliError, VerdictReport, VerifyOptions,
};
use sifa_core::checker::CheckerConfig;
use sifa_core::fault::FaultSite;
use sifa_core::sat::SolverBudget;

/// Checks masked redundant circuits for fault-detection leakage.
#[derive(Parser, Debug)]
#[command(name = "sifa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Netlist file.
    path: Option<PathBuf>,
    /// Bundled circuit: chi3, chi3_reuse_a0, chi3_reuse_b0, chi3_reuse_c0, fig2_toy.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every fault site and report a verdict for each.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Also write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        /// Run the exact oracle on unknown sites.
        #[arg(long)]
        oracle: bool,
        /// Solver decision cap per query.
        #[arg(long)]
        budget: Option<u64>,
        /// Whether primary inputs are fault sites.
        #[arg(long, value_enum, default_value = "on")]
        fault_inputs: Toggle,
    },
    /// Show how the verdict for one site is reached.
    Explain {
        #[command(flatten)]
        source: Source,
        /// Site such as `input:a0` or `gate:v0`.
        #[arg(long)]
        site: String,
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// List fault sites with their indices.
    List {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "on")]
        fault_inputs: Toggle,
    },
}

fn checker(budget: Option<u64>) -> CheckerConfig {
    CheckerConfig {
        budget: SolverBudget {
            max_decisions: budget,
        },
        ..CheckerConfig::default()
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Verify {
            source,
            json,
            jobs,
            oracle,
            budget,
            fault_inputs,
        } => {
            let start = Instant::now();
            let c = load_circuit(source.path.as_deref(), source.builtin.as_deref())?;
            let opts = VerifyOptions {
                jobs: jobs
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
                oracle,
                checker: checker(budget),
                fault_inputs: matches!(fault_inputs, Toggle::On),
            };
            let outcomes = verify(&c, &opts)?;
            let report =
                VerdictReport::new(c.name(), &outcomes, start.elapsed().as_millis() as u64);
            if let Some(path) = json {
                std::fs::write(&path, report.to_json()).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
            print!("{}", report.to_text());
            Ok(sifa_cli::exit_code(&outcomes))
        }
        Command::Explain {
            source,
            site,
            oracle,
            budget,
        } => {
            let c = load_circuit(source.path.as_deref(), source.builtin.as_deref())?;
            let site: FaultSite = site.parse()?;
            let opts = VerifyOptions {
                oracle,
                checker: checker(budget),
                ..VerifyOptions::default()
            };
            print!("{}", explain(&c, &site, &opts)?);
            Ok(0)
        }
        Command::List {
            source,
            fault_inputs,
        } => {
            let c = load_circuit(source.path.as_deref(), source.builtin.as_deref())?;
            for (i, site) in fault_sites(&c, matches!(fault_inputs, Toggle::On))
                .iter()
                .enumerate()
            {
                println!("{i:>4}  {site}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sifa: {e}");
            ExitCode::from(2)
        }
    }
}
