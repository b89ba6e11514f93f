// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use clusterdyn::checks::run_checks;
use clusterdyn::report::{render, render_evolution, ReportFormat};
use clusterdyn::scenario::{load_scenario, ScenarioConfig};
use clusterdyn::CliError;
use clusterdyn_core::bbgky::{marginals_from_clusters, solve_bbgky_series};
use clusterdyn_core::combinatorics::bell_numbers;
use clusterdyn_core::hamiltonian::EvolutionCache;
use clusterdyn_core::hilbert::hilbert_dim;

#[derive(Parser)]
#[command(name = "clusterdyn", version, about = "Cluster-correlation dynamics verification runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's verification checks.
    Check {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run checks concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Write F_s(t) at every scenario time.
    Evolve {
        scenario: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print dimensions and partition counts.
    Info { scenario: PathBuf },
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn evolve(config: &ScenarioConfig, s: usize) -> Result<String, CliError> {
    let cache = EvolutionCache::build(&config.spec()?, config.n_max)?;
    let f0 = marginals_from_clusters(&config.initial_correlations()?)?;
    let series = config
        .times
        .iter()
        .map(|&t| Ok((t, solve_bbgky_series(&f0, t, s, &cache)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(render_evolution(s, &series))
}

fn info(config: &ScenarioConfig) -> Result<String, CliError> {
    let bell = bell_numbers(config.n_max + 1);
    let mut out = format!(
        "d = {}\nstatistics = {}\nn_max = {}\nhbar = {}\npotential orders = {:?}\nscenario sha256 = {}\n",
        config.d,
        config.stats,
        config.n_max,
        config.hbar,
        config.potentials.iter().map(|p| p.0).collect::<Vec<_>>(),
        config.digest
    );
    out.push_str("n  side   Bell(n)\n");
    for n in 1..=config.n_max {
        out.push_str(&format!("{n:<2} {:<6} {}\n", hilbert_dim(config.d, n)?, bell[n]));
    }
    out.push_str("s  cumulant terms in the series for F_s\n");
    for s in 1..=config.n_max {
        let terms: u64 = (0..=config.n_max - s).map(|n| bell[1 + n]).sum();
        out.push_str(&format!("{s:<2} {terms}\n"));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Check {
            scenario,
            format,
            out,
            parallel,
        } => {
            let config = load_scenario(&scenario)?;
            let report = run_checks(&config, parallel);
            let format = match format {
                Format::Table => ReportFormat::Table,
                Format::Jsonl => ReportFormat::JsonLines,
            };
            let text = render(&report, format);
            match out {
                Some(path) => write_out(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(report.passed())
        }
        Command::Evolve { scenario, s, out } => {
            let config = load_scenario(&scenario)?;
            write_out(&out, &evolve(&config, s)?)?;
            Ok(true)
        }
        Command::Info { scenario } => {
            print!("{}", info(&load_scenario(&scenario)?)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
