//! Command-line entry point: config ingestion, experiment dispatch, result
//! emission, and the self-check suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use phonon_sim::experiments::{catalogue, run, RawConfig, ResultSet};
use phonon_sim::verify::run_checks;

#[derive(Parser)]
#[command(
    name = "phonon-sim",
    version,
    about = "Two-mode phononic bright/dark state simulator and analysis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file and write its result
    /// tables.
    Run {
        /// Path to the TOML experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Output format(s) to emit.
        #[arg(long, value_enum, default_value_t = Format::Both)]
        format: Format,
        /// Override the Fock cutoffs of the primary space.
        #[arg(long, num_args = 2, value_names = ["N1", "N2"])]
        cutoff_override: Option<Vec<usize>>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the experiment catalogue.
    List,
    /// Run the oracle/invariant self-check suite and print a pass/fail table.
    Verify {
        /// Only run checks whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, format, cutoff_override, seed } => {
            cmd_run(&config, &out, format, cutoff_override, seed)
        }
        Command::List => cmd_list(),
        Command::Verify { filter } => cmd_verify(filter.as_deref()),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_run(
    config_path: &Path,
    out_dir: &Path,
    format: Format,
    cutoff_override: Option<Vec<usize>>,
    seed: Option<u64>,
) -> Result<ExitCode, phonon_sim::Error> {
    let text = std::fs::read_to_string(config_path)?;
    let raw = RawConfig::parse_toml(&text)?;
    let mut config = raw.resolve()?;
    if let Some(cutoffs) = cutoff_override {
        config.space =
            phonon_sim::hilbert::SpaceConfig::new(cutoffs[0], cutoffs[1], config.space.electronic_levels)?;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    std::fs::create_dir_all(out_dir)?;

    let result = run(&config)?;
    let written = write_result(&result, out_dir, format)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn write_result(
    result: &ResultSet,
    out_dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>, phonon_sim::Error> {
    let stem = result.file_stem();
    let mut written = Vec::new();
    if format != Format::Json {
        let path = out_dir.join(format!("{stem}.csv"));
        let file = std::fs::File::create(&path)?;
        result.write_csv(file)?;
        written.push(path);
    }
    if format != Format::Csv {
        let path = out_dir.join(format!("{stem}.json"));
        std::fs::write(&path, result.to_json())?;
        written.push(path);
    }
    Ok(written)
}

fn cmd_list() -> Result<ExitCode, phonon_sim::Error> {
    for (name, description) in catalogue() {
        println!("{name:<20} {description}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(filter: Option<&str>) -> Result<ExitCode, phonon_sim::Error> {
    let outcomes = run_checks(filter);
    if outcomes.is_empty() {
        eprintln!("no checks match the filter");
        return Ok(ExitCode::FAILURE);
    }
    let mut failures = 0;
    for outcome in &outcomes {
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {:<28} {}", outcome.name, outcome.detail);
        if !outcome.passed {
            failures += 1;
        }
    }
    println!("{} checks, {} failed", outcomes.len(), failures);
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
