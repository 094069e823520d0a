use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use ducc_tools::config::{parse_config, ExperimentConfig};
use ducc_tools::presets::{preset, PRESET_NAMES};
use ducc_tools::runner::{all_converged, run_experiment, write_results, RunOptions};
use ducc_tools::selftest::run_selftest;
use log::info;

#[derive(Parser)]
#[command(
    name = "ducc",
    version,
    about = "Coupled-cluster downfolding of hydrogen chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a built-in table preset (table1 .. table6).
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a config and write the downfolded Hamiltonians to `<out>/heff`.
    Export {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Invariant checks on H2 and H4.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// Number of concurrent jobs.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Override the coupled-cluster residual threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory (default: results/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Do not read or write cached amplitudes.
    #[arg(long)]
    no_cache: bool,
    /// Record wall times in results.csv.
    #[arg(long)]
    timings: bool,
}

fn run(title: &str, configs: Vec<ExperimentConfig>, common: Common) -> Result<bool> {
    let out = common
        .out
        .unwrap_or_else(|| PathBuf::from("results").join(title));
    let opts = RunOptions {
        workers: common.workers,
        cc_tol: common.tol,
        out_dir: Some(out.clone()),
        cache: !common.no_cache,
    };
    let mut rows = Vec::new();
    for cfg in &configs {
        info!("running {} (H{})", cfg.name, cfg.system);
        rows.extend(run_experiment(cfg, &opts));
    }
    write_results(&out, title, &rows, common.timings)
        .with_context(|| format!("writing {}", out.display()))?;
    print!("{}", std::fs::read_to_string(out.join("results.txt"))?);
    Ok(all_converged(&rows))
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    Ok(parse_config(path)?)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, common } => {
            let cfg = load(&config)?;
            run(&cfg.name.clone(), vec![cfg], common)
        }
        Command::Export { config, common } => {
            let mut cfg = load(&config)?;
            cfg.export_heff = true;
            run(&cfg.name.clone(), vec![cfg], common)
        }
        Command::Preset { name, common } => match preset(&name) {
            Some(configs) => run(&name, configs, common),
            None => bail!(
                "unknown preset `{name}` (expected one of {})",
                PRESET_NAMES.join(", ")
            ),
        },
        Command::Selftest => {
            let checks = run_selftest();
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
