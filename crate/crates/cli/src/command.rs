use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use crate::experiments::{run_preset, PresetOutcome, RunOptions};
use crate::presets::{ExperimentPreset, PresetName};
use crate::settings::{load_config, ConfigSources};

#[derive(Debug, Parser)]
#[command(name = "stinet", version, about = "Multi-pathogen STI spread with dating-app dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One simulation; writes a per-step series CSV.
    Run(CommonArgs),
    /// Replicated parameter sweep; writes long and summary CSVs.
    Sweep(CommonArgs),
    /// Well-mixed single-pathogen runs against the compartment ODE.
    Oracle(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file; keys match the config fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replications per sweep point (default: config `replications`).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, value_enum)]
    pub preset: Option<PresetName>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Start from the full-scale defaults instead of the desk-scale ones.
    #[arg(long)]
    pub paper_scale: bool,
    /// Also write an SVG plot of sweep results.
    #[arg(long)]
    pub plot: bool,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Override a config key; repeatable. `none` or `inf` clears optional keys.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
}

pub fn execute(cli: &Cli, env: Vec<(String, String)>) -> Result<(PresetName, PresetOutcome)> {
    let (args, default) = match &cli.command {
        Command::Run(a) => (a, Some(PresetName::SingleRun)),
        Command::Sweep(a) => (a, None),
        Command::Oracle(a) => (a, Some(PresetName::OracleCompare)),
    };
    let Some(name) = args.preset.or(default) else {
        bail!("sweep needs --preset (adoption-sweep, cap-sweep or certification-sweep)");
    };
    let mut config = load_config(&ConfigSources {
        file: args.config.as_deref(),
        paper_scale: args.paper_scale,
        env,
        sets: args.sets.clone(),
    })?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(reps) = args.reps {
        config.replications = reps;
    }
    config.validate()?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let opts = RunOptions {
        reps: config.replications,
        workers,
        out_dir: args.out.clone(),
        plot: args.plot,
    };
    let outcome = run_preset(&ExperimentPreset::named(name), &config, &opts)?;
    Ok((name, outcome))
}

/// Parses arguments, runs, and reports. Returns the process exit code.
pub fn main_with<I, T>(args: I, env: Vec<(String, String)>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if code != 0 {
                eprintln!("{}", serde_json::json!({"status": "error", "kind": "usage", "message": e.kind().to_string()}));
            }
            return code;
        }
    };
    match execute(&cli, env) {
        Ok((name, outcome)) => {
            for row in &outcome.summary {
                println!("{name} value={} mean_e_rt={} std_e_rt={}", row.sweep_value, row.mean_e_rt, row.std_e_rt);
            }
            if let Some(o) = &outcome.oracle {
                println!(
                    "oracle band_fraction={} max_abs_deviation={} mean_abs_deviation={}",
                    o.band_fraction, o.max_abs_deviation, o.mean_abs_deviation
                );
            }
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({"status": "error", "kind": "run", "message": format!("{e:#}")}));
            1
        }
    }
}
