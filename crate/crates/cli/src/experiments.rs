//! Preset execution: sweeps, single runs and the ODE comparison.
//!
//! Work items are scheduled on a bounded rayon pool and collected in a fixed
//! order, so results do not depend on the worker count. Every sweep point
//! reuses the same replication seeds.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use stinet_core::engine::{replication_seeds, run_with_seed};
use stinet_core::meanfield::{
    compare_abm, integrate, BirthMode, CompartmentVector, Coupling, DeviationReport, MeanFieldParams, PathogenRates,
};
use stinet_core::{ContactMode, DurationDist, PathogenParams, SimConfig};

use crate::output::{self, fmt_f64, LongRow, RunManifest, SummaryRow};
use crate::presets::{ExperimentPreset, PresetName};

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub reps: usize,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub plot: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PresetOutcome {
    pub artifacts: Vec<PathBuf>,
    pub long: Vec<LongRow>,
    pub summary: Vec<SummaryRow>,
    pub oracle: Option<OracleOutcome>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("starting worker pool")
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn artifact_paths(preset: &ExperimentPreset, opts: &RunOptions) -> Vec<PathBuf> {
    let dir = &opts.out_dir;
    let mut paths = match preset.name {
        PresetName::SingleRun => vec![dir.join("series.csv")],
        PresetName::OracleCompare => vec![dir.join("oracle_curves.csv"), dir.join("oracle_report.json")],
        _ => vec![dir.join("long.csv"), dir.join("summary.csv")],
    };
    if opts.plot && preset.is_sweep() {
        paths.push(dir.join("summary.svg"));
    }
    paths
}

pub fn run_preset(preset: &ExperimentPreset, config: &SimConfig, opts: &RunOptions) -> Result<PresetOutcome> {
    preset.validate()?;
    config.validate()?;
    anyhow::ensure!(opts.reps >= 1, "--reps must be at least 1");
    output::ensure_writable(&opts.out_dir)?;

    let config = match preset.name {
        PresetName::OracleCompare => oracle_config(config),
        _ => config.clone(),
    };
    let reps = if preset.name == PresetName::SingleRun { 1 } else { opts.reps };
    let seeds = if preset.name == PresetName::SingleRun {
        vec![config.seed]
    } else {
        replication_seeds(config.seed, reps)
    };
    let artifacts = artifact_paths(preset, opts);
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        preset: preset.name.to_string(),
        config: config.clone(),
        master_seed: config.seed,
        replications: reps,
        rep_seeds: seeds.clone(),
        sweep_values: preset.values.iter().map(|v| fmt_f64(*v)).collect(),
        workers: opts.workers,
        artifacts: artifacts.clone(),
        started_unix_secs: unix_now(),
        wall_clock_secs: None,
    };
    let manifest_path = opts.out_dir.join("manifest.json");
    output::write_manifest(&manifest, &manifest_path)?;
    let started = Instant::now();

    let mut outcome = PresetOutcome::default();
    match preset.name {
        PresetName::SingleRun => {
            let series = run_with_seed(&config, config.seed)?;
            output::write_series_csv(&series, &artifacts[0])?;
        }
        PresetName::OracleCompare => {
            let oracle = run_oracle(&config, &seeds, opts.workers)?;
            write_oracle(&oracle, &artifacts[0], &artifacts[1])?;
            outcome.oracle = Some(oracle);
        }
        _ => {
            let jobs: Vec<(f64, usize)> = preset
                .values
                .iter()
                .flat_map(|&v| (0..reps).map(move |r| (v, r)))
                .collect();
            let results: Vec<Result<LongRow>> = pool(opts.workers)?.install(|| {
                jobs.par_iter()
                    .map(|&(v, rep)| {
                        let series = run_with_seed(&preset.apply(&config, v), seeds[rep])?;
                        Ok(LongRow {
                            sweep_value: v,
                            rep,
                            e_rt: series.expected_rt,
                        })
                    })
                    .collect()
            });
            outcome.long = results.into_iter().collect::<Result<_>>()?;
            outcome.summary = output::summarize(&preset.values, &outcome.long);
            output::write_long_csv(&outcome.long, &artifacts[0])?;
            output::write_summary_csv(&outcome.summary, &artifacts[1])?;
            if opts.plot {
                output::write_sweep_plot(&outcome.summary, preset.axis, preset.log_x, &artifacts[2])?;
            }
        }
    }

    manifest.wall_clock_secs = Some(started.elapsed().as_secs_f64());
    output::write_manifest(&manifest, &manifest_path)?;
    outcome.artifacts = std::iter::once(manifest_path).chain(artifacts).collect();
    Ok(outcome)
}

/// Per-act transmission probability of the comparison pathogen.
pub const ORACLE_BETA: f64 = 0.02;
pub const ORACLE_EXPOSED_DAYS: f64 = 2.0;
pub const ORACLE_INFECTIOUS_DAYS: f64 = 4.0;

/// The well-mixed, single-pathogen, closed-population setup compared against
/// the ODE. Population, horizon and seed come from `base`.
pub fn oracle_config(base: &SimConfig) -> SimConfig {
    SimConfig {
        pathogens: vec![PathogenParams {
            label: "oracle".into(),
            beta_protected: ORACLE_BETA,
            beta_unprotected: ORACLE_BETA,
            exposure: DurationDist::Geometric {
                mean_days: ORACLE_EXPOSED_DAYS,
            },
            infectious: DurationDist::Geometric {
                mean_days: ORACLE_INFECTIOUS_DAYS,
            },
            mortality_on_recovery: 0.0,
            initial_prevalence: 0.01,
        }],
        contact_mode: ContactMode::WellMixed,
        birth_rate_per_day: 0.0,
        natural_death_rate_per_day: 0.0,
        initial_adoption: 0.0,
        success_increment: 0.0,
        failure_decrement: 0.0,
        steady_fraction: 0.0,
        casual_degree: 0.0,
        casual_to_steady: 0.0,
        steady_to_casual: 0.0,
        interaction_cap: None,
        certification_days: None,
        ..base.clone()
    }
}

fn geometric_exit_probability(d: &DurationDist, hours_per_step: f64) -> f64 {
    1.0 / (d.mean_days() * 24.0 / hours_per_step).max(1.0)
}

/// ODE rates (per day) and initial fractions matching the discrete agent
/// dynamics of [`oracle_config`].
///
/// Each step every agent meets one uniformly random other agent, so the
/// per-step force on a susceptible is `beta * I / (N - 1)`. An infectious
/// stage ends each step with probability `q`, giving recovery rate `q`. A new
/// exposure is advanced in the step it happens, so the expected number of
/// whole steps spent exposed is `(1 - p) / p` and the activation rate is
/// `p / (1 - p)`. These choices reproduce the agent model's endemic
/// equilibrium exactly.
pub fn oracle_ode(config: &SimConfig) -> (MeanFieldParams, CompartmentVector) {
    let p = &config.pathogens[0];
    let steps_per_day = config.steps_per_day();
    let n = config.population as f64;
    let p_e = geometric_exit_probability(&p.exposure, config.hours_per_step);
    let q_i = geometric_exit_probability(&p.infectious, config.hours_per_step);
    let rates = PathogenRates {
        transmission: p.beta_unprotected * n / (n - 1.0) * steps_per_day,
        activation: if p_e < 1.0 { p_e / (1.0 - p_e) * steps_per_day } else { f64::MAX.sqrt() },
        recovery: q_i * steps_per_day,
        mortality: 0.0,
    };
    let seeded = (p.initial_prevalence * n).round() / n;
    let v0 = CompartmentVector {
        occupancy: vec![1.0 - seeded, 0.0, seeded],
        dead: 0.0,
    };
    let params = MeanFieldParams {
        pathogens: vec![rates],
        birth_rate: 0.0,
        natural_death_rate: 0.0,
        birth_mode: BirthMode::AllSusceptible,
        coupling: Coupling::MassAction,
    };
    (params, v0)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleOutcome {
    pub steps: Vec<u64>,
    pub abm_mean: Vec<f64>,
    pub abm_std: Vec<f64>,
    pub ode: Vec<f64>,
    #[serde(skip)]
    pub report: DeviationReport,
    pub max_abs_deviation: f64,
    pub mean_abs_deviation: f64,
    pub band_fraction: f64,
    pub replications: usize,
    pub clamp_warnings: usize,
}

/// Sub-steps of RK4 per agent step.
const ODE_SUBSTEPS: usize = 4;

pub fn run_oracle(config: &SimConfig, seeds: &[u64], workers: usize) -> Result<OracleOutcome> {
    anyhow::ensure!(config.pathogens.len() == 1, "the ODE comparison needs exactly one pathogen");
    let curves: Vec<Result<Vec<f64>>> = pool(workers)?.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let s = run_with_seed(config, seed)?;
                Ok(std::iter::once(&s.initial)
                    .chain(&s.rows)
                    .map(|r| r.infectious_by_pathogen[0] as f64 / r.population.max(1) as f64)
                    .collect())
            })
            .collect()
    });
    let curves: Vec<Vec<f64>> = curves.into_iter().collect::<Result<_>>()?;

    let (params, v0) = oracle_ode(config);
    let step_days = config.hours_per_step / 24.0;
    let tf = config.steps as f64 * step_days;
    let traj = integrate(&v0, &params, 0.0, tf, step_days / ODE_SUBSTEPS as f64)?;
    let ode: Vec<f64> = traj.infectious_fraction(0).into_iter().step_by(ODE_SUBSTEPS).collect();

    let report = compare_abm(&ode, &curves)?;
    let points = ode.len();
    let column = |t: usize| curves.iter().map(|c| c[t]).collect::<Vec<f64>>();
    Ok(OracleOutcome {
        steps: (0..points as u64).collect(),
        abm_mean: (0..points).map(|t| stinet_core::stats::mean(&column(t))).collect(),
        abm_std: (0..points).map(|t| stinet_core::stats::sample_std(&column(t))).collect(),
        ode,
        max_abs_deviation: report.max_abs,
        mean_abs_deviation: report.mean_abs,
        band_fraction: report.band_fraction,
        report,
        replications: seeds.len(),
        clamp_warnings: traj.warnings.len(),
    })
}

fn write_oracle(o: &OracleOutcome, curves: &Path, report: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(curves)
        .with_context(|| format!("creating {}", curves.display()))?;
    w.write_record(["step", "abm_mean", "abm_std", "ode"])?;
    for t in 0..o.steps.len() {
        w.write_record([o.steps[t].to_string(), fmt_f64(o.abm_mean[t]), fmt_f64(o.abm_std[t]), fmt_f64(o.ode[t])])?;
    }
    w.flush()?;
    let summary = serde_json::json!({
        "replications": o.replications,
        "points": o.report.points,
        "max_abs_deviation": o.max_abs_deviation,
        "mean_abs_deviation": o.mean_abs_deviation,
        "band_fraction": o.band_fraction,
        "clamp_warnings": o.clamp_warnings,
    });
    std::fs::write(report, format!("{}\n", serde_json::to_string_pretty(&summary)?))
        .with_context(|| format!("writing {}", report.display()))?;
    Ok(())
}
