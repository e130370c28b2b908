//! CSV, manifest and plot writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use stinet_core::{MetricsSeries, SimConfig};

/// Fixed leading columns of the per-step series CSV. Per-pathogen `E_<label>`
/// and `I_<label>` columns follow, then `R_t`.
pub const SERIES_COLUMNS: &[&str] = &[
    "step",
    "population",
    "S",
    "E",
    "I",
    "carriers",
    "cleared_total",
    "new_infections",
    "new_carriers",
    "newly_infectious",
    "recoveries",
    "births",
    "disease_deaths",
    "natural_deaths",
    "interactions",
    "app_users",
    "app_matches",
    "app_interactions",
    "steady_edges",
    "active_casual_edges",
];

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// `{}` on f64 prints the shortest string that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn series_header(series: &MetricsSeries) -> Vec<String> {
    let mut header: Vec<String> = SERIES_COLUMNS.iter().map(|s| s.to_string()).collect();
    for prefix in ["E", "I"] {
        header.extend(series.pathogen_labels.iter().map(|l| format!("{prefix}_{l}")));
    }
    header.push("R_t".into());
    header
}

pub fn write_series_csv(series: &MetricsSeries, path: &Path) -> Result<()> {
    anyhow::ensure!(!series.rows.is_empty(), "series is empty");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?);
    w.write_record(series_header(series))?;
    for r in &series.rows {
        let mut rec: Vec<String> = [
            r.step,
            r.population,
            r.susceptible,
            r.exposed,
            r.infectious,
            r.carriers,
            r.cleared_total,
            r.new_infections,
            r.new_carriers,
            r.newly_infectious,
            r.recoveries,
            r.births,
            r.disease_deaths,
            r.natural_deaths,
            r.interactions,
            r.app_users,
            r.app_matches,
            r.app_interactions,
            r.steady_edges,
            r.active_casual_edges,
        ]
        .iter()
        .map(u64::to_string)
        .collect();
        rec.extend(r.exposed_by_pathogen.iter().map(u64::to_string));
        rec.extend(r.infectious_by_pathogen.iter().map(u64::to_string));
        rec.push(fmt_opt(r.r_t));
        w.write_record(rec)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LongRow {
    pub sweep_value: f64,
    pub rep: usize,
    pub e_rt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub mean_e_rt: f64,
    pub std_e_rt: f64,
    /// Replications with a defined E[R_t].
    pub defined: usize,
}

pub fn summarize(values: &[f64], long: &[LongRow]) -> Vec<SummaryRow> {
    values
        .iter()
        .map(|&v| {
            let xs: Vec<f64> = long
                .iter()
                .filter(|r| r.sweep_value == v)
                .filter_map(|r| r.e_rt)
                .collect();
            SummaryRow {
                sweep_value: v,
                mean_e_rt: stinet_core::stats::mean(&xs),
                std_e_rt: stinet_core::stats::sample_std(&xs),
                defined: xs.len(),
            }
        })
        .collect()
}

fn lf_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?))
}

pub fn write_long_csv(rows: &[LongRow], path: &Path) -> Result<()> {
    let mut w = lf_writer(path)?;
    w.write_record(["sweep_value", "rep", "e_rt"])?;
    for r in rows {
        w.write_record([fmt_f64(r.sweep_value), r.rep.to_string(), fmt_opt(r.e_rt)])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = lf_writer(path)?;
    w.write_record(["sweep_value", "mean_e_rt", "std_e_rt"])?;
    for r in rows {
        w.write_record([fmt_f64(r.sweep_value), fmt_f64(r.mean_e_rt), fmt_f64(r.std_e_rt)])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_long_csv(path: &Path) -> Result<Vec<LongRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(LongRow {
                sweep_value: rec[0].parse()?,
                rep: rec[1].parse()?,
                e_rt: if rec[2].is_empty() { None } else { Some(rec[2].parse()?) },
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub preset: String,
    pub config: SimConfig,
    pub master_seed: u64,
    pub replications: usize,
    pub rep_seeds: Vec<u64>,
    /// Sweep values as written in the CSVs (`inf` for no limit).
    pub sweep_values: Vec<String>,
    pub workers: usize,
    pub artifacts: Vec<PathBuf>,
    pub started_unix_secs: u64,
    /// Filled in once all runs finish.
    pub wall_clock_secs: Option<f64>,
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, manifest)?;
    w.write_all(b"\n")?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Fails early if `dir` cannot hold results.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let probe = dir.join(".stinet-write-probe");
    File::create(&probe).with_context(|| format!("output directory {} is not writable", dir.display()))?;
    std::fs::remove_file(&probe).ok();
    Ok(())
}

/// Mean +- std of E[R_t] per sweep value with the outbreak threshold at 1.
/// An unlimited value is drawn one decade past the largest finite value.
pub fn write_sweep_plot(rows: &[SummaryRow], axis: &str, log_x: bool, path: &Path) -> Result<()> {
    use plotters::prelude::*;

    let finite_max = rows
        .iter()
        .map(|r| r.sweep_value)
        .filter(|v| v.is_finite())
        .fold(f64::MIN, f64::max);
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| if r.sweep_value.is_finite() { r.sweep_value } else { finite_max * 10.0 })
        .collect();
    let y_max = rows
        .iter()
        .map(|r| r.mean_e_rt + r.std_e_rt)
        .fold(1.0f64, f64::max)
        * 1.1;
    let y_min = rows.iter().map(|r| r.mean_e_rt - r.std_e_rt).fold(0.0f64, f64::min);
    let (x_lo, x_hi) = (
        xs.iter().copied().fold(f64::MAX, f64::min),
        xs.iter().copied().fold(f64::MIN, f64::max),
    );

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| anyhow::anyhow!("{e}"))?;
    // the two axis types give different chart types, so share the body textually
    macro_rules! render {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart
                .configure_mesh()
                .x_desc(axis)
                .y_desc("E[R_t]")
                .draw()
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            chart
                .draw_series(LineSeries::new([(x_lo, 1.0), (x_hi, 1.0)], RED.stroke_width(1)))
                .map_err(|e| anyhow::anyhow!("{e}"))?
                .label("outbreak threshold");
            chart
                .draw_series(xs.iter().zip(rows).map(|(&x, r)| {
                    ErrorBar::new_vertical(x, r.mean_e_rt - r.std_e_rt, r.mean_e_rt, r.mean_e_rt + r.std_e_rt, BLUE.filled(), 6)
                }))
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            chart
                .draw_series(LineSeries::new(xs.iter().zip(rows).map(|(&x, r)| (x, r.mean_e_rt)), &BLUE))
                .map_err(|e| anyhow::anyhow!("{e}"))?
                .label("mean E[R_t]");
        }};
    }

    let mut builder = ChartBuilder::on(&root);
    builder.margin(20).x_label_area_size(40).y_label_area_size(60);
    if log_x {
        render!(builder
            .build_cartesian_2d((x_lo * 0.8..x_hi * 1.25).log_scale(), y_min..y_max)
            .map_err(|e| anyhow::anyhow!("{e}"))?);
    } else {
        let pad = (x_hi - x_lo).max(1e-9) * 0.05;
        render!(builder
            .build_cartesian_2d(x_lo - pad..x_hi + pad, y_min..y_max)
            .map_err(|e| anyhow::anyhow!("{e}"))?);
    }
    root.present().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(())
}
