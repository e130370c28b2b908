//! Layered configuration: built-in defaults, scale preset, TOML file,
//! `STINET_*` environment variables, then `--set key=value` flags.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use stinet_core::SimConfig;
use toml::{Table, Value};

/// Environment variables starting with this prefix override config keys:
/// `STINET_INITIAL_ADOPTION=0.2` sets `initial_adoption`, and a double
/// underscore descends into tables (`STINET_LOOKING_HOURS__MEAN_HOURS`).
pub const ENV_PREFIX: &str = "STINET_";

fn to_table(config: &SimConfig) -> Table {
    match Value::try_from(config).expect("config serializes to TOML") {
        Value::Table(t) => t,
        _ => unreachable!("config is a struct"),
    }
}

fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses a scalar written on the command line: a TOML literal if it is one,
/// otherwise a bare string.
fn parse_scalar(raw: &str) -> Value {
    let raw = raw.trim();
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `path = value` where `path` is dot-separated and numeric segments
/// index arrays. `none` or `inf` removes the key, which turns optional
/// policies off.
pub fn apply_override(table: &mut Table, path: &str, raw: &str) -> Result<()> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        bail!("invalid key path {path:?}");
    }
    let removes = matches!(raw.trim().to_ascii_lowercase().as_str(), "none" | "inf" | "infinity");
    let value = (!removes).then(|| parse_scalar(raw));

    let (last, parents) = segments.split_last().expect("nonempty path");
    let mut root = Value::Table(std::mem::take(table));
    let result = set_at(&mut root, parents, last, value, path);
    *table = match root {
        Value::Table(t) => t,
        _ => unreachable!("root stays a table"),
    };
    result
}

fn set_at(root: &mut Value, parents: &[&str], last: &str, value: Option<Value>, path: &str) -> Result<()> {
    let mut cursor = root;
    for seg in parents {
        cursor = step_into(cursor, seg, path)?;
    }
    match (cursor, value) {
        (Value::Table(t), Some(v)) => {
            t.insert(last.to_string(), v);
        }
        (Value::Table(t), None) => {
            t.remove(last);
        }
        (Value::Array(a), Some(v)) => {
            let i: usize = last.parse().with_context(|| format!("{path}: {last:?} is not an array index"))?;
            *a.get_mut(i).ok_or_else(|| anyhow!("{path}: index {i} out of range"))? = v;
        }
        _ => bail!("{path}: cannot set {last:?} here"),
    }
    Ok(())
}

fn step_into<'a>(v: &'a mut Value, seg: &str, path: &str) -> Result<&'a mut Value> {
    match v {
        Value::Table(t) => Ok(t.entry(seg.to_string()).or_insert_with(|| Value::Table(Table::new()))),
        Value::Array(a) => {
            let i: usize = seg.parse().with_context(|| format!("{path}: {seg:?} is not an array index"))?;
            a.get_mut(i).ok_or_else(|| anyhow!("{path}: index {i} out of range"))
        }
        _ => bail!("{path}: {seg:?} descends into a scalar"),
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConfigSources<'a> {
    pub file: Option<&'a Path>,
    pub paper_scale: bool,
    /// `(name, value)` pairs; only names with [`ENV_PREFIX`] are used.
    pub env: Vec<(String, String)>,
    /// Raw `key=value` strings.
    pub sets: Vec<String>,
}

pub fn load_config(sources: &ConfigSources) -> Result<SimConfig> {
    let base = if sources.paper_scale {
        SimConfig::default()
    } else {
        SimConfig::desk_scale()
    };
    let mut table = to_table(&base);

    if let Some(path) = sources.file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let file: Table = text.parse().with_context(|| format!("parsing config {}", path.display()))?;
        merge(&mut table, file);
    }

    let mut env: Vec<&(String, String)> = sources.env.iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    env.sort();
    for (name, value) in env {
        let path = name[ENV_PREFIX.len()..].to_ascii_lowercase().replace("__", ".");
        apply_override(&mut table, &path, value).with_context(|| format!("environment variable {name}"))?;
    }

    for set in &sources.sets {
        let (key, value) = set
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key=value, got {set:?}"))?;
        apply_override(&mut table, key.trim(), value).with_context(|| format!("--set {set}"))?;
    }

    let config: SimConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| anyhow!("invalid configuration: {}", e.message()))?;
    config.validate()?;
    Ok(config)
}
