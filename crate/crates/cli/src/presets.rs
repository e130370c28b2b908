//! Named experiments and the config knob each one sweeps.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use stinet_core::SimConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PresetName {
    AdoptionSweep,
    CapSweep,
    CertificationSweep,
    SingleRun,
    OracleCompare,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::AdoptionSweep => "adoption-sweep",
            PresetName::CapSweep => "cap-sweep",
            PresetName::CertificationSweep => "certification-sweep",
            PresetName::SingleRun => "single-run",
            PresetName::OracleCompare => "oracle-compare",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        <PresetName as clap::ValueEnum>::from_str(s, false).map_err(|_| anyhow::anyhow!("unknown preset {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPreset {
    pub name: PresetName,
    /// Swept values in increasing order; `f64::INFINITY` means "no limit".
    pub values: Vec<f64>,
    /// Label for the swept quantity in plots.
    pub axis: &'static str,
    pub log_x: bool,
}

impl ExperimentPreset {
    pub fn named(name: PresetName) -> ExperimentPreset {
        let (values, axis, log_x) = match name {
            PresetName::AdoptionSweep => (vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5], "initial adoption rate d0", false),
            PresetName::CapSweep => (
                vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, f64::INFINITY],
                "weekly app interaction cap",
                true,
            ),
            PresetName::CertificationSweep => (vec![7.0, 30.0, 90.0, 180.0, 365.0], "certification interval (days)", false),
            PresetName::SingleRun | PresetName::OracleCompare => (Vec::new(), "", false),
        };
        ExperimentPreset {
            name,
            values,
            axis,
            log_x,
        }
    }

    pub fn is_sweep(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_sweep() {
            return Ok(());
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            bail!("{}: sweep values must be strictly increasing", self.name);
        }
        Ok(())
    }

    /// Config for one sweep point.
    pub fn apply(&self, base: &SimConfig, value: f64) -> SimConfig {
        let mut c = base.clone();
        match self.name {
            PresetName::AdoptionSweep => c.initial_adoption = value,
            PresetName::CapSweep => c.interaction_cap = value.is_finite().then_some(value as u32),
            PresetName::CertificationSweep => c.certification_days = value.is_finite().then_some(value as u32),
            PresetName::SingleRun | PresetName::OracleCompare => {}
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::ValueEnum;

    #[test]
    fn sweeps_are_nonempty_and_increasing() {
        for name in PresetName::value_variants() {
            let p = ExperimentPreset::named(*name);
            p.validate().unwrap();
            assert_eq!(p.is_sweep(), !matches!(name, PresetName::SingleRun | PresetName::OracleCompare));
        }
        let bad = ExperimentPreset {
            values: vec![1.0, 1.0],
            ..ExperimentPreset::named(PresetName::CapSweep)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn apply_sets_the_swept_knob() {
        let base = SimConfig::desk_scale();
        let cap = ExperimentPreset::named(PresetName::CapSweep);
        assert_eq!(cap.apply(&base, 5.0).interaction_cap, Some(5));
        assert_eq!(cap.apply(&base, f64::INFINITY).interaction_cap, None);
        assert!(cap.log_x);
        let cert = ExperimentPreset::named(PresetName::CertificationSweep);
        assert_eq!(cert.apply(&base, 30.0).certification_days, Some(30));
        let adopt = ExperimentPreset::named(PresetName::AdoptionSweep);
        assert_eq!(adopt.values.len(), 6);
        assert_eq!(adopt.apply(&base, 0.2).initial_adoption, 0.2);
    }

    #[test]
    fn names_roundtrip() {
        for name in PresetName::value_variants() {
            assert_eq!(name.as_str().parse::<PresetName>().unwrap(), *name);
        }
        assert!("fig-9".parse::<PresetName>().is_err());
    }
}
