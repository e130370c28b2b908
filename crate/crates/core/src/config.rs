//! Simulation configuration. Defaults reproduce the published parameter
//! table; every field can be overridden from a config file or the CLI.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::app::{AppPolicy, AttractivenessModel};
use crate::epi::PathogenParams;
use crate::graph::{PositiveNormal, SeekingDurations};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactMode {
    /// Partners come from the two-layer graph.
    Network,
    /// Every step the living population is paired uniformly at random; used
    /// to compare against the compartment ODE.
    WellMixed,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{field} = {value} is outside {bound}")]
    OutOfRange {
        field: String,
        value: String,
        bound: String,
    },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Number of steps (T).
    pub steps: u64,
    pub hours_per_step: f64,
    pub population: usize,
    pub pathogens: Vec<PathogenParams>,
    /// Births per living agent per day.
    pub birth_rate_per_day: f64,
    /// Natural deaths per agent per day.
    pub natural_death_rate_per_day: f64,
    pub looking_hours: PositiveNormal,
    pub resting_hours: PositiveNormal,
    /// Initial app usage probability (d0).
    pub initial_adoption: f64,
    pub success_increment: f64,
    pub failure_decrement: f64,
    /// Probability per step that an active casual edge becomes steady.
    pub casual_to_steady: f64,
    /// Probability per step that a steady edge becomes casual.
    pub steady_to_casual: f64,
    pub base_attractiveness: f64,
    pub age_kernel_width: f64,
    /// Share of agents in a monogamous steady partnership at start.
    pub steady_fraction: f64,
    /// Mean number of latent casual acquaintances per agent.
    pub casual_degree: f64,
    /// Probability per step that a latent casual edge activates while both
    /// ends are seeking.
    pub casual_activation: f64,
    pub protected_fraction: f64,
    pub min_age: f64,
    pub max_age: f64,
    pub heterosexual_fraction: f64,
    /// Candidates shown per app visit.
    pub max_candidates: usize,
    /// App-mediated interactions allowed per trailing week; absent = no cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction_cap: Option<u32>,
    /// Days between STI-free certifications; absent = policy off.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certification_days: Option<u32>,
    pub contact_mode: ContactMode,
    /// Steps excluded from the front of the E[R_t] average.
    pub burn_in_steps: u64,
    pub seed: u64,
    pub replications: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps: 8760,
            hours_per_step: 1.0,
            population: 100_000,
            pathogens: vec![
                PathogenParams::chlamydia(),
                PathogenParams::gonorrhea(),
                PathogenParams::syphilis(),
            ],
            birth_rate_per_day: 3.24e-5,
            natural_death_rate_per_day: 2.27e-5,
            looking_hours: PositiveNormal::new(0.72, 0.44),
            resting_hours: PositiveNormal::new(15.24, 6.73),
            initial_adoption: 0.38,
            success_increment: 0.05,
            failure_decrement: 0.02,
            casual_to_steady: 0.019,
            steady_to_casual: 0.0,
            base_attractiveness: 0.71,
            age_kernel_width: 5.0,
            steady_fraction: 0.32,
            casual_degree: 3.0,
            casual_activation: 0.5,
            protected_fraction: 0.8,
            min_age: 18.0,
            max_age: 60.0,
            heterosexual_fraction: 0.9,
            max_candidates: 5,
            interaction_cap: None,
            certification_days: None,
            contact_mode: ContactMode::Network,
            burn_in_steps: 0,
            seed: 42,
            replications: 100,
        }
    }
}

fn check_prob(field: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            field: field.into(),
            value: v.to_string(),
            bound: "[0, 1]".into(),
        })
    }
}

fn check_nonneg(field: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            field: field.into(),
            value: v.to_string(),
            bound: "[0, inf)".into(),
        })
    }
}

fn check_positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            field: field.into(),
            value: v.to_string(),
            bound: "(0, inf)".into(),
        })
    }
}

impl SimConfig {
    /// Workstation-sized run: 10^4 agents for three simulated months, 20
    /// replications.
    pub fn desk_scale() -> Self {
        SimConfig {
            population: 10_000,
            steps: 2190,
            replications: 20,
            ..SimConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.steps < 1 {
            return Err(ConfigError::OutOfRange {
                field: "steps".into(),
                value: self.steps.to_string(),
                bound: "[1, inf)".into(),
            });
        }
        if self.population < 2 {
            return Err(ConfigError::OutOfRange {
                field: "population".into(),
                value: self.population.to_string(),
                bound: "[2, inf)".into(),
            });
        }
        if self.population > u32::MAX as usize / 2 {
            return Err(ConfigError::OutOfRange {
                field: "population".into(),
                value: self.population.to_string(),
                bound: format!("[2, {}]", u32::MAX / 2),
            });
        }
        check_positive("hours_per_step", self.hours_per_step)?;
        if self.pathogens.len() > 12 {
            return Err(ConfigError::OutOfRange {
                field: "pathogens".into(),
                value: self.pathogens.len().to_string(),
                bound: "at most 12 entries".into(),
            });
        }
        for (j, p) in self.pathogens.iter().enumerate() {
            let f = |name: &str| format!("pathogens[{j}].{name}");
            check_prob(&f("beta_protected"), p.beta_protected)?;
            check_prob(&f("beta_unprotected"), p.beta_unprotected)?;
            check_prob(&f("mortality_on_recovery"), p.mortality_on_recovery)?;
            check_prob(&f("initial_prevalence"), p.initial_prevalence)?;
            p.exposure.validate().map_err(|reason| ConfigError::Invalid {
                field: f("exposure"),
                reason,
            })?;
            p.infectious.validate().map_err(|reason| ConfigError::Invalid {
                field: f("infectious"),
                reason,
            })?;
        }
        check_nonneg("birth_rate_per_day", self.birth_rate_per_day)?;
        check_nonneg("natural_death_rate_per_day", self.natural_death_rate_per_day)?;
        check_prob(
            "natural_death_rate_per_day * hours_per_step / 24",
            self.natural_death_rate_per_day * self.hours_per_step / 24.0,
        )?;
        for (name, d) in [("looking_hours", self.looking_hours), ("resting_hours", self.resting_hours)] {
            check_positive(&format!("{name}.mean_hours"), d.mean_hours)?;
            check_nonneg(&format!("{name}.sd_hours"), d.sd_hours)?;
        }
        check_prob("initial_adoption", self.initial_adoption)?;
        check_prob("success_increment", self.success_increment)?;
        check_prob("failure_decrement", self.failure_decrement)?;
        check_prob("casual_to_steady", self.casual_to_steady)?;
        check_prob("steady_to_casual", self.steady_to_casual)?;
        check_prob("base_attractiveness", self.base_attractiveness)?;
        check_positive("age_kernel_width", self.age_kernel_width)?;
        check_prob("steady_fraction", self.steady_fraction)?;
        check_nonneg("casual_degree", self.casual_degree)?;
        check_prob("casual_activation", self.casual_activation)?;
        check_prob("protected_fraction", self.protected_fraction)?;
        check_prob("heterosexual_fraction", self.heterosexual_fraction)?;
        check_nonneg("min_age", self.min_age)?;
        if !(self.max_age >= self.min_age && self.max_age.is_finite()) {
            return Err(ConfigError::OutOfRange {
                field: "max_age".into(),
                value: self.max_age.to_string(),
                bound: format!("[min_age = {}, inf)", self.min_age),
            });
        }
        if self.interaction_cap == Some(0) {
            return Err(ConfigError::OutOfRange {
                field: "interaction_cap".into(),
                value: "0".into(),
                bound: "[1, inf) or absent".into(),
            });
        }
        if self.certification_days == Some(0) {
            return Err(ConfigError::OutOfRange {
                field: "certification_days".into(),
                value: "0".into(),
                bound: "[1, inf) or absent".into(),
            });
        }
        if self.replications < 1 {
            return Err(ConfigError::OutOfRange {
                field: "replications".into(),
                value: "0".into(),
                bound: "[1, inf)".into(),
            });
        }
        Ok(())
    }

    pub fn steps_per_day(&self) -> f64 {
        24.0 / self.hours_per_step
    }

    /// Converts whole days to steps (at least one).
    pub fn days_to_steps(&self, days: f64) -> u64 {
        ((days * self.steps_per_day()).round() as u64).max(1)
    }

    pub fn seeking_durations(&self) -> SeekingDurations {
        SeekingDurations {
            look: self.looking_hours,
            rest: self.resting_hours,
            hours_per_step: self.hours_per_step,
        }
    }

    pub fn attractiveness_model(&self) -> AttractivenessModel {
        AttractivenessModel {
            base_acceptance: self.base_attractiveness,
            age_kernel_width: self.age_kernel_width,
        }
    }

    pub fn app_policy(&self) -> AppPolicy {
        AppPolicy {
            interaction_cap: self.interaction_cap,
            certification_interval: self.certification_days.map(|d| self.days_to_steps(d as f64)),
            window: self.days_to_steps(7.0),
        }
    }
}
