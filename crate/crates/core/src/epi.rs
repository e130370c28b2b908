//! Per-agent epidemiological state across `k` pathogens.
//!
//! Each agent carries one [`Status`] per pathogen, so the statuses always
//! partition the pathogen set into susceptible, exposed and infectious parts.
//! Exposure happens per sexual act; the exposed and infectious stages last a
//! sampled number of steps; leaving the infectious stage either returns the
//! agent to susceptibility or, with a small probability, kills it.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathogenId(pub usize);

/// How long a stage lasts, in days.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DurationDist {
    /// Uniform over a closed interval of days, resampled per episode.
    Uniform { min_days: f64, max_days: f64 },
    /// Memoryless: the stage ends each step with probability `1 / mean_steps`.
    /// Matches the exponential residence of the compartment ODE.
    Geometric { mean_days: f64 },
}

impl DurationDist {
    pub fn uniform(min_days: f64, max_days: f64) -> Self {
        DurationDist::Uniform { min_days, max_days }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            DurationDist::Uniform { min_days, max_days } => {
                if !(min_days >= 0.0 && min_days.is_finite()) {
                    return Err(format!("min_days = {min_days} must be finite and >= 0"));
                }
                if !(max_days >= min_days && max_days.is_finite()) {
                    return Err(format!("max_days = {max_days} must be finite and >= min_days = {min_days}"));
                }
                Ok(())
            }
            DurationDist::Geometric { mean_days } => {
                if !(mean_days > 0.0 && mean_days.is_finite()) {
                    return Err(format!("mean_days = {mean_days} must be finite and > 0"));
                }
                Ok(())
            }
        }
    }

    pub fn mean_days(&self) -> f64 {
        match *self {
            DurationDist::Uniform { min_days, max_days } => 0.5 * (min_days + max_days),
            DurationDist::Geometric { mean_days } => mean_days,
        }
    }

    pub fn in_steps(&self, hours_per_step: f64) -> StepDuration {
        match *self {
            DurationDist::Uniform { min_days, max_days } => StepDuration::Uniform {
                min_days,
                max_days,
                hours_per_step,
            },
            DurationDist::Geometric { mean_days } => {
                let mean_steps = (mean_days * 24.0 / hours_per_step).max(1.0);
                StepDuration::Geometric(Geometric::new(1.0 / mean_steps).expect("p in (0, 1]"))
            }
        }
    }
}

/// Days to whole steps: nearest integer, never less than one step.
pub fn days_to_steps(days: f64, hours_per_step: f64) -> u32 {
    ((days * 24.0 / hours_per_step).round() as u32).max(1)
}

/// A [`DurationDist`] resolved against the step length.
#[derive(Clone, Debug)]
pub enum StepDuration {
    Uniform {
        min_days: f64,
        max_days: f64,
        hours_per_step: f64,
    },
    Geometric(Geometric),
}

impl StepDuration {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            StepDuration::Uniform {
                min_days,
                max_days,
                hours_per_step,
            } => {
                let days = if max_days > min_days {
                    rng.gen_range(*min_days..=*max_days)
                } else {
                    *min_days
                };
                days_to_steps(days, *hours_per_step)
            }
            StepDuration::Geometric(g) => {
                let failures = g.sample(rng);
                u32::try_from(failures.saturating_add(1)).unwrap_or(u32::MAX)
            }
        }
    }
}

/// Configured parameters of one pathogen, in natural units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathogenParams {
    pub label: String,
    /// Per-act transmission probability when the act is protected.
    pub beta_protected: f64,
    /// Per-act transmission probability when the act is unprotected.
    pub beta_unprotected: f64,
    pub exposure: DurationDist,
    pub infectious: DurationDist,
    /// Probability of dying when an infectious episode ends.
    pub mortality_on_recovery: f64,
    /// Fraction of the initial population seeded infectious.
    #[serde(default = "default_prevalence")]
    pub initial_prevalence: f64,
}

fn default_prevalence() -> f64 {
    0.01
}

impl PathogenParams {
    pub fn chlamydia() -> Self {
        PathogenParams {
            label: "chlamydia".into(),
            beta_protected: 0.02,
            beta_unprotected: 1.0,
            exposure: DurationDist::uniform(7.0, 14.0),
            infectious: DurationDist::uniform(0.0, 1.0),
            mortality_on_recovery: 1.8e-6,
            initial_prevalence: default_prevalence(),
        }
    }

    pub fn gonorrhea() -> Self {
        PathogenParams {
            label: "gonorrhea".into(),
            beta_protected: 0.02,
            beta_unprotected: 1.0,
            exposure: DurationDist::uniform(2.0, 14.0),
            infectious: DurationDist::uniform(0.0, 2.0),
            mortality_on_recovery: 0.0,
            initial_prevalence: default_prevalence(),
        }
    }

    pub fn syphilis() -> Self {
        PathogenParams {
            label: "syphilis".into(),
            beta_protected: 0.02,
            beta_unprotected: 1.0,
            exposure: DurationDist::uniform(1.0, 9.0),
            infectious: DurationDist::uniform(0.0, 2.0),
            mortality_on_recovery: 0.0,
            initial_prevalence: default_prevalence(),
        }
    }

    pub fn kinetics(&self, hours_per_step: f64) -> PathogenKinetics {
        PathogenKinetics {
            beta_protected: self.beta_protected,
            beta_unprotected: self.beta_unprotected,
            exposure: self.exposure.in_steps(hours_per_step),
            infectious: self.infectious.in_steps(hours_per_step),
            mortality: self.mortality_on_recovery,
        }
    }
}

/// Step-resolved pathogen parameters used by the state machine.
#[derive(Clone, Debug)]
pub struct PathogenKinetics {
    pub beta_protected: f64,
    pub beta_unprotected: f64,
    pub exposure: StepDuration,
    pub infectious: StepDuration,
    pub mortality: f64,
}

impl PathogenKinetics {
    pub fn beta(&self, protected: bool) -> f64 {
        if protected {
            self.beta_protected
        } else {
            self.beta_unprotected
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Susceptible,
    Exposed { remaining: u32 },
    Infectious { remaining: u32 },
}

impl Status {
    /// Base-3 digit used by the partition encoding (S = 0, E = 1, I = 2).
    pub fn trit(self) -> u32 {
        match self {
            Status::Susceptible => 0,
            Status::Exposed { .. } => 1,
            Status::Infectious { .. } => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpiEventKind {
    Exposure,
    BecameInfectious,
    RecoveredToSusceptible,
    DiseaseDeath,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EpiEvent {
    pub kind: EpiEventKind,
    pub pathogen: PathogenId,
    pub step: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EpiError {
    #[error("agent is dead")]
    Dead,
    #[error("pathogen {0} out of range")]
    UnknownPathogen(usize),
    #[error("pathogen {pathogen} is {status:?}, expected Susceptible")]
    NotSusceptible { pathogen: usize, status: Status },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpiState {
    statuses: Vec<Status>,
    alive: bool,
}

impl EpiState {
    pub fn susceptible(k: usize) -> Self {
        EpiState {
            statuses: vec![Status::Susceptible; k],
            alive: true,
        }
    }

    pub fn from_statuses(statuses: Vec<Status>) -> Self {
        EpiState {
            statuses,
            alive: true,
        }
    }

    pub fn pathogens(&self) -> usize {
        self.statuses.len()
    }

    pub fn statuses(&self) -> &[Status] {
        &self.statuses
    }

    pub fn status(&self, p: PathogenId) -> Status {
        self.statuses[p.0]
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    pub fn is_all_susceptible(&self) -> bool {
        self.statuses.iter().all(|s| *s == Status::Susceptible)
    }

    pub fn any_infectious(&self) -> bool {
        self.statuses
            .iter()
            .any(|s| matches!(s, Status::Infectious { .. }))
    }

    pub fn any_exposed(&self) -> bool {
        self.statuses
            .iter()
            .any(|s| matches!(s, Status::Exposed { .. }))
    }

    /// Exposed or infectious for at least one pathogen.
    pub fn is_carrier(&self) -> bool {
        !self.is_all_susceptible()
    }

    /// Base-3 code of the (s, e, i) partition, pathogen 0 least significant.
    pub fn partition_code(&self) -> u32 {
        self.statuses
            .iter()
            .rev()
            .fold(0, |code, s| code * 3 + s.trit())
    }

    /// Pathogen indices split into (susceptible, exposed, infectious).
    pub fn partition(&self) -> (Vec<PathogenId>, Vec<PathogenId>, Vec<PathogenId>) {
        let mut parts = (Vec::new(), Vec::new(), Vec::new());
        for (j, s) in self.statuses.iter().enumerate() {
            match s {
                Status::Susceptible => parts.0.push(PathogenId(j)),
                Status::Exposed { .. } => parts.1.push(PathogenId(j)),
                Status::Infectious { .. } => parts.2.push(PathogenId(j)),
            }
        }
        parts
    }

    /// Removes the agent from the epidemic (natural death). Statuses are kept
    /// for bookkeeping but no longer change.
    pub fn kill(&mut self) {
        self.alive = false;
    }

    fn check(&self, p: PathogenId) -> Result<(), EpiError> {
        if !self.alive {
            return Err(EpiError::Dead);
        }
        if p.0 >= self.statuses.len() {
            return Err(EpiError::UnknownPathogen(p.0));
        }
        Ok(())
    }

    /// Susceptible -> Exposed for pathogen `p`, with a freshly sampled timer.
    pub fn expose<R: Rng + ?Sized>(
        &mut self,
        p: PathogenId,
        kinetics: &PathogenKinetics,
        rng: &mut R,
    ) -> Result<(), EpiError> {
        self.check(p)?;
        match self.statuses[p.0] {
            Status::Susceptible => {
                self.statuses[p.0] = Status::Exposed {
                    remaining: kinetics.exposure.sample(rng),
                };
                Ok(())
            }
            status => Err(EpiError::NotSusceptible {
                pathogen: p.0,
                status,
            }),
        }
    }

    /// Susceptible -> Infectious directly; used to seed initial cases.
    pub fn seed_infectious<R: Rng + ?Sized>(
        &mut self,
        p: PathogenId,
        kinetics: &PathogenKinetics,
        rng: &mut R,
    ) -> Result<(), EpiError> {
        self.check(p)?;
        match self.statuses[p.0] {
            Status::Susceptible => {
                self.statuses[p.0] = Status::Infectious {
                    remaining: kinetics.infectious.sample(rng),
                };
                Ok(())
            }
            status => Err(EpiError::NotSusceptible {
                pathogen: p.0,
                status,
            }),
        }
    }

    /// Advances every stage timer by one step, appending the resulting events
    /// to `events`. A stage entered during this call is not decremented until
    /// the next call. Processing stops at the first disease death.
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        kinetics: &[PathogenKinetics],
        step: u64,
        rng: &mut R,
        events: &mut Vec<EpiEvent>,
    ) {
        if !self.alive {
            return;
        }
        for (j, kin) in kinetics.iter().enumerate() {
            let pathogen = PathogenId(j);
            match self.statuses[j] {
                Status::Susceptible => {}
                Status::Exposed { remaining } => {
                    if remaining <= 1 {
                        self.statuses[j] = Status::Infectious {
                            remaining: kin.infectious.sample(rng),
                        };
                        events.push(EpiEvent {
                            kind: EpiEventKind::BecameInfectious,
                            pathogen,
                            step,
                        });
                    } else {
                        self.statuses[j] = Status::Exposed {
                            remaining: remaining - 1,
                        };
                    }
                }
                Status::Infectious { remaining } => {
                    if remaining <= 1 {
                        if kin.mortality > 0.0 && rng.gen_bool(kin.mortality) {
                            self.alive = false;
                            events.push(EpiEvent {
                                kind: EpiEventKind::DiseaseDeath,
                                pathogen,
                                step,
                            });
                            return;
                        }
                        self.statuses[j] = Status::Susceptible;
                        events.push(EpiEvent {
                            kind: EpiEventKind::RecoveredToSusceptible,
                            pathogen,
                            step,
                        });
                    } else {
                        self.statuses[j] = Status::Infectious {
                            remaining: remaining - 1,
                        };
                    }
                }
            }
        }
    }

    /// Value-style wrapper around [`EpiState::advance`].
    pub fn step_epi<R: Rng + ?Sized>(
        mut self,
        kinetics: &[PathogenKinetics],
        step: u64,
        rng: &mut R,
    ) -> (EpiState, Vec<EpiEvent>) {
        let mut events = Vec::new();
        self.advance(kinetics, step, rng, &mut events);
        (self, events)
    }
}

/// One sexual act between `a` and `b`. For every pathogen where exactly one
/// side is infectious and the other susceptible, the susceptible side is
/// exposed with the per-act probability for the act's protection. Returns the
/// exposure events of `a` and `b` respectively.
pub fn transmit<R: Rng + ?Sized>(
    a: &mut EpiState,
    b: &mut EpiState,
    protected: bool,
    kinetics: &[PathogenKinetics],
    step: u64,
    rng: &mut R,
) -> (Vec<EpiEvent>, Vec<EpiEvent>) {
    let mut to_a = Vec::new();
    let mut to_b = Vec::new();
    if !a.alive || !b.alive {
        return (to_a, to_b);
    }
    for (j, kin) in kinetics.iter().enumerate() {
        let (sa, sb) = (a.statuses[j], b.statuses[j]);
        let (target, events) = match (sa, sb) {
            (Status::Infectious { .. }, Status::Susceptible) => (&mut *b, &mut to_b),
            (Status::Susceptible, Status::Infectious { .. }) => (&mut *a, &mut to_a),
            _ => continue,
        };
        let beta = kin.beta(protected);
        if beta > 0.0 && rng.gen_bool(beta.min(1.0)) {
            target.statuses[j] = Status::Exposed {
                remaining: kin.exposure.sample(rng),
            };
            events.push(EpiEvent {
                kind: EpiEventKind::Exposure,
                pathogen: PathogenId(j),
                step,
            });
        }
    }
    (to_a, to_b)
}
