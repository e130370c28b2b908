//! Population, per-step phase loop and replications.
//!
//! Each step runs the same fixed phases:
//!
//! 1. demography: Poisson births, Bernoulli natural deaths;
//! 2. seeking updates (ending casual partnerships of agents who stop) and
//!    activation of latent casual edges between co-seeking agents;
//! 3. certification and app matching;
//! 4. layer conversion;
//! 5. interactions and transmission;
//! 6. epidemiological timers and app-usage reinforcement;
//! 7. metrics.
//!
//! Every random draw comes from the world's single RNG in a fixed order, so a
//! configuration and seed determine the whole run.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::app::{AppMatcher, AppPolicy, AppProfile, AttractivenessModel, Demographics, Gender, GenderPreference, Seeker, SeekerPool};
use crate::config::{ConfigError, ContactMode, SimConfig};
use crate::epi::{transmit, EpiEvent, EpiEventKind, EpiState, PathogenId, PathogenKinetics, Status};
use crate::graph::{init_graph, AgentId, SeekingDurations, SeekingState, SeekingToggle, TwoLayerGraph};
use crate::metrics::{MetricsRow, MetricsSeries};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::stats;

#[derive(Clone, Debug)]
pub struct Agent {
    pub id: AgentId,
    pub epi: EpiState,
    pub demographics: Demographics,
    pub seeking: SeekingState,
    pub app: AppProfile,
    /// Prefers protected sex.
    pub prefers_protected: bool,
}

impl Agent {
    pub fn is_alive(&self) -> bool {
        self.epi.is_alive()
    }
}

/// Invariant checks run every step when enabled. Violations are collected,
/// not raised, so a test can report all of them.
#[derive(Clone, Debug, Default)]
struct Audit {
    app_history: Vec<Vec<u64>>,
    violations: Vec<String>,
}

pub struct World {
    config: SimConfig,
    kinetics: Vec<PathogenKinetics>,
    durations: SeekingDurations,
    model: AttractivenessModel,
    policy: AppPolicy,
    agents: Vec<Agent>,
    alive: usize,
    graph: TwoLayerGraph,
    rng: SimRng,
    now: u64,
    cleared_total: u64,
    picked: Vec<u32>,
    events: Vec<EpiEvent>,
    audit: Option<Audit>,
    last: MetricsRow,
}

const NOBODY: u32 = u32::MAX;

fn pair_mut<T>(items: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = items.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = items.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

impl World {
    /// Builds the initial population and graph and seeds infections.
    pub fn new(config: SimConfig, seed: u64) -> Result<World, ConfigError> {
        config.validate()?;
        let kinetics: Vec<PathogenKinetics> = config
            .pathogens
            .iter()
            .map(|p| p.kinetics(config.hours_per_step))
            .collect();
        let mut world = World {
            durations: config.seeking_durations(),
            model: config.attractiveness_model(),
            policy: config.app_policy(),
            kinetics,
            agents: Vec::with_capacity(config.population),
            alive: 0,
            graph: TwoLayerGraph::default(),
            rng: rng_from_seed(seed),
            now: 0,
            cleared_total: 0,
            picked: Vec::new(),
            events: Vec::new(),
            audit: None,
            last: MetricsRow::default(),
            config,
        };
        for _ in 0..world.config.population {
            let age = world
                .rng
                .gen_range(world.config.min_age..=world.config.max_age);
            world.spawn(age);
        }
        let ids: Vec<AgentId> = world.agents.iter().map(|a| a.id).collect();
        world.graph = init_graph(
            &ids,
            world.config.steady_fraction,
            world.config.casual_degree,
            &mut world.rng,
        );
        let n = world.agents.len();
        for j in 0..world.kinetics.len() {
            let count = ((world.config.pathogens[j].initial_prevalence * n as f64).round() as usize).min(n);
            for i in index::sample(&mut world.rng, n, count).into_iter() {
                world.agents[i]
                    .epi
                    .seed_infectious(PathogenId(j), &world.kinetics[j], &mut world.rng)
                    .expect("fresh agents are susceptible");
            }
        }
        world.last = world.census(MetricsRow::with_pathogens(world.kinetics.len()));
        Ok(world)
    }

    /// Turns on per-step invariant auditing.
    pub fn enable_audit(&mut self) {
        self.audit = Some(Audit {
            app_history: vec![Vec::new(); self.agents.len()],
            violations: Vec::new(),
        });
    }

    /// Invariant violations seen so far, including the end-of-run cap window
    /// check. Empty when auditing is off.
    pub fn audit_violations(&self) -> Vec<String> {
        let Some(audit) = &self.audit else {
            return Vec::new();
        };
        let mut out = audit.violations.clone();
        if let Some(cap) = self.policy.interaction_cap {
            for (i, hist) in audit.app_history.iter().enumerate() {
                for (j, &t) in hist.iter().enumerate() {
                    let in_window = hist[j..]
                        .iter()
                        .take_while(|&&u| u < t + self.policy.window)
                        .count();
                    if in_window > cap as usize {
                        out.push(format!(
                            "agent {i}: {in_window} app interactions in the window starting at step {t} (cap {cap})"
                        ));
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id.index()]
    }

    pub fn graph(&self) -> &TwoLayerGraph {
        &self.graph
    }

    pub fn population(&self) -> usize {
        self.alive
    }

    /// Counts for the current state (step 0 before any step).
    pub fn snapshot(&self) -> &MetricsRow {
        &self.last
    }

    fn spawn(&mut self, age_now: f64) -> AgentId {
        let c = &self.config;
        let id = AgentId(self.agents.len() as u32);
        let gender = if self.rng.gen_bool(0.5) {
            Gender::Male
        } else {
            Gender::Female
        };
        let attracted_to = if self.rng.gen_bool(c.heterosexual_fraction) {
            GenderPreference::only(gender.other())
        } else if self.rng.gen_bool(0.5) {
            GenderPreference::only(gender)
        } else {
            GenderPreference::Both
        };
        let years_elapsed = self.now as f64 * c.hours_per_step / (24.0 * 365.0);
        let agent = Agent {
            id,
            epi: EpiState::susceptible(self.kinetics.len()),
            demographics: Demographics {
                age: age_now - years_elapsed,
                gender,
                attracted_to,
            },
            seeking: SeekingState::initial(&self.durations, &mut self.rng),
            app: AppProfile::new(c.initial_adoption, c.success_increment, c.failure_decrement),
            prefers_protected: self.rng.gen_bool(c.protected_fraction),
        };
        self.agents.push(agent);
        self.graph.ensure_agent(id);
        self.picked.push(NOBODY);
        if let Some(audit) = &mut self.audit {
            audit.app_history.push(Vec::new());
        }
        self.alive += 1;
        id
    }

    fn remove(&mut self, id: AgentId, row: &mut MetricsRow) {
        let agent = &mut self.agents[id.index()];
        for (j, s) in agent.epi.statuses().iter().enumerate() {
            if matches!(s, Status::Infectious { .. }) {
                row.infectious_removed_by_pathogen[j] += 1;
            }
        }
        agent.epi.kill();
        self.graph.remove_agent(id);
        self.alive -= 1;
    }

    fn violation(&mut self, msg: String) {
        if let Some(audit) = &mut self.audit {
            audit.violations.push(msg);
        }
    }

    /// Advances one step and returns its metrics row.
    pub fn step(&mut self) -> MetricsRow {
        let k = self.kinetics.len();
        let mut row = MetricsRow::with_pathogens(k);
        self.now += 1;
        let now = self.now;
        row.step = now;
        let population_before = self.alive as u64;
        let days_per_step = self.config.hours_per_step / 24.0;

        // (1) demography
        let birth_mean = self.config.birth_rate_per_day * self.alive as f64 * days_per_step;
        let births = if birth_mean > 0.0 {
            Poisson::new(birth_mean).expect("positive mean").sample(&mut self.rng) as u64
        } else {
            0
        };
        let death_p = self.config.natural_death_rate_per_day * days_per_step;
        if death_p > 0.0 {
            for i in 0..self.agents.len() {
                if self.agents[i].is_alive() && self.rng.gen_bool(death_p) {
                    self.remove(AgentId(i as u32), &mut row);
                    row.natural_deaths += 1;
                }
            }
        }
        for _ in 0..births {
            self.spawn(self.config.min_age);
        }
        row.births = births;

        // (2) seeking
        let mut stopped = Vec::new();
        let mut seekers = Vec::new();
        for i in 0..self.agents.len() {
            let agent = &mut self.agents[i];
            if !agent.is_alive() {
                continue;
            }
            match agent.seeking.update(&self.durations, &mut self.rng) {
                Some(SeekingToggle::Stopped) => {
                    self.graph.deactivate_on_stop(agent.id);
                    stopped.push(agent.id);
                }
                Some(SeekingToggle::Started) | None => {}
            }
            if agent.seeking.seeking {
                seekers.push(agent.id);
            }
        }
        let xi = self.config.casual_activation;
        if xi > 0.0 && self.config.contact_mode == ContactMode::Network {
            for &x in &seekers {
                let latent: Vec<AgentId> = self
                    .graph
                    .neighbors(x)
                    .iter()
                    .filter(|n| !n.active && x < n.id && self.agents[n.id.index()].seeking.seeking)
                    .map(|n| n.id)
                    .collect();
                for y in latent {
                    let agents = &self.agents;
                    self.graph
                        .activate_casual(x, y, xi, |a| agents[a.index()].seeking.seeking, &mut self.rng)
                        .expect("latent edge between seekers");
                }
            }
        }

        // (3) certification and app matching
        if self.config.contact_mode == ContactMode::Network {
            self.app_phase(&seekers, now, &mut row);
        }

        if self.audit.is_some() {
            let agents = &self.agents;
            if let Err(e) = self.graph.audit(|a| agents[a.index()].seeking.seeking) {
                self.violation(format!("step {now}: graph audit after matching: {e}"));
            }
        }

        // (4) layer conversion
        {
            let agents = &self.agents;
            self.graph.convert_layers(
                self.config.casual_to_steady,
                self.config.steady_to_casual,
                |a| agents[a.index()].seeking.seeking,
                &mut self.rng,
            );
        }

        // (5) interactions
        match self.config.contact_mode {
            ContactMode::Network => self.network_interactions(now, &mut row),
            ContactMode::WellMixed => self.well_mixed_interactions(now, &mut row),
        }

        // (6) timers and reinforcement
        for i in 0..self.agents.len() {
            if !self.agents[i].is_alive() {
                continue;
            }
            let was_carrier = self.agents[i].epi.is_carrier();
            if !was_carrier {
                continue;
            }
            self.events.clear();
            self.agents[i]
                .epi
                .advance(&self.kinetics, now, &mut self.rng, &mut self.events);
            let mut died = false;
            for e in &self.events {
                match e.kind {
                    EpiEventKind::BecameInfectious => {
                        row.newly_infectious += 1;
                        row.newly_infectious_by_pathogen[e.pathogen.0] += 1;
                    }
                    EpiEventKind::RecoveredToSusceptible => {
                        row.recoveries += 1;
                        row.recoveries_by_pathogen[e.pathogen.0] += 1;
                    }
                    EpiEventKind::DiseaseDeath => died = true,
                    EpiEventKind::Exposure => {}
                }
            }
            if died {
                // statuses are frozen at death; count what leaves the population
                let agent = &self.agents[i];
                for (j, s) in agent.epi.statuses().iter().enumerate() {
                    if matches!(s, Status::Infectious { .. }) {
                        row.infectious_removed_by_pathogen[j] += 1;
                    }
                }
                self.graph.remove_agent(agent.id);
                self.alive -= 1;
                row.disease_deaths += 1;
            } else if self.agents[i].epi.is_all_susceptible() {
                self.cleared_total += 1;
            }
        }
        for id in stopped {
            let agent = &mut self.agents[id.index()];
            if agent.is_alive() {
                agent.app.end_episode();
            }
        }

        // (7) metrics
        let row = self.census(row);
        if self.audit.is_some() {
            self.audit_step(population_before, &row);
        }
        self.last = row.clone();
        row
    }

    fn app_phase(&mut self, seekers: &[AgentId], now: u64, row: &mut MetricsRow) {
        let mut pool = Vec::new();
        for &x in seekers {
            let agent = &mut self.agents[x.index()];
            let d = agent.app.usage_probability;
            if d <= 0.0 || !self.rng.gen_bool(d.min(1.0)) {
                continue;
            }
            let eligible = agent
                .app
                .certify(&agent.epi, now, self.policy.certification_interval)
                && agent
                    .app
                    .enforce_cap(now, self.policy.interaction_cap, self.policy.window);
            if eligible {
                agent.app.used_this_episode = true;
                pool.push(Seeker {
                    id: x,
                    demographics: agent.demographics,
                });
            }
        }
        row.app_users = pool.len() as u64;
        if pool.len() < 2 {
            return;
        }
        let pool = SeekerPool::new(pool);
        let matcher = AppMatcher {
            pool: &pool,
            model: &self.model,
            policy: &self.policy,
            max_candidates: self.config.max_candidates,
        };
        for x in pool.seekers() {
            let agent = &mut self.agents[x.id.index()];
            let matches = matcher.visit(x, &mut agent.app, &agent.epi, now, &mut self.rng);
            for y in matches {
                if let (Some(audit), Some(interval)) = (&mut self.audit, self.policy.certification_interval) {
                    for id in [x.id, y] {
                        let a = &self.agents[id.index()];
                        if a.epi.is_carrier() && a.app.certificate_lapsed(now, interval) {
                            audit
                                .violations
                                .push(format!("step {now}: agent {id} matched with a lapsed certificate while infected"));
                        }
                    }
                }
                if self.graph.open_casual(x.id, y, true).unwrap_or(false) {
                    row.app_matches += 1;
                }
            }
        }
    }

    fn interact(&mut self, x: usize, y: usize, now: u64, row: &mut MetricsRow) {
        let (a, b) = pair_mut(&mut self.agents, x, y);
        let protected = a.prefers_protected || b.prefers_protected;
        let before = (a.epi.is_carrier(), b.epi.is_carrier());
        let (ea, eb) = transmit(&mut a.epi, &mut b.epi, protected, &self.kinetics, now, &mut self.rng);
        row.new_infections += (ea.len() + eb.len()) as u64;
        row.new_carriers += u64::from(!before.0 && a.epi.is_carrier()) + u64::from(!before.1 && b.epi.is_carrier());
        row.interactions += 1;
    }

    fn network_interactions(&mut self, now: u64, row: &mut MetricsRow) {
        self.picked.iter_mut().for_each(|p| *p = NOBODY);
        let cap = self.policy.interaction_cap;
        let window = self.policy.window;
        for x in 0..self.agents.len() {
            if !self.agents[x].is_alive() {
                continue;
            }
            let Some(nb) = self.graph.select_partner(AgentId(x as u32), &mut self.rng) else {
                continue;
            };
            let y = nb.id.index();
            if self.picked[y] == x as u32 {
                continue;
            }
            if nb.via_app {
                let (a, b) = pair_mut(&mut self.agents, x, y);
                if !(a.app.enforce_cap(now, cap, window) && b.app.enforce_cap(now, cap, window)) {
                    continue;
                }
                a.app.record_interaction(now);
                b.app.record_interaction(now);
                row.app_interactions += 1;
                if let Some(audit) = &mut self.audit {
                    audit.app_history[x].push(now);
                    audit.app_history[y].push(now);
                }
            }
            self.picked[x] = y as u32;
            self.interact(x, y, now, row);
        }
    }

    fn well_mixed_interactions(&mut self, now: u64, row: &mut MetricsRow) {
        let mut alive: Vec<usize> = (0..self.agents.len())
            .filter(|&i| self.agents[i].is_alive())
            .collect();
        alive.shuffle(&mut self.rng);
        for pair in alive.chunks_exact(2) {
            self.interact(pair[0], pair[1], now, row);
        }
    }

    fn census(&self, mut row: MetricsRow) -> MetricsRow {
        for agent in self.agents.iter().filter(|a| a.is_alive()) {
            let mut any_e = false;
            let mut any_i = false;
            for (j, s) in agent.epi.statuses().iter().enumerate() {
                match s {
                    Status::Susceptible => {}
                    Status::Exposed { .. } => {
                        any_e = true;
                        row.exposed_by_pathogen[j] += 1;
                    }
                    Status::Infectious { .. } => {
                        any_i = true;
                        row.infectious_by_pathogen[j] += 1;
                    }
                }
            }
            if any_i {
                row.infectious += 1;
            } else if any_e {
                row.exposed += 1;
            } else {
                row.susceptible += 1;
            }
        }
        row.population = self.alive as u64;
        row.carriers = row.exposed + row.infectious;
        row.cleared_total = self.cleared_total;
        row.steady_edges = self.graph.steady_count() as u64;
        row.active_casual_edges = self.graph.active_casual_count() as u64;
        row.extinct = self.alive == 0;
        row
    }

    fn audit_step(&mut self, population_before: u64, row: &MetricsRow) {
        let now = row.step;
        let mut found = Vec::new();
        let expected_pop = population_before + row.births - row.disease_deaths - row.natural_deaths;
        if row.population != expected_pop {
            found.push(format!(
                "step {now}: population {} != {population_before} + {} - {} - {}",
                row.population, row.births, row.disease_deaths, row.natural_deaths
            ));
        }
        for j in 0..self.kinetics.len() {
            let expected = self.last.infectious_by_pathogen[j] + row.newly_infectious_by_pathogen[j]
                - row.recoveries_by_pathogen[j]
                - row.infectious_removed_by_pathogen[j];
            if row.infectious_by_pathogen[j] != expected {
                found.push(format!(
                    "step {now}: pathogen {j} infectious {} != flow total {expected}",
                    row.infectious_by_pathogen[j]
                ));
            }
        }
        let k = self.kinetics.len();
        for agent in &self.agents {
            if !agent.is_alive() {
                if !self.graph.neighbors(agent.id).is_empty() {
                    found.push(format!("step {now}: dead agent {} still has edges", agent.id));
                }
                continue;
            }
            if agent.epi.pathogens() != k {
                found.push(format!("step {now}: agent {} has {} statuses", agent.id, agent.epi.pathogens()));
            }
            for s in agent.epi.statuses() {
                if matches!(s, Status::Exposed { remaining: 0 } | Status::Infectious { remaining: 0 }) {
                    found.push(format!("step {now}: agent {} has an expired timer {s:?}", agent.id));
                }
            }
            if agent.seeking.remaining == 0 {
                found.push(format!("step {now}: agent {} has a zero seeking timer", agent.id));
            }
            if !(0.0..=1.0).contains(&agent.app.usage_probability) {
                found.push(format!("step {now}: agent {} usage probability out of range", agent.id));
            }
        }
        if let Some(audit) = &mut self.audit {
            audit.violations.extend(found);
        }
    }

    /// Runs the remaining steps and returns the full series with R_t filled.
    pub fn run_to_end(mut self) -> MetricsSeries {
        let mut series = MetricsSeries {
            pathogen_labels: self.config.pathogens.iter().map(|p| p.label.clone()).collect(),
            initial: self.last.clone(),
            rows: Vec::with_capacity(self.config.steps as usize),
            expected_rt: None,
            terminated_early: false,
        };
        self.run_into(&mut series);
        series.compute_rt(self.config.burn_in_steps);
        series
    }

    /// Like [`World::run_to_end`] but keeps the world for inspection.
    pub fn run_into(&mut self, series: &mut MetricsSeries) {
        while self.now < self.config.steps {
            let row = self.step();
            let extinct = row.extinct;
            series.rows.push(row);
            if extinct {
                series.terminated_early = true;
                break;
            }
        }
    }
}

/// One full run with the configuration's own seed.
pub fn run(config: &SimConfig) -> Result<MetricsSeries, ConfigError> {
    run_with_seed(config, config.seed)
}

pub fn run_with_seed(config: &SimConfig, seed: u64) -> Result<MetricsSeries, ConfigError> {
    Ok(World::new(config.clone(), seed)?.run_to_end())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationOutcome {
    pub index: usize,
    pub seed: u64,
    pub expected_rt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationSummary {
    pub master_seed: u64,
    pub replications: Vec<ReplicationOutcome>,
    /// Mean of the defined per-replication E[R_t] values.
    pub mean: f64,
    /// Sample standard deviation of the same values (0 for one value).
    pub std: f64,
}

impl ReplicationSummary {
    pub fn from_outcomes(master_seed: u64, replications: Vec<ReplicationOutcome>) -> Self {
        let values: Vec<f64> = replications.iter().filter_map(|r| r.expected_rt).collect();
        ReplicationSummary {
            master_seed,
            mean: stats::mean(&values),
            std: stats::sample_std(&values),
            replications,
        }
    }
}

/// Seeds of the first `n_reps` replications under `master_seed`.
pub fn replication_seeds(master_seed: u64, n_reps: usize) -> Vec<u64> {
    (0..n_reps as u64).map(|i| derive_seed(master_seed, i)).collect()
}

/// Runs `n_reps` independent replications sequentially. Replication `i` is
/// seeded from `(config.seed, i)` alone.
pub fn run_replications(config: &SimConfig, n_reps: usize) -> Result<ReplicationSummary, ConfigError> {
    config.validate()?;
    let outcomes = replication_seeds(config.seed, n_reps)
        .into_iter()
        .enumerate()
        .map(|(index, seed)| {
            run_with_seed(config, seed).map(|s| ReplicationOutcome {
                index,
                seed,
                expected_rt: s.expected_rt,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReplicationSummary::from_outcomes(config.seed, outcomes))
}
