//! Dating-app partner discovery and the two app-side policies.
//!
//! The population attractiveness matrix is never materialised. A pairwise
//! score is computed on demand from a gender gate and a Gaussian age kernel,
//! scaled by the population's base acceptance. Scores depend only on fixed
//! agent properties, so they are constant over a run.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::epi::EpiState;
use crate::graph::AgentId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn other(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }
}

/// Genders an agent is attracted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenderPreference {
    Men,
    Women,
    Both,
}

impl GenderPreference {
    pub fn accepts(self, g: Gender) -> bool {
        matches!(
            (self, g),
            (GenderPreference::Both, _)
                | (GenderPreference::Men, Gender::Male)
                | (GenderPreference::Women, Gender::Female)
        )
    }

    pub fn only(g: Gender) -> Self {
        match g {
            Gender::Male => GenderPreference::Men,
            Gender::Female => GenderPreference::Women,
        }
    }
}

/// Fixed personal traits that drive attraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Demographics {
    /// Age in years at step 0 of the run. Everyone ages at the same pace, so
    /// age differences (the only thing attraction uses) never change.
    pub age: f64,
    pub gender: Gender,
    pub attracted_to: GenderPreference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractivenessModel {
    pub base_acceptance: f64,
    pub age_kernel_width: f64,
}

impl Default for AttractivenessModel {
    fn default() -> Self {
        AttractivenessModel {
            base_acceptance: 0.71,
            age_kernel_width: 5.0,
        }
    }
}

/// How attractive `y` is to `x`, in [0, 1].
pub fn attractiveness(x: &Demographics, y: &Demographics, model: &AttractivenessModel) -> f64 {
    if !x.attracted_to.accepts(y.gender) {
        return 0.0;
    }
    let gap = x.age - y.age;
    let w = model.age_kernel_width;
    model.base_acceptance * (-(gap * gap) / (2.0 * w * w)).exp()
}

/// Probability that a mutual look at each other turns into a match.
pub fn match_probability(x: &Demographics, y: &Demographics, model: &AttractivenessModel) -> f64 {
    attractiveness(x, y, model) * attractiveness(y, x, model)
}

/// Policy knobs in step units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AppPolicy {
    /// Maximum app-mediated interactions in any trailing window; `None` means
    /// unlimited.
    pub interaction_cap: Option<u32>,
    /// Steps between mandatory STI-free certifications; `None` disables it.
    pub certification_interval: Option<u64>,
    /// Length of the cap window in steps (one week).
    pub window: u64,
}

impl AppPolicy {
    pub fn unrestricted(window: u64) -> Self {
        AppPolicy {
            interaction_cap: None,
            certification_interval: None,
            window,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppProfile {
    /// Probability of opening the app while seeking.
    pub usage_probability: f64,
    pub success_increment: f64,
    pub failure_decrement: f64,
    pub last_certification: Option<u64>,
    pub blocked_until_recovered: bool,
    /// Steps of app-mediated interactions inside the trailing window.
    pub weekly_log: VecDeque<u64>,
    /// The app was used during the current seeking episode.
    pub used_this_episode: bool,
    /// An app match led to an interaction during the current episode.
    pub succeeded_this_episode: bool,
}

impl AppProfile {
    pub fn new(usage_probability: f64, success_increment: f64, failure_decrement: f64) -> Self {
        AppProfile {
            usage_probability,
            success_increment,
            failure_decrement,
            last_certification: None,
            blocked_until_recovered: false,
            weekly_log: VecDeque::new(),
            used_this_episode: false,
            succeeded_this_episode: false,
        }
    }

    /// Additive reinforcement, clamped to [0, 1].
    pub fn reinforce(&mut self, success: bool) {
        let d = if success {
            self.usage_probability + self.success_increment
        } else {
            self.usage_probability - self.failure_decrement
        };
        self.usage_probability = d.clamp(0.0, 1.0);
    }

    /// Applies the episode outcome, if the app was used, and resets it.
    pub fn end_episode(&mut self) -> Option<bool> {
        let outcome = self.used_this_episode.then_some(self.succeeded_this_episode);
        if let Some(success) = outcome {
            self.reinforce(success);
        }
        self.used_this_episode = false;
        self.succeeded_this_episode = false;
        outcome
    }

    /// Certification check at step `now`. When a certificate is due, a
    /// carrier of any pathogen is blocked until a later check finds it fully
    /// susceptible; a clean agent is recertified. Returns whether the agent
    /// may use the app.
    pub fn certify(&mut self, epi: &EpiState, now: u64, interval: Option<u64>) -> bool {
        let Some(interval) = interval else {
            return true;
        };
        let due = self.blocked_until_recovered
            || self
                .last_certification
                .map_or(true, |last| now.saturating_sub(last) >= interval);
        if due {
            if epi.is_carrier() {
                self.blocked_until_recovered = true;
            } else {
                self.blocked_until_recovered = false;
                self.last_certification = Some(now);
            }
        }
        !self.blocked_until_recovered
    }

    /// True when the current certificate is older than `interval`.
    pub fn certificate_lapsed(&self, now: u64, interval: u64) -> bool {
        self.last_certification
            .map_or(true, |last| now.saturating_sub(last) >= interval)
    }

    fn prune(&mut self, now: u64, window: u64) {
        while let Some(&t) = self.weekly_log.front() {
            if now.saturating_sub(t) >= window {
                self.weekly_log.pop_front();
            } else {
                break;
            }
        }
    }

    /// Prunes the log to the trailing window and reports whether another
    /// app-mediated interaction is allowed.
    pub fn enforce_cap(&mut self, now: u64, cap: Option<u32>, window: u64) -> bool {
        self.prune(now, window);
        cap.map_or(true, |c| self.weekly_log.len() < c as usize)
    }

    pub fn record_interaction(&mut self, now: u64) {
        self.weekly_log.push_back(now);
        self.succeeded_this_episode = true;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seeker {
    pub id: AgentId,
    pub demographics: Demographics,
}

/// Immutable snapshot of the app users who are seeking and eligible this step.
#[derive(Clone, Debug, Default)]
pub struct SeekerPool {
    seekers: Vec<Seeker>,
}

impl SeekerPool {
    pub fn new(seekers: Vec<Seeker>) -> Self {
        SeekerPool { seekers }
    }

    pub fn len(&self) -> usize {
        self.seekers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seekers.is_empty()
    }

    pub fn seekers(&self) -> &[Seeker] {
        &self.seekers
    }
}

pub struct AppMatcher<'a> {
    pub pool: &'a SeekerPool,
    pub model: &'a AttractivenessModel,
    pub policy: &'a AppPolicy,
    pub max_candidates: usize,
}

impl AppMatcher<'_> {
    /// One app visit by `x`: up to `max_candidates` other pool members are
    /// drawn without replacement, and each becomes a match with probability
    /// equal to the product of the two directed attractiveness scores.
    /// A visitor who is capped or blocked by certification gets nothing.
    pub fn visit<R: Rng + ?Sized>(
        &self,
        x: &Seeker,
        profile: &mut AppProfile,
        epi: &EpiState,
        now: u64,
        rng: &mut R,
    ) -> Vec<AgentId> {
        if !profile.certify(epi, now, self.policy.certification_interval)
            || !profile.enforce_cap(now, self.policy.interaction_cap, self.policy.window)
        {
            return Vec::new();
        }
        let n = self.pool.len();
        if n == 0 || self.max_candidates == 0 {
            return Vec::new();
        }
        let want = (self.max_candidates + 1).min(n);
        let mut matches = Vec::new();
        let mut taken = 0;
        for i in index::sample(rng, n, want).into_iter() {
            let y = &self.pool.seekers[i];
            if y.id == x.id {
                continue;
            }
            if taken == self.max_candidates {
                break;
            }
            taken += 1;
            let p = match_probability(&x.demographics, &y.demographics, self.model);
            if p > 0.0 && rng.gen_bool(p.min(1.0)) {
                matches.push(y.id);
            }
        }
        matches
    }
}
