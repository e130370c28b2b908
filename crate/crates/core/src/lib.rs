//! Agent-based simulation of multi-pathogen sexually transmitted infection
//! spread over a two-layer partnership graph, with dating-app driven partner
//! discovery and app-side intervention policies.
//!
//! The crate is organised bottom-up:
//!
//! * [`epi`]: per-agent, per-pathogen S/E/I state machine.
//! * [`graph`]: steady (L1) and casual (L2) partnership layers and the
//!   partner-seeking process.
//! * [`app`]: attractiveness, app matching, usage reinforcement, the weekly
//!   interaction cap and periodic STI-free certification.
//! * [`engine`]: the population, the per-step phase loop and replications.
//! * [`meanfield`]: the compartment ODE over all (s, e, i) partitions, used
//!   as an independent oracle for the agent model.
//!
//! Symbol note: the source model reuses several Greek letters for unrelated
//! quantities. This crate names every quantity by role instead. In
//! particular the "immunity decay" duration is used as the infectious-period
//! length, the per-pathogen "mortality" is a death probability applied on
//! leaving the infectious state, and the weekly app interaction cap is a
//! separate knob ([`config::SimConfig::interaction_cap`]).

pub mod app;
pub mod config;
pub mod engine;
pub mod epi;
pub mod graph;
pub mod meanfield;
pub mod metrics;
pub mod rng;
pub mod stats;

pub use app::{AppPolicy, AppProfile, AttractivenessModel, Demographics, Gender, GenderPreference};
pub use config::{ConfigError, ContactMode, SimConfig};
pub use engine::{run, run_replications, Agent, ReplicationSummary, World};
pub use epi::{DurationDist, EpiEvent, EpiEventKind, EpiState, PathogenId, PathogenParams, Status};
pub use graph::{AgentId, Layer, SeekingState, TwoLayerGraph};
pub use metrics::{MetricsRow, MetricsSeries};
