//! Per-step metrics and the reproduction-number estimate.
//!
//! `R_t = (I(t) - I(t-1) + S(t) - S(t-1)) / I(t-1)` where `I` counts agents
//! infected by any pathogen and `S` counts agents that have recovered back to
//! full susceptibility. Here "infected" means carrying at least one pathogen
//! (exposed or infectious) and `S` is cumulative, so the numerator is the
//! number of newly infected agents minus carriers removed by death, and R_t
//! is new infections per current carrier per step.

use serde::Serialize;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MetricsRow {
    pub step: u64,
    pub population: u64,
    /// Susceptible to every pathogen.
    pub susceptible: u64,
    /// Exposed to at least one pathogen and infectious for none.
    pub exposed: u64,
    /// Infectious for at least one pathogen.
    pub infectious: u64,
    /// exposed + infectious.
    pub carriers: u64,
    /// Cumulative count of carriers that returned to full susceptibility.
    pub cleared_total: u64,
    /// Exposure events this step, summed over pathogens.
    pub new_infections: u64,
    /// Agents that went from fully susceptible to carrier this step.
    pub new_carriers: u64,
    pub newly_infectious: u64,
    pub recoveries: u64,
    pub births: u64,
    pub disease_deaths: u64,
    pub natural_deaths: u64,
    pub interactions: u64,
    pub app_users: u64,
    pub app_matches: u64,
    pub app_interactions: u64,
    pub steady_edges: u64,
    pub active_casual_edges: u64,
    pub exposed_by_pathogen: Vec<u64>,
    pub infectious_by_pathogen: Vec<u64>,
    pub newly_infectious_by_pathogen: Vec<u64>,
    pub recoveries_by_pathogen: Vec<u64>,
    /// Agents infectious for the pathogen that left the population this step.
    pub infectious_removed_by_pathogen: Vec<u64>,
    pub r_t: Option<f64>,
    /// The population died out during this step.
    pub extinct: bool,
}

impl MetricsRow {
    pub fn with_pathogens(k: usize) -> Self {
        MetricsRow {
            exposed_by_pathogen: vec![0; k],
            infectious_by_pathogen: vec![0; k],
            newly_infectious_by_pathogen: vec![0; k],
            recoveries_by_pathogen: vec![0; k],
            infectious_removed_by_pathogen: vec![0; k],
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MetricsSeries {
    pub pathogen_labels: Vec<String>,
    /// State before the first step.
    pub initial: MetricsRow,
    pub rows: Vec<MetricsRow>,
    /// Mean R_t over defined steps after burn-in; `None` when no step had a
    /// carrier at its start.
    pub expected_rt: Option<f64>,
    pub terminated_early: bool,
}

impl MetricsSeries {
    /// Fills every row's `r_t` and the series' `expected_rt`.
    pub fn compute_rt(&mut self, burn_in: u64) {
        let infected: Vec<f64> = std::iter::once(&self.initial)
            .chain(&self.rows)
            .map(|r| r.carriers as f64)
            .collect();
        let recovered: Vec<f64> = std::iter::once(&self.initial)
            .chain(&self.rows)
            .map(|r| r.cleared_total as f64)
            .collect();
        let rt = reproduction_numbers(&infected, &recovered);
        for (row, r) in self.rows.iter_mut().zip(&rt) {
            row.r_t = *r;
        }
        self.expected_rt = expected_rt(&rt, burn_in as usize);
    }
}

/// Per-step R_t from aligned `I` and `S` series (index 0 is the initial
/// state). Entry `t - 1` of the result is R_t, or `None` when `I(t-1) = 0`.
pub fn reproduction_numbers(infected: &[f64], recovered: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(infected.len(), recovered.len(), "series lengths differ");
    (1..infected.len())
        .map(|t| {
            let prev = infected[t - 1];
            (prev > 0.0).then(|| {
                (infected[t] - infected[t - 1] + recovered[t] - recovered[t - 1]) / prev
            })
        })
        .collect()
}

/// Arithmetic mean of the defined R_t values after skipping `burn_in` steps.
pub fn expected_rt(rt: &[Option<f64>], burn_in: usize) -> Option<f64> {
    let defined: Vec<f64> = rt.iter().skip(burn_in).flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}
