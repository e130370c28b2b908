//! Compartment ODE over every (s, e, i) partition of the pathogen set.
//!
//! A partition is stored as a base-3 code over `k` trits: pathogen `j` is
//! digit `j` (least significant first) with S = 0, E = 1, I = 2. Rates are per
//! day; [`integrate`] is a fixed-step classical RK4.

use std::io::{self, Write};

use thiserror::Error;

use crate::epi::PathogenParams;

pub const MAX_PATHOGENS: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum MeanFieldError {
    #[error("k = {0} pathogens exceeds the limit of {MAX_PATHOGENS}")]
    TooManyPathogens(usize),
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("end time {tf} must exceed start time {t0}")]
    InvalidHorizon { t0: f64, tf: f64 },
    #[error("occupancy vector has {got} entries, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("integration diverged at t = {t}: compartment {code} is {value}")]
    Diverged { t: f64, code: usize, value: f64 },
    #[error("horizon mismatch: ODE has {ode} points, ABM replication {rep} has {abm}")]
    HorizonMismatch { ode: usize, rep: usize, abm: usize },
    #[error("no ABM replications to compare against")]
    NoReplications,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Susceptible,
    Exposed,
    Infectious,
}

impl Stage {
    fn from_trit(t: usize) -> Stage {
        match t {
            0 => Stage::Susceptible,
            1 => Stage::Exposed,
            _ => Stage::Infectious,
        }
    }

    fn trit(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionState {
    pub code: usize,
    pub k: usize,
}

fn pow3(j: usize) -> usize {
    3usize.pow(j as u32)
}

impl PartitionState {
    pub fn encode(stages: &[Stage]) -> PartitionState {
        let code = stages.iter().rev().fold(0, |acc, s| acc * 3 + s.trit());
        PartitionState { code, k: stages.len() }
    }

    pub fn decode(self) -> Vec<Stage> {
        (0..self.k).map(|j| self.stage(j)).collect()
    }

    pub fn stage(self, j: usize) -> Stage {
        Stage::from_trit(self.code / pow3(j) % 3)
    }

    pub fn with_stage(self, j: usize, stage: Stage) -> PartitionState {
        let old = self.stage(j).trit();
        PartitionState {
            code: self.code - old * pow3(j) + stage.trit() * pow3(j),
            k: self.k,
        }
    }

    /// Pathogen indices in s, e and i.
    pub fn sets(self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut out = (Vec::new(), Vec::new(), Vec::new());
        for j in 0..self.k {
            match self.stage(j) {
                Stage::Susceptible => out.0.push(j),
                Stage::Exposed => out.1.push(j),
                Stage::Infectious => out.2.push(j),
            }
        }
        out
    }
}

/// All 3^k partitions in ascending code order.
pub fn enumerate_states(k: usize) -> Result<Vec<PartitionState>, MeanFieldError> {
    if k > MAX_PATHOGENS {
        return Err(MeanFieldError::TooManyPathogens(k));
    }
    Ok((0..pow3(k)).map(|code| PartitionState { code, k }).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompartmentVector {
    pub occupancy: Vec<f64>,
    /// Cumulative dead mass (disease and natural).
    pub dead: f64,
}

impl CompartmentVector {
    pub fn zeros(k: usize) -> CompartmentVector {
        CompartmentVector {
            occupancy: vec![0.0; pow3(k)],
            dead: 0.0,
        }
    }

    pub fn live_mass(&self) -> f64 {
        self.occupancy.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.live_mass() + self.dead
    }

    /// Share of the live mass infectious for pathogen `j`.
    pub fn infectious_fraction(&self, k: usize, j: usize) -> f64 {
        let live = self.live_mass();
        if live == 0.0 {
            return 0.0;
        }
        let infectious: f64 = self
            .occupancy
            .iter()
            .enumerate()
            .filter(|(code, _)| PartitionState { code: *code, k }.stage(j) == Stage::Infectious)
            .map(|(_, p)| p)
            .sum();
        infectious / live
    }

    fn axpy(&self, a: f64, d: &CompartmentVector) -> CompartmentVector {
        CompartmentVector {
            occupancy: self
                .occupancy
                .iter()
                .zip(&d.occupancy)
                .map(|(x, dx)| x + a * dx)
                .collect(),
            dead: self.dead + a * d.dead,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathogenRates {
    /// Transmission (beta).
    pub transmission: f64,
    /// E to I (phi).
    pub activation: f64,
    /// I to S (psi).
    pub recovery: f64,
    /// Disease death from I (mu).
    pub mortality: f64,
}

impl PathogenRates {
    /// Per-day rates matching the agent model's mean stage durations; the
    /// death probability on leaving I is split off the I exit rate.
    pub fn from_params(p: &PathogenParams, transmission: f64) -> PathogenRates {
        let exit = 1.0 / p.infectious.mean_days();
        PathogenRates {
            transmission,
            activation: 1.0 / p.exposure.mean_days(),
            recovery: exit * (1.0 - p.mortality_on_recovery),
            mortality: exit * p.mortality_on_recovery,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BirthMode {
    /// Newborns enter the all-susceptible compartment at rate alpha * N.
    #[default]
    AllSusceptible,
    /// Every compartment receives alpha * N, as the birth sum is written.
    EveryCompartment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Force of infection for j is beta_j times all mass infectious for j.
    #[default]
    MassAction,
    /// A susceptible-for-j compartment is paired only with the compartment
    /// equal to it except that j is infectious.
    PairedCompartments,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldParams {
    pub pathogens: Vec<PathogenRates>,
    pub birth_rate: f64,
    pub natural_death_rate: f64,
    pub birth_mode: BirthMode,
    pub coupling: Coupling,
}

impl MeanFieldParams {
    pub fn k(&self) -> usize {
        self.pathogens.len()
    }
}

pub fn derivative(v: &CompartmentVector, params: &MeanFieldParams) -> CompartmentVector {
    let k = params.k();
    let n = v.occupancy.len();
    debug_assert_eq!(n, pow3(k));
    let mut d = CompartmentVector {
        occupancy: vec![0.0; n],
        dead: 0.0,
    };
    let live = v.live_mass();

    match params.birth_mode {
        BirthMode::AllSusceptible => d.occupancy[0] += params.birth_rate * live,
        BirthMode::EveryCompartment => d.occupancy.iter_mut().for_each(|x| *x += params.birth_rate * live),
    }

    let force: Vec<f64> = (0..k)
        .map(|j| {
            let infectious: f64 = (0..n)
                .filter(|&c| PartitionState { code: c, k }.stage(j) == Stage::Infectious)
                .map(|c| v.occupancy[c])
                .sum();
            params.pathogens[j].transmission * infectious
        })
        .collect();

    for (code, &p) in v.occupancy.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let x = PartitionState { code, k };
        for (j, rates) in params.pathogens.iter().enumerate() {
            let (to, flow) = match x.stage(j) {
                Stage::Susceptible => {
                    let lambda = match params.coupling {
                        Coupling::MassAction => force[j],
                        Coupling::PairedCompartments => {
                            rates.transmission * v.occupancy[x.with_stage(j, Stage::Infectious).code]
                        }
                    };
                    (x.with_stage(j, Stage::Exposed), lambda * p)
                }
                Stage::Exposed => (x.with_stage(j, Stage::Infectious), rates.activation * p),
                Stage::Infectious => {
                    let died = rates.mortality * p;
                    d.occupancy[code] -= died;
                    d.dead += died;
                    (x.with_stage(j, Stage::Susceptible), rates.recovery * p)
                }
            };
            d.occupancy[code] -= flow;
            d.occupancy[to.code] += flow;
        }
        let natural = params.natural_death_rate * p;
        d.occupancy[code] -= natural;
        d.dead += natural;
    }
    d
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub k: usize,
    pub times: Vec<f64>,
    pub states: Vec<CompartmentVector>,
    /// Clamped negative occupancies larger than 1e-9 in magnitude.
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &CompartmentVector {
        self.states.last().expect("trajectory includes the initial state")
    }

    pub fn infectious_fraction(&self, j: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.infectious_fraction(self.k, j)).collect()
    }

    /// Long-format CSV `t,state_code,occupancy`; dead mass uses the code
    /// `dead`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,state_code,occupancy")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            for (code, p) in s.occupancy.iter().enumerate() {
                writeln!(out, "{t},{code},{p}")?;
            }
            writeln!(out, "{t},dead,{}", s.dead)?;
        }
        Ok(())
    }
}

const CLAMP_WARN: f64 = 1e-9;

fn rk4_step(v: &CompartmentVector, params: &MeanFieldParams, h: f64) -> CompartmentVector {
    let k1 = derivative(v, params);
    let k2 = derivative(&v.axpy(h / 2.0, &k1), params);
    let k3 = derivative(&v.axpy(h / 2.0, &k2), params);
    let k4 = derivative(&v.axpy(h, &k3), params);
    CompartmentVector {
        occupancy: (0..v.occupancy.len())
            .map(|c| {
                v.occupancy[c] + h / 6.0 * (k1.occupancy[c] + 2.0 * k2.occupancy[c] + 2.0 * k3.occupancy[c] + k4.occupancy[c])
            })
            .collect(),
        dead: v.dead + h / 6.0 * (k1.dead + 2.0 * k2.dead + 2.0 * k3.dead + k4.dead),
    }
}

/// Integrates from `t0` to `tf` with `round((tf - t0) / h)` equal steps,
/// recording every step.
pub fn integrate(
    v0: &CompartmentVector,
    params: &MeanFieldParams,
    t0: f64,
    tf: f64,
    h: f64,
) -> Result<Trajectory, MeanFieldError> {
    let k = params.k();
    if k > MAX_PATHOGENS {
        return Err(MeanFieldError::TooManyPathogens(k));
    }
    if v0.occupancy.len() != pow3(k) {
        return Err(MeanFieldError::LengthMismatch {
            got: v0.occupancy.len(),
            expected: pow3(k),
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(MeanFieldError::InvalidStep(h));
    }
    if !(tf > t0) {
        return Err(MeanFieldError::InvalidHorizon { t0, tf });
    }
    let steps = ((tf - t0) / h).round().max(1.0) as usize;
    let h = (tf - t0) / steps as f64;
    let mut traj = Trajectory {
        k,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        warnings: Vec::new(),
    };
    traj.times.push(t0);
    traj.states.push(v0.clone());
    let mut v = v0.clone();
    for n in 1..=steps {
        let t = t0 + n as f64 * h;
        v = rk4_step(&v, params, h);
        for (code, x) in v.occupancy.iter_mut().enumerate() {
            if !x.is_finite() {
                return Err(MeanFieldError::Diverged { t, code, value: *x });
            }
            if *x < 0.0 {
                if *x < -CLAMP_WARN {
                    traj.warnings.push(format!("t = {t}: compartment {code} clamped from {x}"));
                }
                *x = 0.0;
            }
        }
        traj.times.push(t);
        traj.states.push(v.clone());
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub points: usize,
    /// Largest |ODE - ABM mean| over time points.
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Share of time points where the ODE lies within the ABM mean +- 3 std.
    pub band_fraction: f64,
}

/// Compares an ODE prevalence curve against ABM replications sampled on the
/// same time grid.
pub fn compare_abm(ode: &[f64], abm_reps: &[Vec<f64>]) -> Result<DeviationReport, MeanFieldError> {
    if abm_reps.is_empty() {
        return Err(MeanFieldError::NoReplications);
    }
    for (rep, r) in abm_reps.iter().enumerate() {
        if r.len() != ode.len() {
            return Err(MeanFieldError::HorizonMismatch {
                ode: ode.len(),
                rep,
                abm: r.len(),
            });
        }
    }
    let mut max_abs: f64 = 0.0;
    let mut sum_abs = 0.0;
    let mut inside = 0;
    for (t, &y) in ode.iter().enumerate() {
        let column: Vec<f64> = abm_reps.iter().map(|r| r[t]).collect();
        let mean = crate::stats::mean(&column);
        let sd = crate::stats::sample_std(&column);
        let dev = (y - mean).abs();
        max_abs = max_abs.max(dev);
        sum_abs += dev;
        if dev <= 3.0 * sd {
            inside += 1;
        }
    }
    let points = ode.len();
    Ok(DeviationReport {
        points,
        max_abs,
        mean_abs: if points == 0 { 0.0 } else { sum_abs / points as f64 },
        band_fraction: if points == 0 { 1.0 } else { inside as f64 / points as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rates(beta: f64, phi: f64, psi: f64, mu: f64) -> PathogenRates {
        PathogenRates {
            transmission: beta,
            activation: phi,
            recovery: psi,
            mortality: mu,
        }
    }

    fn params(p: Vec<PathogenRates>, alpha: f64, upsilon: f64) -> MeanFieldParams {
        MeanFieldParams {
            pathogens: p,
            birth_rate: alpha,
            natural_death_rate: upsilon,
            birth_mode: BirthMode::AllSusceptible,
            coupling: Coupling::MassAction,
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_states(0).unwrap().len(), 1);
        assert_eq!(enumerate_states(2).unwrap().len(), 9);
        assert_eq!(enumerate_states(3).unwrap().len(), 27);
        assert_eq!(enumerate_states(13), Err(MeanFieldError::TooManyPathogens(13)));
    }

    #[test]
    fn k2_states_are_the_nine_partitions() {
        let mut seen: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> =
            enumerate_states(2).unwrap().into_iter().map(|s| s.sets()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 9);
        for (s, e, i) in seen {
            let mut all: Vec<usize> = s.iter().chain(&e).chain(&i).copied().collect();
            all.sort();
            assert_eq!(all, vec![0, 1]);
        }
    }

    #[test]
    fn encode_decode_roundtrip() {
        for k in 0..=6 {
            for s in enumerate_states(k).unwrap() {
                assert_eq!(PartitionState::encode(&s.decode()), s);
            }
        }
        let s = PartitionState::encode(&[Stage::Exposed, Stage::Susceptible, Stage::Infectious]);
        assert_eq!(s.code, 1 + 2 * 9);
    }

    #[test]
    fn zero_state_zero_derivative() {
        let p = params(vec![rates(1.0, 1.0, 1.0, 0.1); 2], 0.1, 0.1);
        let d = derivative(&CompartmentVector::zeros(2), &p);
        assert!(d.occupancy.iter().all(|&x| x == 0.0));
        assert_eq!(d.dead, 0.0);
    }

    #[test]
    fn k1_matches_seis_by_hand() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (beta, phi, psi, mu, alpha, ups) = (
                rng.gen::<f64>(),
                rng.gen::<f64>(),
                rng.gen::<f64>(),
                rng.gen::<f64>(),
                rng.gen::<f64>(),
                rng.gen::<f64>(),
            );
            let (s, e, i) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let n = s + e + i;
            let ds = alpha * n + psi * i - beta * s * i - ups * s;
            let de = beta * s * i - phi * e - ups * e;
            let di = phi * e - psi * i - mu * i - ups * i;
            let ddead = mu * i + ups * n;
            for coupling in [Coupling::MassAction, Coupling::PairedCompartments] {
                let mut p = params(vec![rates(beta, phi, psi, mu)], alpha, ups);
                p.coupling = coupling;
                let v = CompartmentVector {
                    occupancy: vec![s, e, i],
                    dead: 0.0,
                };
                let d = derivative(&v, &p);
                for (got, want) in d.occupancy.iter().zip([ds, de, di]) {
                    assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
                }
                assert!((d.dead - ddead).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn closed_system_conserves_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for coupling in [Coupling::MassAction, Coupling::PairedCompartments] {
            let mut p = params(
                (0..3).map(|_| rates(rng.gen_range(0.0..2.0), rng.gen(), rng.gen(), 0.0)).collect(),
                0.0,
                0.0,
            );
            p.coupling = coupling;
            let mut v = CompartmentVector::zeros(3);
            v.occupancy.iter_mut().for_each(|x| *x = rng.gen::<f64>() / 27.0);
            let m0 = v.total_mass();
            let d = derivative(&v, &p);
            assert!(d.occupancy.iter().sum::<f64>().abs() < 1e-12);
            let traj = integrate(&v, &p, 0.0, 365.0, 0.05).unwrap();
            for s in &traj.states {
                assert!(((s.total_mass() - m0) / m0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn births_and_deaths_balance_in_total_derivative() {
        let p = params(vec![rates(0.5, 0.3, 0.2, 0.05); 2], 0.01, 0.02);
        let mut v = CompartmentVector::zeros(2);
        v.occupancy.iter_mut().enumerate().for_each(|(c, x)| *x = 0.1 + c as f64 * 0.01);
        let d = derivative(&v, &p);
        let live = v.live_mass();
        // live change = births - all deaths; dead change = all deaths
        assert!((d.occupancy.iter().sum::<f64>() + d.dead - 0.01 * live).abs() < 1e-12);

        let mut every = p.clone();
        every.birth_mode = BirthMode::EveryCompartment;
        let d2 = derivative(&v, &every);
        assert!((d2.occupancy.iter().sum::<f64>() + d2.dead - 9.0 * 0.01 * live).abs() < 1e-12);
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let p = params(vec![rates(1.0, 1.0, 1.0, 0.0)], 0.1, 0.1);
        let traj = integrate(&CompartmentVector::zeros(1), &p, 0.0, 5.0, 0.1).unwrap();
        assert_eq!(traj.states.len(), 51);
        assert!(traj.states.iter().all(|s| s.total_mass() == 0.0));
    }

    #[test]
    fn infectious_decays_exponentially_without_transmission() {
        let (psi, mu, ups) = (0.3, 0.05, 0.01);
        let p = params(vec![rates(0.0, 0.7, psi, mu)], 0.0, ups);
        let v = CompartmentVector {
            occupancy: vec![0.0, 0.0, 1.0],
            dead: 0.0,
        };
        let traj = integrate(&v, &p, 0.0, 10.0, 1e-3).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states).step_by(500) {
            let exact = (-(psi + mu + ups) * t).exp();
            assert!(((s.occupancy[2] - exact) / exact).abs() <= 1e-6);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = params(vec![rates(3.0, 1.0, 0.5, 0.02)], 0.01, 0.01);
        let v = CompartmentVector {
            occupancy: vec![0.9, 0.05, 0.05],
            dead: 0.0,
        };
        let end = |h: f64| integrate(&v, &p, 0.0, 10.0, h).unwrap().last().occupancy.clone();
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let (a, b, c) = (end(0.2), end(0.1), end(0.05));
        let ratio = dist(&a, &b) / dist(&b, &c);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn integrate_rejects_bad_input() {
        let p = params(vec![rates(1.0, 1.0, 1.0, 0.0)], 0.0, 0.0);
        let v = CompartmentVector::zeros(1);
        assert_eq!(integrate(&v, &p, 0.0, 1.0, 0.0), Err(MeanFieldError::InvalidStep(0.0)));
        assert!(matches!(integrate(&v, &p, 1.0, 1.0, 0.1), Err(MeanFieldError::InvalidHorizon { .. })));
        assert!(matches!(
            integrate(&CompartmentVector::zeros(2), &p, 0.0, 1.0, 0.1),
            Err(MeanFieldError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn divergence_is_reported() {
        let p = params(vec![rates(1e200, 1.0, 1.0, 0.0)], 0.0, 0.0);
        let v = CompartmentVector {
            occupancy: vec![1e200, 0.0, 1e200],
            dead: 0.0,
        };
        assert!(matches!(integrate(&v, &p, 0.0, 1.0, 0.5), Err(MeanFieldError::Diverged { .. })));
    }

    #[test]
    fn table_rates_stay_nonnegative() {
        let k = 3;
        let ps = [PathogenParams::chlamydia(), PathogenParams::gonorrhea(), PathogenParams::syphilis()];
        let p = params(ps.iter().map(|x| PathogenRates::from_params(x, 0.5)).collect(), 3.24e-5, 2.27e-5);
        let mut v = CompartmentVector::zeros(k);
        v.occupancy[0] = 0.97;
        for j in 0..k {
            v.occupancy[2 * pow3(j)] = 0.01;
        }
        let traj = integrate(&v, &p, 0.0, 365.0, 1.0 / 24.0).unwrap();
        assert!(traj.warnings.is_empty(), "{:?}", &traj.warnings[..1]);
    }

    #[test]
    fn compare_abm_cases() {
        assert_eq!(compare_abm(&[0.1], &[]), Err(MeanFieldError::NoReplications));
        assert!(matches!(
            compare_abm(&[0.1, 0.2], &[vec![0.1]]),
            Err(MeanFieldError::HorizonMismatch { .. })
        ));
        let curve = vec![0.1, 0.2, 0.3];
        let r = compare_abm(&curve, &[curve.clone(), curve.clone()]).unwrap();
        assert_eq!((r.max_abs, r.mean_abs, r.band_fraction), (0.0, 0.0, 1.0));
        let r = compare_abm(&[0.0, 1.0], &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!((r.max_abs, r.mean_abs, r.band_fraction), (1.0, 0.5, 0.5));
    }

    #[test]
    fn trajectory_csv_layout() {
        let p = params(vec![rates(0.0, 1.0, 1.0, 0.0)], 0.0, 0.0);
        let v = CompartmentVector {
            occupancy: vec![1.0, 0.0, 0.0],
            dead: 0.0,
        };
        let traj = integrate(&v, &p, 0.0, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 4);
        assert!(text.starts_with("t,state_code,occupancy\n0,0,1\n"));
        assert!(text.contains("\n1,dead,0\n"));
    }
}
