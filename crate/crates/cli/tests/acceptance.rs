//! Acceptance harness. Prints one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=1,4` restricts the run to the listed criteria.
//! `ACCEPTANCE_STRICT=1` makes any FAIL exit nonzero.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use stinet_cli::experiments::{oracle_config, run_oracle, run_preset, PresetOutcome, RunOptions};
use stinet_cli::presets::{ExperimentPreset, PresetName};
use stinet_core::engine::replication_seeds;
use stinet_core::epi::transmit;
use stinet_core::meanfield::{
    derivative, enumerate_states, integrate, BirthMode, CompartmentVector, Coupling, MeanFieldParams, PathogenRates,
};
use stinet_core::rng::SimRng;
use stinet_core::stats::{binomial_sd, spearman};
use stinet_core::{AgentId, EpiState, Layer, MetricsSeries, PathogenId, PathogenParams, SimConfig, TwoLayerGraph, World};

const REPS: usize = 20;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sweep(name: PresetName) -> PresetOutcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let opts = RunOptions {
        reps: REPS,
        workers: workers(),
        out_dir: dir.path().to_path_buf(),
        plot: false,
    };
    run_preset(&ExperimentPreset::named(name), &SimConfig::desk_scale(), &opts).expect("sweep runs")
}

fn means(o: &PresetOutcome) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        o.summary.iter().map(|r| r.sweep_value).collect(),
        o.summary.iter().map(|r| r.mean_e_rt).collect(),
        o.summary.iter().map(|r| r.std_e_rt).collect(),
    )
}

fn fmt_curve(xs: &[f64], ys: &[f64]) -> String {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| format!("{x}:{y:.5}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn adoption() -> Verdict {
    let o = sweep(PresetName::AdoptionSweep);
    let (x, m, _) = means(&o);
    let rho = spearman(&x, &m);
    verdict(
        rho >= 0.9,
        format!("spearman={rho:.3} delta(0->0.1)={:+.5} means[{}]", m[1] - m[0], fmt_curve(&x, &m)),
    )
}

fn cap() -> Verdict {
    let o = sweep(PresetName::CapSweep);
    let (x, m, s) = means(&o);
    let n = REPS as f64;
    let nondecreasing = m
        .windows(2)
        .zip(s.windows(2))
        .all(|(mw, sw)| mw[1] >= mw[0] - ((sw[0] * sw[0] + sw[1] * sw[1]) / n).sqrt());
    let last = m.len() - 1;
    let separated = m[0] < m[last] && m[0] + s[0] < m[last] - s[last];
    verdict(
        nondecreasing && separated,
        format!(
            "nondecreasing={nondecreasing} separated={separated} cap1={:.5}±{:.5} uncapped={:.5}±{:.5} means[{}]",
            m[0],
            s[0],
            m[last],
            s[last],
            fmt_curve(&x, &m)
        ),
    )
}

fn certification() -> Verdict {
    let o = sweep(PresetName::CertificationSweep);
    let (x, m, s) = means(&o);
    let (rm, rs) = (spearman(&x, &m), spearman(&x, &s));
    verdict(
        rm >= 0.9 && rs >= 0.7,
        format!("spearman_mean={rm:.3} spearman_std={rs:.3} means[{}]", fmt_curve(&x, &m)),
    )
}

fn oracle() -> Verdict {
    let config = oracle_config(&SimConfig::desk_scale());
    let seeds = replication_seeds(config.seed, REPS);
    let o = run_oracle(&config, &seeds, workers()).expect("oracle runs");
    verdict(
        o.band_fraction >= 0.95,
        format!(
            "band_fraction={:.4} max_abs={:.5} mean_abs={:.5} points={}",
            o.band_fraction, o.max_abs_deviation, o.mean_abs_deviation, o.report.points
        ),
    )
}

fn mf_params(pathogens: Vec<PathogenRates>, alpha: f64, upsilon: f64) -> MeanFieldParams {
    MeanFieldParams {
        pathogens,
        birth_rate: alpha,
        natural_death_rate: upsilon,
        birth_mode: BirthMode::AllSusceptible,
        coupling: Coupling::MassAction,
    }
}

fn rates(beta: f64, phi: f64, psi: f64, mu: f64) -> PathogenRates {
    PathogenRates {
        transmission: beta,
        activation: phi,
        recovery: psi,
        mortality: mu,
    }
}

fn structure() -> Verdict {
    let mut rng = SimRng::seed_from_u64(2024);
    let states = enumerate_states(2).expect("k=2").len();

    let p = mf_params((0..2).map(|_| rates(rng.gen_range(0.0..2.0), rng.gen(), rng.gen(), 0.0)).collect(), 0.0, 0.0);
    let mut v = CompartmentVector::zeros(2);
    v.occupancy.iter_mut().for_each(|x| *x = rng.gen::<f64>() / 9.0);
    let m0 = v.total_mass();
    let traj = integrate(&v, &p, 0.0, 365.0, 0.05).expect("integrates");
    let drift = traj
        .states
        .iter()
        .map(|s| ((s.total_mass() - m0) / m0).abs())
        .fold(0.0, f64::max);

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (beta, phi, psi, mu, alpha, ups) = (rng.gen(), rng.gen(), rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let (s, e, i): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let n = s + e + i;
        let want = [
            alpha * n + psi * i - beta * s * i - ups * s,
            beta * s * i - phi * e - ups * e,
            phi * e - psi * i - mu * i - ups * i,
        ];
        let d = derivative(
            &CompartmentVector {
                occupancy: vec![s, e, i],
                dead: 0.0,
            },
            &mf_params(vec![rates(beta, phi, psi, mu)], alpha, ups),
        );
        for (g, w) in d.occupancy.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }

    let p = mf_params(vec![rates(3.0, 1.0, 0.5, 0.02)], 0.01, 0.01);
    let v = CompartmentVector {
        occupancy: vec![0.9, 0.05, 0.05],
        dead: 0.0,
    };
    let end = |h: f64| integrate(&v, &p, 0.0, 10.0, h).expect("integrates").last().occupancy.clone();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let (a, b, c) = (end(0.2), end(0.1), end(0.05));
    let ratio = dist(&a, &b) / dist(&b, &c);

    verdict(
        states == 9 && drift <= 1e-8 && worst <= 1e-12 && (12.0..=20.0).contains(&ratio),
        format!("states={states} drift={drift:.2e} k1_max_err={worst:.2e} richardson={ratio:.2}"),
    )
}

fn invariants() -> Verdict {
    let config = SimConfig {
        interaction_cap: Some(5),
        certification_days: Some(30),
        initial_adoption: 0.5,
        steady_to_casual: 0.001,
        ..SimConfig::desk_scale()
    };
    let mut violations = Vec::new();
    let mut steps = 0;
    for seed in replication_seeds(config.seed, 10) {
        let mut w = World::new(config.clone(), seed).expect("valid config");
        w.enable_audit();
        let mut s = MetricsSeries::default();
        w.run_into(&mut s);
        steps += s.rows.len();
        violations.extend(w.audit_violations().into_iter().map(|v| format!("seed {seed}: {v}")));
    }
    let first = violations.first().cloned().unwrap_or_default();
    verdict(
        violations.is_empty(),
        format!("runs=10 steps={steps} violations={} {first}", violations.len()),
    )
}

fn stinet_sweep(out: &Path, workers: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_stinet"))
        .args(["sweep", "--preset", "adoption-sweep", "--reps", "4", "--seed", "77", "--workers", workers])
        .args(["--set", "population=2000", "--set", "steps=500", "--out"])
        .arg(out)
        .env_remove("STINET_SEED")
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out.join("long.csv")).expect("long.csv")
}

fn determinism() -> Verdict {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().expect("tempdir")).collect();
    let a = stinet_sweep(dirs[0].path(), "8");
    let b = stinet_sweep(dirs[1].path(), "8");
    let c = stinet_sweep(dirs[2].path(), "1");
    verdict(
        a == b && a == c,
        format!("workers8_twice_equal={} workers1_vs_8_equal={} bytes={}", a == b, a == c, a.len()),
    )
}

fn statistics() -> Verdict {
    let mut rng = SimRng::seed_from_u64(9);

    let kin = [PathogenParams::chlamydia().kinetics(1.0)];
    let acts = 1_000_000u64;
    let mut infected = 0u64;
    let carrier = {
        let mut s = EpiState::susceptible(1);
        s.seed_infectious(PathogenId(0), &kin[0], &mut rng).expect("susceptible");
        s
    };
    for _ in 0..acts {
        let mut a = carrier.clone();
        let mut b = EpiState::susceptible(1);
        let (_, to_b) = transmit(&mut a, &mut b, true, &kin, 0, &mut rng);
        infected += to_b.len() as u64;
    }
    let beta_ok = (infected as f64 - 0.02 * acts as f64).abs() <= 4.0 * binomial_sd(acts, 0.02);

    let edges = 10_000u64;
    let mut graph = TwoLayerGraph::new(2 * edges as usize);
    for i in 0..edges as usize {
        graph
            .add_edge(AgentId(2 * i as u32), AgentId(2 * i as u32 + 1), Layer::Casual, true, false)
            .expect("fresh pair");
    }
    let (promoted, _) = graph.convert_layers(SimConfig::desk_scale().casual_to_steady, 0.0, |_| true, &mut rng);
    let omega_ok = (promoted as f64 - 0.019 * edges as f64).abs() <= 4.0 * binomial_sd(edges, 0.019);

    let w = World::new(SimConfig::desk_scale(), 3).expect("valid config");
    let n = w.agents().len() as u64;
    let zeta = w.agents().iter().filter(|a| a.prefers_protected).count();
    let zeta_ok = (zeta as f64 - 0.8 * n as f64).abs() <= 4.0 * binomial_sd(n, 0.8);

    verdict(
        beta_ok && omega_ok && zeta_ok,
        format!(
            "beta_protected={:.5} omega={:.5} zeta={:.4}",
            infected as f64 / acts as f64,
            promoted as f64 / edges as f64,
            zeta as f64 / n as f64
        ),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [(usize, &str, fn() -> Verdict); 8] = [
        (1, "adoption monotonicity", adoption),
        (2, "cap effectiveness", cap),
        (3, "certification monotonicity", certification),
        (4, "oracle equivalence", oracle),
        (5, "mean-field structure", structure),
        (6, "invariant suite", invariants),
        (7, "determinism", determinism),
        (8, "parameter statistics", statistics),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {id} {name}: {} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {failed} failing");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
