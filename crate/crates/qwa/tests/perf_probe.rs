//! Ad-hoc timing probes; run with `--ignored --nocapture` when calibrating.

use std::time::Instant;

use qwa::baselines::sta;
use qwa::qwa::anneal;
use qwa::{AnnealParams64, Geometry, Instance64, StaParams64};

#[test]
#[ignore]
fn sta_throughput() {
    let inst = Instance64::generate(Geometry::Ladder { length: 40, width: 2 }, 1).unwrap();
    let params = StaParams64 {
        beta0: 0.1,
        beta_max: 1e6,
        r: 1.0 + 3e-4,
        steps_per_beta: 2000,
        seed: 5,
    };
    let blocks = ((1e6f64 / 0.1).ln() / (1.0 + 3e-4f64).ln()).floor() as u64 + 1;
    let attempts = blocks * 2000;
    let t0 = Instant::now();
    let (e, _) = sta(&inst, &params);
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "sta: {attempts} attempts in {dt:.2}s = {:.1} M/s, e = {e}",
        attempts as f64 / dt / 1e6
    );
}

#[test]
#[ignore]
fn anneal_timings() {
    for (geometry, label) in [
        (Geometry::Chain { length: 80 }, "chain 80"),
        (Geometry::Ladder { length: 20, width: 2 }, "ladder 20x2"),
        (Geometry::Ladder { length: 40, width: 2 }, "ladder 40x2"),
    ] {
        let inst = Instance64::generate(geometry, 7).unwrap();
        let t0 = Instant::now();
        let result = anneal(&inst, AnnealParams64::default()).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        let trace = result.trace.records();
        let m_peak = trace.iter().map(|r| r.m_max).max().unwrap();
        println!(
            "{label}: {dt:.2}s, {} steps, m_peak {m_peak}, work {}, E = {:.6}",
            trace.len(),
            result.cost.eigensolver_work,
            result.classical_energy
        );
    }
}
