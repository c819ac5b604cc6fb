//! Head-to-head calibration probes; run with `--ignored --nocapture`.

use qwa::baselines::sta;
use qwa::qwa::anneal;
use qwa::{AnnealParams64, Geometry, Instance64, StaParams64};

fn strong_sta(inst: &Instance64, seeds: u64) -> f64 {
    let base = StaParams64 {
        beta0: 0.1,
        beta_max: 1e6,
        r: 1.0 + 3e-4,
        steps_per_beta: 2000,
        seed: 0,
    };
    (0..seeds)
        .map(|s| sta(inst, &base.with_seed(1000 + s)).0)
        .fold(f64::INFINITY, f64::min)
}

#[test]
#[ignore]
fn eta_coarse_success_rate() {
    let mut hits = 0;
    for seed in 100..124u64 {
        let inst = Instance64::generate(Geometry::Ladder { length: 40, width: 2 }, seed).unwrap();
        let e_sta = strong_sta(&inst, 3);
        let r3 = anneal(&inst, AnnealParams64::with_eta(1e-3)).unwrap();
        let ok = (r3.classical_energy - e_sta).abs() <= 1e-9;
        if ok {
            hits += 1;
        }
        println!(
            "seed {seed}: {} (qwa3 {:.9} vs sta {:.9})",
            if ok { "match" } else { "miss " },
            r3.classical_energy,
            e_sta
        );
    }
    println!("eta=1e-3 success: {hits}/24");
}

#[test]
#[ignore]
fn qwa_vs_sta_ladder_40x2() {
    let mut agree = 0;
    let mut eps_sum = 0.0;
    for seed in 0..6u64 {
        let inst = Instance64::generate(Geometry::Ladder { length: 40, width: 2 }, seed).unwrap();
        let e_sta = strong_sta(&inst, 3);
        let r8 = anneal(&inst, AnnealParams64::with_eta(1e-8)).unwrap();
        let r3 = anneal(&inst, AnnealParams64::with_eta(1e-3)).unwrap();
        let ok = (r8.classical_energy - e_sta).abs() <= 1e-9;
        if ok {
            agree += 1;
        }
        eps_sum += e_sta / 80.0;
        println!(
            "seed {seed}: sta {e_sta:.9}, qwa8 {:.9} ({}), qwa3 {:.9} ({}), m8={} steps8={}",
            r8.classical_energy,
            if ok { "match" } else { "MISS" },
            r3.classical_energy,
            if (r3.classical_energy - e_sta).abs() <= 1e-9 { "match" } else { "miss" },
            r8.trace.records().iter().map(|r| r.m_max).max().unwrap(),
            r8.trace.records().len(),
        );
    }
    println!("eta=1e-8 agreement: {agree}/6, mean energy/spin {:.4}", eps_sum / 6.0);
}
