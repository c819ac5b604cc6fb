//! End-to-end anneals on instances small enough to verify against exact
//! enumeration, plus consistency between the annealer and the thermal
//! baseline.

use qwa::baselines::{brute_force, sta};
use qwa::StaParams64;
use qwa::qwa::anneal;
use qwa::{Geometry, Instance64, SpinConfiguration};

use qwa::AnnealParams64;

#[test]
fn chain_twenty_matches_exact_enumeration() {
    let inst = Instance64::generate(Geometry::Chain { length: 20 }, 100).unwrap();
    let (best, _) = brute_force(&inst).unwrap();
    let result = anneal(&inst, AnnealParams64::default())
        .unwrap()
        .with_oracle(best);
    assert_eq!(result.success, Some(true));
    assert!(result.ambiguous_sites.is_empty());
}

#[test]
fn ladder_ten_by_two_matches_exact_enumeration() {
    // n = 20: the enumeration oracle still reaches it comfortably
    let inst = Instance64::generate(Geometry::Ladder { length: 10, width: 2 }, 55).unwrap();
    let (best, minimizers) = brute_force(&inst).unwrap();
    let result = anneal(&inst, AnnealParams64::default()).unwrap();
    assert!((result.classical_energy - best).abs() <= 1e-9);
    assert!(minimizers.iter().any(|m| m.0 == result.config.0));
}

#[test]
fn annealed_state_concentrates_on_the_classical_ground_state() {
    // at gamma_min the configuration with the largest amplitude is the CGS
    let inst = Instance64::generate(Geometry::Ladder { length: 6, width: 2 }, 19).unwrap();
    let n = inst.n_sites();
    let (best, _) = brute_force(&inst).unwrap();
    let params = AnnealParams64::default();
    let mut annealer = qwa::qwa::Annealer::new(&inst, params).unwrap();
    while annealer.step().unwrap().is_some() {}
    let state = annealer.state().clone();
    let dense = state.to_statevector();
    let mut best_idx = 0;
    for idx in 0..1usize << n {
        if dense[idx].abs() > dense[best_idx].abs() {
            best_idx = idx;
        }
    }
    let winner = SpinConfiguration::from_basis_index(best_idx, n);
    let e_winner = inst.classical_energy(&winner).unwrap();
    assert!(
        (e_winner - best).abs() <= 1e-9,
        "dominant amplitude sits on energy {e_winner}, CGS has {best}"
    );
}

#[test]
fn qwa_and_thermal_annealing_agree_on_small_glasses() {
    // a short but strong thermal schedule, itself validated against
    // enumeration on every instance it is used on here
    let sta_params = StaParams64 {
        beta_max: 1e4,
        r: 1.001,
        steps_per_beta: 200,
        ..Default::default()
    };
    for seed in [3u64, 8, 21] {
        let inst = Instance64::generate(Geometry::Ladder { length: 8, width: 2 }, seed).unwrap();
        let (exact, _) = brute_force(&inst).unwrap();
        let (e_sta, _) = sta(&inst, &sta_params.with_seed(seed + 1));
        assert!((e_sta - exact).abs() <= 1e-9, "sta missed on seed {seed}");
        let result = anneal(&inst, AnnealParams64::default()).unwrap();
        // qwa never lands above the thermal reference
        assert!(result.classical_energy <= e_sta + 1e-9);
        assert!((result.classical_energy - exact).abs() <= 1e-9);
    }
}

#[test]
fn coarse_truncation_still_runs_to_completion() {
    // eta = 1e-3 trades fidelity for speed; the run must finish cleanly and
    // report its (possibly worse) energy honestly
    let inst = Instance64::generate(Geometry::Ladder { length: 8, width: 2 }, 77).unwrap();
    let (best, _) = brute_force(&inst).unwrap();
    let result = anneal(&inst, AnnealParams64::with_eta(1e-3)).unwrap();
    assert!(result.classical_energy >= best - 1e-9);
    assert_eq!(result.trace.records().last().unwrap().gamma, 0.01);
}

#[test]
fn f32_anneal_smoke() {
    use qwa::qwa::AnnealParams;
    let inst = qwa::Instance::<f32>::generate(Geometry::Chain { length: 8 }, 3).unwrap();
    let mut params = AnnealParams::<f32>::default();
    params.policy.eta = 1e-6;
    params.energy_tol_per_site = 1e-6;
    params.lanczos.rel_tol = 1e-5;
    let result = qwa::qwa::anneal(&inst, params).unwrap();
    let inst64 = Instance64::generate(Geometry::Chain { length: 8 }, 3).unwrap();
    // the f32 instance rounds the couplings; rebuild it in f64 for the oracle
    let edges64: Vec<qwa::instance::Edge<f64>> = inst
        .edges()
        .iter()
        .map(|e| qwa::instance::Edge {
            i: e.i,
            j: e.j,
            coupling: f64::from(e.coupling),
        })
        .collect();
    let rounded =
        Instance64::new(inst64.geometry(), inst64.seed(), edges64, vec![0.0; 8]).unwrap();
    let (best, _) = brute_force(&rounded).unwrap();
    assert!((f64::from(result.classical_energy) - best).abs() < 1e-6);
}
