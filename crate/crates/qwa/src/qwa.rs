//! The annealing driver: track the transverse-field ground state from
//! `gamma0` down to `gamma_min`, adapting the MPS at each step by a few DMRG
//! sweeps warm-started from the previous field value, then read the spins
//! out of the polarized state.
//!
//! The step size follows `dgamma = min(cap, coeff / s_max)` with `s_max` the
//! largest block entropy of the previous converged state (natural log), so
//! steps shrink near the transition where the entropy peaks. A small
//! longitudinal field at one site stays on for the whole anneal; it breaks
//! the global flip symmetry and selects the branch the readout sees.

use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::dmrg::{ground_state, CostCounter, DmrgError, DmrgOptions};
use crate::hamiltonian::{build_mpo, order_sites, HamiltonianError, SiteOrdering};
use crate::instance::{Instance, InstanceError, SpinConfiguration};
use crate::lanczos::LanczosOptions;
use crate::mps::{MatrixProductState, MpsError, TruncationPolicy};
use crate::rng::SeededRng;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum QwaError {
    #[error("invalid anneal parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error("anneal aborted at gamma={gamma}: {source}")]
    Aborted { gamma: f64, source: DmrgError },
    #[error(transparent)]
    Checkpoint(#[from] MpsError),
}

/// Where the symmetry-breaking field goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BreakSite {
    /// Drawn from a stream keyed by `instance seed ^ salt`.
    Random { salt: u64 },
    Fixed(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct AnnealParams<S> {
    pub gamma0: S,
    pub gamma_min: S,
    pub dgamma_cap: S,
    pub dgamma_coeff: S,
    pub h_break: S,
    pub break_site: BreakSite,
    pub policy: TruncationPolicy<S>,
    /// Sweep budget per field step after the first.
    pub max_sweeps: usize,
    /// The first step starts from the product seed and gets a larger budget.
    pub first_step_sweeps: usize,
    pub energy_tol_per_site: S,
    pub lanczos: LanczosOptions<S>,
}

impl<S: Scalar> Default for AnnealParams<S> {
    fn default() -> Self {
        AnnealParams {
            gamma0: S::from_real(3.0),
            gamma_min: S::from_real(0.01),
            dgamma_cap: S::from_real(0.5),
            dgamma_coeff: S::from_real(0.1),
            h_break: S::from_real(1e-6),
            break_site: BreakSite::Random { salt: 0 },
            policy: TruncationPolicy::default(),
            max_sweeps: 4,
            first_step_sweeps: 8,
            energy_tol_per_site: S::from_real(1e-9),
            lanczos: LanczosOptions::default(),
        }
    }
}

impl<S: Scalar> AnnealParams<S> {
    pub fn with_eta(eta: S) -> Self {
        AnnealParams {
            policy: TruncationPolicy::with_eta(eta),
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), QwaError> {
        let bad = |m: &str| Err(QwaError::BadParams(m.into()));
        if !(self.gamma0 > self.gamma_min && self.gamma_min > S::zero()) {
            return bad("need gamma0 > gamma_min > 0");
        }
        if self.dgamma_cap <= S::zero() || self.dgamma_coeff <= S::zero() {
            return bad("step cap and coefficient must be positive");
        }
        if self.h_break <= S::zero() {
            return bad("h_break must be positive");
        }
        if self.max_sweeps == 0 || self.first_step_sweeps == 0 {
            return bad("sweep budgets must be at least 1");
        }
        Ok(())
    }

    fn dmrg_options(&self, first: bool) -> DmrgOptions<S> {
        DmrgOptions {
            max_sweeps: if first { self.first_step_sweeps } else { self.max_sweeps },
            energy_tol_per_site: self.energy_tol_per_site,
            lanczos: self.lanczos,
        }
    }
}

/// Next transverse field value: `max(gamma - min(cap, coeff / s_max_prev),
/// gamma_min)`; a vanishing entropy means the cap applies.
pub fn next_gamma<S: Scalar>(gamma: S, s_max_prev: S, params: &AnnealParams<S>) -> S {
    let step = if s_max_prev > S::zero() {
        self::min(params.dgamma_cap, params.dgamma_coeff / s_max_prev)
    } else {
        params.dgamma_cap
    };
    (gamma - step).max(params.gamma_min)
}

fn min<S: Scalar>(a: S, b: S) -> S {
    if a < b {
        a
    } else {
        b
    }
}

/// One record per field step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepRecord<S> {
    pub gamma: S,
    pub energy: S,
    pub s_max: S,
    pub m_max: usize,
    pub max_discarded: S,
    pub sweeps_used: usize,
    pub converged: bool,
}

/// Ordered per-step records; `gamma` strictly decreases and the final record
/// sits exactly at `gamma_min`.
#[derive(Debug, Clone, Serialize)]
pub struct AnnealTrace<S>(pub Vec<StepRecord<S>>);

impl<S> Default for AnnealTrace<S> {
    fn default() -> Self {
        AnnealTrace(Vec::new())
    }
}

impl<S: Scalar> AnnealTrace<S> {
    pub fn records(&self) -> &[StepRecord<S>] {
        &self.0
    }

    pub fn last_energy(&self) -> Option<S> {
        self.0.last().map(|r| r.energy)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult<S> {
    /// Readout configuration in site (not chain-position) order.
    pub config_text: String,
    pub classical_energy: S,
    pub break_site: usize,
    /// Sites whose `|<sz>|` stayed below 1e-3 at readout.
    pub ambiguous_sites: Vec<usize>,
    pub trace: AnnealTrace<S>,
    pub cost: CostCounter,
    pub max_op_bond: usize,
    pub oracle_energy: Option<S>,
    pub success: Option<bool>,
    #[serde(skip)]
    pub config: SpinConfiguration,
}

impl<S: Scalar> RunResult<S> {
    /// Marks success when the classical energy matches `oracle` to 1e-9.
    pub fn with_oracle(mut self, oracle: S) -> Self {
        self.oracle_energy = Some(oracle);
        self.success = Some((self.classical_energy - oracle).abs() <= S::from_real(1e-9));
        self
    }
}

/// Stepping anneal driver; owns the evolving state so callers can checkpoint
/// or inspect between field steps.
pub struct Annealer<'a, S> {
    instance: &'a Instance<S>,
    params: AnnealParams<S>,
    ordering: SiteOrdering,
    broken: Instance<S>,
    break_site: usize,
    mps: MatrixProductState<S>,
    gamma: S,
    s_prev: S,
    started: bool,
    trace: AnnealTrace<S>,
    cost: CostCounter,
    max_op_bond: usize,
}

impl<'a, S: Scalar> Annealer<'a, S> {
    pub fn new(instance: &'a Instance<S>, params: AnnealParams<S>) -> Result<Self, QwaError> {
        params.validate()?;
        let ordering = order_sites(instance)?;
        let break_site = match params.break_site {
            BreakSite::Fixed(site) => {
                if site >= instance.n_sites() {
                    return Err(QwaError::BadParams(format!(
                        "break site {site} out of range"
                    )));
                }
                site
            }
            BreakSite::Random { salt } => {
                SeededRng::new(instance.seed() ^ salt ^ 0x62_72_65_61_6b).below(instance.n_sites())
            }
        };
        let broken = instance.with_field(break_site, params.h_break);
        let mps = MatrixProductState::product_state_x(instance.n_sites());
        Ok(Annealer {
            instance,
            params,
            ordering,
            broken,
            break_site,
            mps,
            gamma: params.gamma0,
            s_prev: S::zero(),
            started: false,
            trace: AnnealTrace::default(),
            cost: CostCounter::default(),
            max_op_bond: 0,
        })
    }

    /// Resumes from a checkpointed `(gamma, s_max, state)`; the trace covers
    /// only the steps taken after the resume point.
    pub fn resume(
        instance: &'a Instance<S>,
        params: AnnealParams<S>,
        gamma: S,
        s_prev: S,
        mps: MatrixProductState<S>,
    ) -> Result<Self, QwaError> {
        let mut annealer = Annealer::new(instance, params)?;
        if mps.n_sites() != instance.n_sites() {
            return Err(QwaError::BadParams(
                "checkpoint state does not match the instance".into(),
            ));
        }
        annealer.gamma = gamma;
        annealer.s_prev = s_prev;
        annealer.mps = mps;
        annealer.started = true;
        Ok(annealer)
    }

    pub fn gamma(&self) -> S {
        self.gamma
    }

    pub fn s_prev(&self) -> S {
        self.s_prev
    }

    pub fn state(&self) -> &MatrixProductState<S> {
        &self.mps
    }

    pub fn trace(&self) -> &AnnealTrace<S> {
        &self.trace
    }

    pub fn break_site(&self) -> usize {
        self.break_site
    }

    pub fn is_done(&self) -> bool {
        self.started && self.gamma <= self.params.gamma_min
    }

    /// Converges the state at the next field value and appends a trace
    /// record; `Ok(None)` once `gamma_min` has been recorded.
    pub fn step(&mut self) -> Result<Option<&StepRecord<S>>, QwaError> {
        if self.is_done() {
            return Ok(None);
        }
        let first = !self.started;
        if !first {
            self.gamma = next_gamma(self.gamma, self.s_prev, &self.params);
        }
        self.started = true;
        let mpo = build_mpo(&self.broken, &self.ordering, self.gamma)?;
        self.max_op_bond = self.max_op_bond.max(mpo.max_op_bond());
        let seed = std::mem::replace(&mut self.mps, MatrixProductState::product_state_x(1));
        let opts = self.params.dmrg_options(first);
        let (state, report) = ground_state(&mpo, seed, &self.params.policy, &opts, &mut self.cost)
            .map_err(|source| QwaError::Aborted {
                gamma: self.gamma.to_real(),
                source,
            })?;
        self.mps = state;
        self.s_prev = report.s_max;
        self.trace.0.push(StepRecord {
            gamma: self.gamma,
            energy: report.energy,
            s_max: report.s_max,
            m_max: report.m_max,
            max_discarded: report.max_discarded,
            sweeps_used: report.n_sweeps_used,
            converged: report.converged,
        });
        Ok(self.trace.0.last())
    }

    /// Runs any remaining steps and reads the configuration out.
    pub fn finish(mut self) -> Result<RunResult<S>, QwaError> {
        while !self.is_done() {
            self.step()?;
        }
        let (config, ambiguous_sites) = readout_ordered(&mut self.mps, &self.ordering);
        let classical_energy = self
            .instance
            .classical_energy(&config)
            .expect("readout length matches the instance");
        Ok(RunResult {
            config_text: config.to_string(),
            classical_energy,
            break_site: self.break_site,
            ambiguous_sites,
            trace: self.trace,
            cost: self.cost,
            max_op_bond: self.max_op_bond,
            oracle_energy: None,
            success: None,
            config,
        })
    }

    /// Writes `(gamma, s_max, state)` so a later run can resume.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<(), QwaError> {
        writeln!(w, "qwa-anneal-checkpoint v1").map_err(MpsError::Io)?;
        writeln!(w, "gamma {}", self.gamma).map_err(MpsError::Io)?;
        writeln!(w, "s_prev {}", self.s_prev).map_err(MpsError::Io)?;
        self.mps.write_checkpoint(w)?;
        Ok(())
    }
}

/// Reads back what [`Annealer::write_checkpoint`] wrote.
pub fn read_checkpoint<S: Scalar, R: BufRead>(
    mut r: R,
) -> Result<(S, S, MatrixProductState<S>), QwaError> {
    let mut header = String::new();
    r.read_line(&mut header).map_err(MpsError::Io)?;
    if header.trim() != "qwa-anneal-checkpoint v1" {
        return Err(QwaError::BadParams("not an anneal checkpoint".into()));
    }
    let mut parse_line = |tag: &str| -> Result<S, QwaError> {
        let mut line = String::new();
        r.read_line(&mut line).map_err(MpsError::Io)?;
        let rest = line
            .trim()
            .strip_prefix(tag)
            .ok_or_else(|| QwaError::BadParams(format!("expected `{tag}` record")))?;
        S::parse_text(rest.trim())
            .ok_or_else(|| QwaError::BadParams(format!("bad `{tag}` value")))
    };
    let gamma = parse_line("gamma ")?;
    let s_prev = parse_line("s_prev ")?;
    let mps = MatrixProductState::read_checkpoint(r)?;
    Ok((gamma, s_prev, mps))
}

/// Full anneal: seed with the transverse product state, ramp the field to
/// `gamma_min`, read out `sign(<sz>)` per site.
pub fn anneal<S: Scalar>(
    instance: &Instance<S>,
    params: AnnealParams<S>,
) -> Result<RunResult<S>, QwaError> {
    Annealer::new(instance, params)?.finish()
}

/// Per-site `sign(<sz>)` in site order; exact zeros (below 1e-12) resolve to
/// +1, magnitudes below 1e-3 are reported as ambiguous.
pub fn readout<S: Scalar>(
    mps: &mut MatrixProductState<S>,
    instance: &Instance<S>,
) -> Result<(SpinConfiguration, Vec<usize>), QwaError> {
    let ordering = order_sites(instance)?;
    Ok(readout_ordered(mps, &ordering))
}

fn readout_ordered<S: Scalar>(
    mps: &mut MatrixProductState<S>,
    ordering: &SiteOrdering,
) -> (SpinConfiguration, Vec<usize>) {
    let sz_by_pos = mps.expect_sz_all();
    let zero_tol = S::from_real(1e-12);
    let ambi_tol = S::from_real(1e-3);
    let mut spins = vec![1i8; sz_by_pos.len()];
    let mut ambiguous = Vec::new();
    for site in 0..sz_by_pos.len() {
        let sz = sz_by_pos[ordering.position_of(site)];
        spins[site] = if sz.abs() < zero_tol || sz > S::zero() {
            1
        } else {
            -1
        };
        if sz.abs() < ambi_tol {
            ambiguous.push(site);
        }
    }
    (SpinConfiguration(spins), ambiguous)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::brute_force;
    use crate::instance::{Edge, Geometry};

    type Inst = Instance<f64>;
    type Params = AnnealParams<f64>;

    #[test]
    fn schedule_arithmetic() {
        let p = Params::default();
        assert!((next_gamma(3.0, 0.05, &p) - 2.5).abs() < 1e-12);
        assert!((next_gamma(1.0, 1.0, &p) - 0.9).abs() < 1e-12);
        assert!((next_gamma(0.05, 0.5, &p) - 0.01).abs() < 1e-15);
        // vanishing entropy applies the cap
        assert!((next_gamma(3.0, 0.0, &p) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = Params::default();
        p.gamma_min = 4.0;
        assert!(anneal(&Inst::generate(Geometry::Chain { length: 4 }, 0).unwrap(), p).is_err());
        let mut p = Params::default();
        p.h_break = 0.0;
        assert!(anneal(&Inst::generate(Geometry::Chain { length: 4 }, 0).unwrap(), p).is_err());
    }

    #[test]
    fn ferromagnetic_chain_polarizes() {
        let n = 8;
        let edges = (0..n - 1)
            .map(|i| Edge { i, j: i + 1, coupling: 1.0 })
            .collect();
        let inst = Inst::new(Geometry::Chain { length: n }, 0, edges, vec![0.0; n]).unwrap();
        let result = anneal(&inst, Params::default()).unwrap();
        assert!(result.config.0.iter().all(|&s| s == result.config.0[0]));
        assert!((result.classical_energy - (-(n as f64 - 1.0))).abs() < 1e-12);
        assert!(result.ambiguous_sites.is_empty());
    }

    #[test]
    fn trace_invariants_hold() {
        let inst = Inst::generate(Geometry::Ladder { length: 6, width: 2 }, 12).unwrap();
        let result = anneal(&inst, Params::default()).unwrap();
        let records = result.trace.records();
        assert!(records.len() >= 2);
        for pair in records.windows(2) {
            assert!(pair[1].gamma < pair[0].gamma);
        }
        assert_eq!(records.last().unwrap().gamma, 0.01);
        assert_eq!(records[0].gamma, 3.0);
    }

    #[test]
    fn small_instances_reach_enumeration_minimum() {
        for (geometry, seed) in [
            (Geometry::Chain { length: 12 }, 3u64),
            (Geometry::Ladder { length: 5, width: 2 }, 7),
            (Geometry::RandomRegular { n: 10, degree: 3 }, 1),
        ] {
            let inst = Inst::generate(geometry, seed).unwrap();
            let result = anneal(&inst, Params::default()).unwrap();
            let (best, _) = brute_force(&inst).unwrap();
            let result = result.with_oracle(best);
            assert_eq!(result.success, Some(true), "{geometry:?} seed {seed}");
        }
    }

    #[test]
    fn flipped_break_field_flips_the_readout() {
        let inst = Inst::generate(Geometry::Chain { length: 10 }, 5).unwrap();
        let params = Params::default();
        let up = anneal(&inst, params).unwrap();
        // apply the opposite field at the same site by hand
        let site = up.break_site;
        let flipped_inst = inst.with_field(site, -2e-6); // net field -1e-6
        let mut p2 = params;
        p2.break_site = BreakSite::Fixed(site);
        let down = anneal(&flipped_inst, p2).unwrap();
        assert_eq!(up.config.flipped().0, down.config.0);
        // same energy on the original zero-field instance
        let e_down = inst.classical_energy(&down.config).unwrap();
        assert!((up.classical_energy - e_down).abs() < 1e-9);
    }

    #[test]
    fn decoupled_sites_flag_ambiguous_readout() {
        // two sites, J = 0: without couplings there is no cooperative
        // response, so even the break site only polarizes to h/gamma_min =
        // 1e-4 and both sites are flagged
        let inst = Inst::new(
            Geometry::Chain { length: 2 },
            0,
            vec![Edge { i: 0, j: 1, coupling: 0.0 }],
            vec![0.0; 2],
        )
        .unwrap();
        let mut params = Params::default();
        params.break_site = BreakSite::Fixed(0);
        let result = anneal(&inst, params).unwrap();
        assert_eq!(result.ambiguous_sites, vec![0, 1]);
        // the tiny field still tips the break site to +1
        assert_eq!(result.config.spin(0), 1);
    }

    #[test]
    fn energy_consistency_at_gamma_min() {
        let inst = Inst::generate(Geometry::Ladder { length: 4, width: 2 }, 9).unwrap();
        let result = anneal(&inst, Params::default()).unwrap();
        let n = inst.n_sites() as f64;
        let h_last = result.trace.last_energy().unwrap();
        assert!((h_last - result.classical_energy).abs() <= n * 0.01 + 1e-6);
    }

    #[test]
    fn schedule_shrinks_near_the_entropy_peak() {
        let inst = Inst::generate(Geometry::Ladder { length: 8, width: 2 }, 21).unwrap();
        let result = anneal(&inst, Params::default()).unwrap();
        let records = result.trace.records();
        let peak = records
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.s_max.partial_cmp(&b.1.s_max).unwrap())
            .unwrap()
            .0;
        if peak + 1 < records.len() {
            let step_at_peak = records[peak].gamma - records[peak + 1].gamma;
            let smallest = records
                .windows(2)
                .map(|w| w[0].gamma - w[1].gamma)
                .fold(f64::INFINITY, f64::min);
            assert!(step_at_peak <= smallest * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn checkpoint_resume_reproduces_the_run() {
        let inst = Inst::generate(Geometry::Chain { length: 10 }, 77).unwrap();
        let params = Params::default();
        let full = anneal(&inst, params).unwrap();

        let mut annealer = Annealer::new(&inst, params).unwrap();
        for _ in 0..3 {
            annealer.step().unwrap();
        }
        let mut buf = Vec::new();
        annealer.write_checkpoint(&mut buf).unwrap();
        let (gamma, s_prev, mps) = read_checkpoint(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(gamma, annealer.gamma());
        let resumed = Annealer::resume(&inst, params, gamma, s_prev, mps)
            .unwrap()
            .finish()
            .unwrap();
        assert_eq!(resumed.config.0, full.config.0);
        assert!((resumed.classical_energy - full.classical_energy).abs() < 1e-12);
    }
}
