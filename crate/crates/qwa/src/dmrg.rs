//! Finite-system DMRG with two-site updates: sweep the orthogonality center,
//! solve each local effective eigenproblem with Lanczos (the operator is
//! never densified), truncate against the policy, and report energy, entropy
//! and bond-growth diagnostics. Two-site updates let the kept states `m`
//! adapt to the discarded-weight tolerance, which single-site updates cannot.

use ndarray::{Array1, Array2, Array3, Array4, ArrayView1};
use thiserror::Error;

use crate::hamiltonian::{advance_left, advance_right, unit_env, Env, MatrixProductOperator};
use crate::lanczos::{lowest_eigenpair, LanczosError, LanczosOptions, LinearOp};
use crate::linalg::svd;
use crate::mps::{lmat, rmat, MatrixProductState, TruncationPolicy};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum DmrgError {
    #[error("state has {mps} sites, operator has {mpo}")]
    SizeMismatch { mps: usize, mpo: usize },
    #[error("local eigensolver failed at bond {bond}, sweep {sweep}: {source}")]
    Eigensolver {
        bond: usize,
        sweep: usize,
        source: LanczosError,
    },
}

/// Diagnostics from the final sweep of a ground-state (or excited-state) run.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SweepReport<S> {
    pub energy: S,
    pub s_max: S,
    pub m_max: usize,
    pub max_discarded: S,
    pub n_sweeps_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct DmrgOptions<S> {
    pub max_sweeps: usize,
    /// Convergence threshold on the energy change per full sweep is
    /// `energy_tol_per_site * n_sites`.
    pub energy_tol_per_site: S,
    pub lanczos: LanczosOptions<S>,
}

impl<S: Scalar> Default for DmrgOptions<S> {
    fn default() -> Self {
        DmrgOptions {
            max_sweeps: 4,
            energy_tol_per_site: S::from_real(1e-9),
            lanczos: LanczosOptions::default(),
        }
    }
}

impl<S: Scalar> DmrgOptions<S> {
    pub fn with_sweeps(max_sweeps: usize) -> Self {
        DmrgOptions {
            max_sweeps,
            ..Default::default()
        }
    }
}

/// Machine-independent work proxy accumulated over local eigensolver calls.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct CostCounter {
    /// `sum over calls of m_left * m_right * iterations`.
    pub eigensolver_work: u128,
    pub eigensolver_calls: u64,
    pub sweeps: u64,
}

impl CostCounter {
    fn record(&mut self, m_left: usize, m_right: usize, iters: usize) {
        self.eigensolver_work += (m_left as u128) * (m_right as u128) * (iters as u128);
        self.eigensolver_calls += 1;
    }

    pub fn merge(&mut self, other: &CostCounter) {
        self.eigensolver_work += other.eigensolver_work;
        self.eigensolver_calls += other.eigensolver_calls;
        self.sweeps += other.sweeps;
    }
}

/// Variational ground-state search seeded by `seed`.
pub fn ground_state<S: Scalar>(
    mpo: &MatrixProductOperator<S>,
    seed: MatrixProductState<S>,
    policy: &TruncationPolicy<S>,
    opts: &DmrgOptions<S>,
    cost: &mut CostCounter,
) -> Result<(MatrixProductState<S>, SweepReport<S>), DmrgError> {
    let mut solver = Solver::new(mpo, seed, None)?;
    let report = solver.run(policy, opts, cost)?;
    Ok((solver.mps, report))
}

pub struct FirstExcited<S> {
    pub state: MatrixProductState<S>,
    pub report: SweepReport<S>,
    pub overlap_with_ground: S,
    /// Set when the gap to the supplied ground energy is below 1e-9.
    pub degenerate_ground: bool,
}

/// Lowest state orthogonal to `ground`: the local eigensolver works in the
/// complement of the ground state's projection into each two-site frame.
pub fn first_excited<S: Scalar>(
    mpo: &MatrixProductOperator<S>,
    ground: &MatrixProductState<S>,
    ground_energy: S,
    seed: MatrixProductState<S>,
    policy: &TruncationPolicy<S>,
    opts: &DmrgOptions<S>,
    cost: &mut CostCounter,
) -> Result<FirstExcited<S>, DmrgError> {
    let mut solver = Solver::new(mpo, seed, Some(ground))?;
    let report = solver.run(policy, opts, cost)?;
    let overlap_with_ground = solver.mps.overlap(ground).unwrap_or(S::zero());
    let degenerate_ground = (report.energy - ground_energy).abs() < S::from_real(1e-9);
    Ok(FirstExcited {
        state: solver.mps,
        report,
        overlap_with_ground,
        degenerate_ground,
    })
}

struct Solver<'a, S> {
    mpo: &'a MatrixProductOperator<S>,
    mps: MatrixProductState<S>,
    left: Vec<Env<S>>,
    right: Vec<Env<S>>,
    ground: Option<&'a MatrixProductState<S>>,
    gleft: Vec<Array2<S>>,
    gright: Vec<Array2<S>>,
}

struct StepStats<S> {
    energy: S,
    entropy: S,
    kept: usize,
    discarded: S,
}

impl<'a, S: Scalar> Solver<'a, S> {
    fn new(
        mpo: &'a MatrixProductOperator<S>,
        mut seed: MatrixProductState<S>,
        ground: Option<&'a MatrixProductState<S>>,
    ) -> Result<Self, DmrgError> {
        let n = mpo.n_sites();
        if seed.n_sites() != n {
            return Err(DmrgError::SizeMismatch {
                mps: seed.n_sites(),
                mpo: n,
            });
        }
        seed.move_center(0);
        seed.normalize();
        let mut right = vec![unit_env(); n + 1];
        for i in (1..n).rev() {
            right[i] = advance_right(&right[i + 1], seed.tensor(i), mpo.tensor(i));
        }
        let left = vec![unit_env(); n + 1];
        let (gleft, gright) = if let Some(g) = ground {
            let ones = Array2::from_elem((1, 1), S::one());
            let mut gr = vec![ones.clone(); n + 1];
            for i in (1..n).rev() {
                gr[i] = retreat_overlap(&gr[i + 1], g.tensor(i), seed.tensor(i));
            }
            (vec![ones; n + 1], gr)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Solver {
            mpo,
            mps: seed,
            left,
            right,
            ground,
            gleft,
            gright,
        })
    }

    fn run(
        &mut self,
        policy: &TruncationPolicy<S>,
        opts: &DmrgOptions<S>,
        cost: &mut CostCounter,
    ) -> Result<SweepReport<S>, DmrgError> {
        let n = self.mpo.n_sites();
        if n == 1 {
            return Ok(self.solve_single_site());
        }
        let tol = opts.energy_tol_per_site * S::from_real(n as f64);
        let mut e_prev = crate::hamiltonian::energy(&self.mps, self.mpo).expect("sizes checked");
        let mut report = SweepReport {
            energy: e_prev,
            s_max: S::zero(),
            m_max: 1,
            max_discarded: S::zero(),
            n_sweeps_used: 0,
            converged: false,
        };
        for sweep in 1..=opts.max_sweeps {
            let mut s_max = S::zero();
            let mut m_max = 1usize;
            let mut max_discarded = S::zero();
            let mut energy = e_prev;
            for c in 0..n - 1 {
                let stats = self.solve_bond(c, true, policy, opts, cost, sweep)?;
                s_max = s_max.max(stats.entropy);
                m_max = m_max.max(stats.kept);
                max_discarded = max_discarded.max(stats.discarded);
                energy = stats.energy;
            }
            for c in (0..n - 1).rev() {
                let stats = self.solve_bond(c, false, policy, opts, cost, sweep)?;
                s_max = s_max.max(stats.entropy);
                m_max = m_max.max(stats.kept);
                max_discarded = max_discarded.max(stats.discarded);
                energy = stats.energy;
            }
            cost.sweeps += 1;
            report = SweepReport {
                energy,
                s_max,
                m_max,
                max_discarded,
                n_sweeps_used: sweep,
                converged: (energy - e_prev).abs() < tol,
            };
            if report.converged {
                break;
            }
            e_prev = energy;
        }
        Ok(report)
    }

    fn solve_single_site(&mut self) -> SweepReport<S> {
        let w = self.mpo.tensor(0);
        let mut h = Array2::zeros((2, 2));
        for so in 0..2 {
            for si in 0..2 {
                h[[so, si]] = w[[0, so, si, 0]];
            }
        }
        let (vals, vecs) = crate::linalg::sym_eigh(&h.view()).unwrap();
        let which = if self.ground.is_some() { 1 } else { 0 };
        let mut t = Array3::zeros((1, 2, 1));
        t[[0, 0, 0]] = vecs[[0, which]];
        t[[0, 1, 0]] = vecs[[1, which]];
        self.mps.set_tensor(0, t);
        self.mps.set_center(0);
        SweepReport {
            energy: vals[which],
            s_max: S::zero(),
            m_max: 1,
            max_discarded: S::zero(),
            n_sweeps_used: 1,
            converged: true,
        }
    }

    fn solve_bond(
        &mut self,
        c: usize,
        to_right: bool,
        policy: &TruncationPolicy<S>,
        opts: &DmrgOptions<S>,
        cost: &mut CostCounter,
        sweep: usize,
    ) -> Result<StepStats<S>, DmrgError> {
        let (l, _, m) = self.mps.tensor(c).dim();
        let (_, _, r) = self.mps.tensor(c + 1).dim();
        // seed from the current pair of tensors
        let theta0 = lmat(self.mps.tensor(c))
            .dot(&rmat(self.mps.tensor(c + 1)))
            .into_shape_with_order(l * 2 * 2 * r)
            .unwrap();
        let _ = m;
        let op = TwoSiteOp {
            left: &self.left[c],
            right: &self.right[c + 2],
            w1: self.mpo.tensor(c),
            w2: self.mpo.tensor(c + 1),
            dims: (l, r),
        };
        let orth = self.local_ground_projection(c, l, r);
        let orth_slice: &[Array1<S>] = orth.as_slice();
        let out = lowest_eigenpair(&op, theta0, orth_slice, &opts.lanczos)
            .map_err(|source| DmrgError::Eigensolver {
                bond: c,
                sweep,
                source,
            })?;
        cost.record(l, r, out.iterations);

        let theta = out.vector.into_shape_with_order((l * 2, 2 * r)).unwrap();
        let f = svd(&theta.view()).unwrap();
        let squared: Vec<S> = f.s.iter().map(|x| *x * *x).collect();
        let (kept, discarded) = policy.choose(&squared);
        let entropy = {
            let mut acc = S::zero();
            for &w in &squared {
                if w > S::min_positive_value() {
                    acc -= w * w.ln();
                }
            }
            acc
        };
        let renorm = (S::one() - discarded).max(S::min_positive_value()).sqrt();
        let u = f.u.slice(ndarray::s![.., ..kept]).to_owned();
        let vt = f.vt.slice(ndarray::s![..kept, ..]).to_owned();
        if to_right {
            let mut carry = vt;
            for (i, mut row) in carry.outer_iter_mut().enumerate() {
                let wgt = f.s[i] / renorm;
                row.mapv_inplace(|x| x * wgt);
            }
            self.mps
                .set_tensor(c, u.into_shape_with_order((l, 2, kept)).unwrap());
            self.mps
                .set_tensor(c + 1, carry.into_shape_with_order((kept, 2, r)).unwrap());
            self.mps.set_center(c + 1);
            self.left[c + 1] = advance_left(&self.left[c], self.mps.tensor(c), self.mpo.tensor(c));
            if let Some(g) = self.ground {
                self.gleft[c + 1] =
                    advance_overlap(&self.gleft[c], g.tensor(c), self.mps.tensor(c));
            }
        } else {
            let mut carry = u;
            for (i, mut col) in carry.columns_mut().into_iter().enumerate() {
                let wgt = f.s[i] / renorm;
                col.mapv_inplace(|x| x * wgt);
            }
            self.mps
                .set_tensor(c, carry.into_shape_with_order((l, 2, kept)).unwrap());
            self.mps
                .set_tensor(c + 1, vt.into_shape_with_order((kept, 2, r)).unwrap());
            self.mps.set_center(c);
            self.right[c + 1] =
                advance_right(&self.right[c + 2], self.mps.tensor(c + 1), self.mpo.tensor(c + 1));
            if let Some(g) = self.ground {
                self.gright[c + 1] =
                    retreat_overlap(&self.gright[c + 2], g.tensor(c + 1), self.mps.tensor(c + 1));
            }
        }
        Ok(StepStats {
            energy: out.eigenvalue,
            entropy,
            kept,
            discarded,
        })
    }

    /// Ground state contracted into the current two-site frame, flattened;
    /// empty when no orthogonality constraint is active or the projection
    /// vanishes.
    fn local_ground_projection(&self, c: usize, l: usize, r: usize) -> Vec<Array1<S>> {
        let Some(g) = self.ground else {
            return Vec::new();
        };
        let t1 = self.gleft[c].t().dot(&rmat(g.tensor(c))); // (wl, 2*gm)
        let gm = g.tensor(c).dim().2;
        let t1 = t1.into_shape_with_order((l * 2, gm)).unwrap();
        let t2 = t1.dot(&rmat(g.tensor(c + 1))); // (wl*2, 2*gr)
        let gr = g.tensor(c + 1).dim().2;
        let t2 = t2.into_shape_with_order((l * 4, gr)).unwrap();
        let p = t2.dot(&self.gright[c + 2]); // (wl*4, wr)
        let p = p.into_shape_with_order(l * 4 * r).unwrap();
        let norm = p.dot(&p).sqrt();
        if norm <= S::from_real(1e-14) {
            Vec::new()
        } else {
            vec![p]
        }
    }
}

/// `<ground|work>` partial overlap advanced over one site from the left;
/// index order `(ground bond, work bond)`.
fn advance_overlap<S: Scalar>(env: &Array2<S>, g: &Array3<S>, a: &Array3<S>) -> Array2<S> {
    let (_, _, wr) = a.dim();
    let t = env.dot(&rmat(a)); // (gl, 2*wr)
    let gl = g.dim().0;
    let t = t.into_shape_with_order((gl * 2, wr)).unwrap();
    lmat(g).t().dot(&t)
}

/// Same from the right.
fn retreat_overlap<S: Scalar>(env: &Array2<S>, g: &Array3<S>, a: &Array3<S>) -> Array2<S> {
    let (al, _, _) = a.dim();
    let t = lmat(a).dot(&env.t()); // (al*2, g)
    let t = t.into_shape_with_order((al, 2 * env.nrows())).unwrap();
    rmat(g).dot(&t.t()) // (ground bond, work bond)
}

struct TwoSiteOp<'a, S> {
    left: &'a Env<S>,
    right: &'a Env<S>,
    w1: &'a Array4<S>,
    w2: &'a Array4<S>,
    dims: (usize, usize),
}

impl<S: Scalar> LinearOp<S> for TwoSiteOp<'_, S> {
    fn dim(&self) -> usize {
        self.dims.0 * 4 * self.dims.1
    }

    fn apply(&self, x: &ArrayView1<S>) -> Array1<S> {
        let (l, r) = self.dims;
        let (lo, bl, li) = self.left.dim();
        let (_, _, _, bm) = self.w1.dim();
        let (_, _, _, bm2) = self.w2.dim();
        let (ro, br, _ri) = self.right.dim();
        debug_assert_eq!(li, l);
        debug_assert_eq!(br, bm2);

        // t1[lo, bl, s1, s2, r]
        let xm = x.view().into_shape_with_order((l, 4 * r)).unwrap();
        let lm = self
            .left
            .view()
            .into_shape_with_order((lo * bl, li))
            .unwrap();
        let t1 = lm.dot(&xm).into_shape_with_order((lo, bl, 2, 2, r)).unwrap();
        // t2[s1', bm, lo, s2, r]
        let t1m = t1
            .permuted_axes([1, 2, 0, 3, 4])
            .as_standard_layout()
            .into_shape_with_order((bl * 2, lo * 2 * r))
            .unwrap()
            .to_owned();
        let w1m = self
            .w1
            .view()
            .permuted_axes([1, 3, 0, 2])
            .as_standard_layout()
            .into_shape_with_order((2 * bm, bl * 2))
            .unwrap()
            .to_owned();
        let t2 = w1m
            .dot(&t1m)
            .into_shape_with_order((2, bm, lo, 2, r))
            .unwrap();
        // t3[s2', bm2, s1', lo, r]
        let t2m = t2
            .permuted_axes([1, 3, 0, 2, 4])
            .as_standard_layout()
            .into_shape_with_order((bm * 2, 2 * lo * r))
            .unwrap()
            .to_owned();
        let w2m = self
            .w2
            .view()
            .permuted_axes([1, 3, 0, 2])
            .as_standard_layout()
            .into_shape_with_order((2 * bm2, bm * 2))
            .unwrap()
            .to_owned();
        let t3 = w2m
            .dot(&t2m)
            .into_shape_with_order((2, bm2, 2, lo, r))
            .unwrap();
        // out[lo, s1', s2', ro]
        let t3m = t3
            .permuted_axes([1, 4, 0, 2, 3])
            .as_standard_layout()
            .into_shape_with_order((bm2 * r, 4 * lo))
            .unwrap()
            .to_owned();
        let rm = self
            .right
            .view()
            .permuted_axes([1, 2, 0])
            .as_standard_layout()
            .into_shape_with_order((br * r, ro))
            .unwrap()
            .to_owned();
        let out = rm.t().dot(&t3m).into_shape_with_order((ro, 2, 2, lo)).unwrap();
        out.permuted_axes([3, 2, 1, 0])
            .as_standard_layout()
            .into_shape_with_order(lo * 4 * ro)
            .unwrap()
            .to_owned()
    }
}
