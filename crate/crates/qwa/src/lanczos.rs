//! Lanczos iteration for the lowest eigenpair of a symmetric linear operator
//! applied as a black box.
//!
//! The Krylov basis is kept fully orthogonal and the subspace expands along
//! the exact Ritz residual (the Lanczos direction, in exact arithmetic). The
//! operator images of the basis vectors are cached, so when the basis hits
//! its size cap the iteration thick-restarts from the lowest few Ritz
//! vectors without spending new matrix-vector products. Convergence is
//! judged on the true residual norm of the restricted problem.

use ndarray::{Array1, Array2, ArrayView1};
use thiserror::Error;

use crate::linalg::sym_eigh;
use crate::Scalar;

pub trait LinearOp<S> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &ArrayView1<S>) -> Array1<S>;
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions<S> {
    /// Total matrix-vector product budget across restarts.
    pub max_iters: usize,
    /// Basis size before a thick restart.
    pub max_basis: usize,
    /// Ritz vectors carried through a restart.
    pub restart_keep: usize,
    /// Convergence: residual norm below `rel_tol * max(|theta|, 1)`.
    pub rel_tol: S,
}

impl<S: Scalar> Default for LanczosOptions<S> {
    fn default() -> Self {
        LanczosOptions {
            max_iters: 200,
            max_basis: 40,
            restart_keep: 8,
            rel_tol: S::from_real(1e-10),
        }
    }
}

#[derive(Debug, Error)]
pub enum LanczosError {
    #[error("no convergence after {iters} matrix-vector products (best residual {resid:e})")]
    NoConvergence { iters: usize, resid: f64 },
    #[error("seed vector lies in the excluded subspace")]
    DegenerateSeed,
}

pub struct LanczosOutcome<S> {
    pub eigenvalue: S,
    pub vector: Array1<S>,
    pub iterations: usize,
}

/// Lowest eigenpair of `op` within the orthogonal complement of `orth`.
pub fn lowest_eigenpair<S: Scalar, Op: LinearOp<S>>(
    op: &Op,
    seed: Array1<S>,
    orth: &[Array1<S>],
    opts: &LanczosOptions<S>,
) -> Result<LanczosOutcome<S>, LanczosError> {
    let dim = op.dim();
    debug_assert_eq!(seed.len(), dim);
    let tiny = S::epsilon() * S::from_real(64.0);
    let max_basis = opts.max_basis.min(dim).max(2);
    let keep = opts.restart_keep.clamp(1, max_basis - 1);

    let mut v = seed;
    project(&mut v, orth);
    let mut norm = norm2(&v);
    if norm <= tiny {
        // deterministic fallback seed
        let mut rng = crate::rng::SeededRng::new(dim as u64 ^ 0x517c_c1ed);
        v = Array1::from_shape_fn(dim, |_| S::from_real(rng.uniform_pm1()));
        project(&mut v, orth);
        norm = norm2(&v);
        if norm <= tiny {
            return Err(LanczosError::DegenerateSeed);
        }
    }
    v.mapv_inplace(|x| x / norm);

    let mut iters = 0usize;
    let mut basis: Vec<Array1<S>> = Vec::with_capacity(max_basis);
    let mut applied: Vec<Array1<S>> = Vec::with_capacity(max_basis);
    applied.push(op.apply(&v.view()));
    basis.push(v);
    iters += 1;
    // projected matrix entries t[i][j] = basis[i] . applied[j]
    let mut t: Vec<Vec<S>> = vec![vec![basis[0].dot(&applied[0])]];

    loop {
        let k = basis.len();
        let tm = Array2::from_shape_fn((k, k), |(i, j)| {
            (t[i][j] + t[j][i]) / S::from_real(2.0)
        });
        let (vals, vecs) = sym_eigh(&tm.view()).unwrap();
        let theta = vals[0];
        let y = vecs.column(0);
        // Ritz vector and its exact residual within the restricted problem
        let mut x: Array1<S> = Array1::zeros(dim);
        let mut r: Array1<S> = Array1::zeros(dim);
        for ((c, b), a) in y.iter().zip(&basis).zip(&applied) {
            x.zip_mut_with(b, |xi, bi| *xi += *c * *bi);
            r.zip_mut_with(a, |ri, ai| *ri += *c * *ai);
        }
        r.zip_mut_with(&x, |ri, xi| *ri -= theta * *xi);
        project(&mut r, orth);
        let resid = norm2(&r);
        if resid <= opts.rel_tol * theta.abs().max(S::one()) {
            let n = norm2(&x);
            x.mapv_inplace(|v| v / n);
            return Ok(LanczosOutcome {
                eigenvalue: theta,
                vector: x,
                iterations: iters,
            });
        }
        if iters >= opts.max_iters {
            return Err(LanczosError::NoConvergence {
                iters,
                resid: resid.to_real(),
            });
        }

        if k == max_basis {
            // thick restart: rotate the cached images along with the basis
            let keep_now = keep.min(k - 1);
            let mut new_basis = Vec::with_capacity(max_basis);
            let mut new_applied = Vec::with_capacity(max_basis);
            for j in 0..keep_now {
                let yj = vecs.column(j);
                let mut b: Array1<S> = Array1::zeros(dim);
                let mut a: Array1<S> = Array1::zeros(dim);
                for ((c, bb), aa) in yj.iter().zip(&basis).zip(&applied) {
                    b.zip_mut_with(bb, |xi, bi| *xi += *c * *bi);
                    a.zip_mut_with(aa, |xi, ai| *xi += *c * *ai);
                }
                new_basis.push(b);
                new_applied.push(a);
            }
            basis = new_basis;
            applied = new_applied;
            t = vec![vec![S::zero(); keep_now]; keep_now];
            for i in 0..keep_now {
                for j in 0..keep_now {
                    t[i][j] = basis[i].dot(&applied[j]);
                }
            }
        }

        // expand along the residual direction
        let mut w = r;
        for _ in 0..2 {
            project(&mut w, orth);
            for b in &basis {
                let c = b.dot(&w);
                w.zip_mut_with(b, |wi, bi| *wi -= c * *bi);
            }
        }
        let wnorm = norm2(&w);
        if wnorm <= tiny {
            // invariant subspace: the Ritz value is exact in the complement
            let n = norm2(&x);
            let mut x = x;
            x.mapv_inplace(|v| v / n);
            return Ok(LanczosOutcome {
                eigenvalue: theta,
                vector: x,
                iterations: iters,
            });
        }
        w.mapv_inplace(|v| v / wnorm);
        applied.push(op.apply(&w.view()));
        basis.push(w);
        iters += 1;
        let k2 = basis.len();
        for (i, row) in t.iter_mut().enumerate() {
            row.push(basis[i].dot(&applied[k2 - 1]));
        }
        let mut last = vec![S::zero(); k2];
        for (j, a) in applied.iter().enumerate() {
            last[j] = basis[k2 - 1].dot(a);
        }
        t.push(last);
    }
}

fn project<S: Scalar>(v: &mut Array1<S>, orth: &[Array1<S>]) {
    for u in orth {
        let uu = u.dot(u);
        if uu <= S::min_positive_value() {
            continue;
        }
        let c = u.dot(&*v) / uu;
        v.zip_mut_with(u, |vi, ui| *vi -= c * *ui);
    }
}

fn norm2<S: Scalar>(v: &Array1<S>) -> S {
    v.dot(v).sqrt()
}
