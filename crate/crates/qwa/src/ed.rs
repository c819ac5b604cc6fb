//! Exact-diagonalization reference for small systems.
//!
//! Dense state vectors index site `k` on bit `k` (bit 0 = spin up), matching
//! [`MatrixProductState::to_statevector`](crate::MatrixProductState::to_statevector)
//! and [`SpinConfiguration::basis_index`](crate::SpinConfiguration::basis_index).
//! The eigensolver here is a self-contained Lanczos with full
//! reorthogonalization and deflation, kept independent of the production
//! solver in [`crate::lanczos`] so it can serve as an oracle for it.

use ndarray::{Array1, Array2};

use crate::hamiltonian::MatrixProductOperator;
use crate::instance::Instance;
use crate::rng::SeededRng;
use crate::Scalar;

/// Matrix-free dense transverse-field Hamiltonian on `n <= 24` sites.
pub struct DenseHamiltonian<S> {
    n: usize,
    gamma: S,
    diag: Vec<S>,
}

impl<S: Scalar> DenseHamiltonian<S> {
    /// Site `k` of `instance` lands on bit `k`.
    pub fn new(instance: &Instance<S>, gamma: S) -> Self {
        let n = instance.n_sites();
        assert!(n <= 24, "dense oracle guarded to 24 sites");
        let dim = 1usize << n;
        let mut diag = vec![S::zero(); dim];
        for (idx, d) in diag.iter_mut().enumerate() {
            let spin = |k: usize| if idx >> k & 1 == 0 { S::one() } else { -S::one() };
            let mut e = S::zero();
            for edge in instance.edges() {
                e -= edge.coupling * spin(edge.i) * spin(edge.j);
            }
            for (k, h) in instance.fields_z().iter().enumerate() {
                e -= *h * spin(k);
            }
            *d = e;
        }
        DenseHamiltonian { n, gamma, diag }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `out = H v`.
    pub fn apply(&self, v: &[S], out: &mut [S]) {
        for (o, (d, x)) in out.iter_mut().zip(self.diag.iter().zip(v.iter())) {
            *o = *d * *x;
        }
        for k in 0..self.n {
            let bit = 1usize << k;
            for idx in 0..self.dim() {
                out[idx] -= self.gamma * v[idx ^ bit];
            }
        }
    }

    /// Full matrix; guarded to 12 sites.
    pub fn matrix(&self) -> Array2<S> {
        assert!(self.n <= 12);
        let dim = self.dim();
        let mut h = Array2::zeros((dim, dim));
        for idx in 0..dim {
            h[[idx, idx]] = self.diag[idx];
            for k in 0..self.n {
                h[[idx ^ (1 << k), idx]] -= self.gamma;
            }
        }
        h
    }

    /// The `how_many` lowest eigenpairs by Lanczos with full
    /// reorthogonalization; repeated eigenvalues are reached by deflating
    /// converged vectors out of later runs.
    pub fn lowest_eigenpairs(&self, how_many: usize, seed: u64) -> Vec<(S, Array1<S>)> {
        let dim = self.dim();
        let tol = S::from_real(1e-12);
        let mut found: Vec<(S, Array1<S>)> = Vec::new();
        let mut rng = SeededRng::new(seed);
        for _ in 0..how_many.min(dim) {
            let mut v0 = Array1::from_shape_fn(dim, |_| S::from_real(rng.uniform_pm1()));
            project_out(&mut v0, &found);
            let norm = v0.dot(&v0).sqrt();
            v0.mapv_inplace(|x| x / norm);

            let max_basis = dim.min(500);
            let mut basis: Vec<Array1<S>> = vec![v0];
            let mut alphas: Vec<S> = Vec::new();
            let mut betas: Vec<S> = Vec::new();
            let mut best: Option<(S, Array1<S>)> = None;
            for j in 0..max_basis {
                let mut w = Array1::zeros(dim);
                self.apply(basis[j].as_slice().unwrap(), w.as_slice_mut().unwrap());
                let alpha = basis[j].dot(&w);
                alphas.push(alpha);
                // full reorthogonalization, two passes
                for _ in 0..2 {
                    project_out(&mut w, &found);
                    for b in &basis {
                        let c = b.dot(&w);
                        w.zip_mut_with(b, |wi, bi| *wi -= c * *bi);
                    }
                }
                let beta = w.dot(&w).sqrt();
                let (theta, y) = lowest_ritz(&alphas, &betas);
                let resid = beta * y[j].abs();
                if resid <= tol * theta.abs().max(S::one())
                    || beta <= S::epsilon() * S::from_real(16.0)
                    || j + 1 == max_basis
                {
                    let mut x: Array1<S> = Array1::zeros(dim);
                    for (c, b) in y.iter().zip(&basis) {
                        x.zip_mut_with(b, |xi, bi| *xi += *c * *bi);
                    }
                    let norm = x.dot(&x).sqrt();
                    x.mapv_inplace(|v| v / norm);
                    best = Some((theta, x));
                    break;
                }
                betas.push(beta);
                w.mapv_inplace(|x| x / beta);
                basis.push(w);
            }
            found.push(best.expect("lanczos loop always yields a pair"));
        }
        found
    }

    pub fn ground(&self, seed: u64) -> (S, Array1<S>) {
        self.lowest_eigenpairs(1, seed).pop().unwrap()
    }
}

/// `<sz_k>` for every site of a normalized dense state.
pub fn sz_expectations<S: Scalar>(state: &Array1<S>, n_sites: usize) -> Vec<S> {
    assert_eq!(state.len(), 1 << n_sites);
    let mut out = vec![S::zero(); n_sites];
    for (idx, amp) in state.iter().enumerate() {
        let w = *amp * *amp;
        for (k, o) in out.iter_mut().enumerate() {
            if idx >> k & 1 == 0 {
                *o += w;
            } else {
                *o -= w;
            }
        }
    }
    out
}

fn project_out<S: Scalar>(v: &mut Array1<S>, basis: &[(S, Array1<S>)]) {
    for (_, b) in basis {
        let c = b.dot(&*v);
        v.zip_mut_with(b, |vi, bi| *vi -= c * *bi);
    }
}

fn lowest_ritz<S: Scalar>(alphas: &[S], betas: &[S]) -> (S, Vec<S>) {
    let k = alphas.len();
    let (w, z) = crate::linalg::tridiag_eigh(alphas, &betas[..k - 1]).unwrap();
    (w[0], z.column(0).to_vec())
}

/// Dense matrix of an MPO; guarded to 10 sites.
pub fn mpo_dense_matrix<S: Scalar>(mpo: &MatrixProductOperator<S>) -> Array2<S> {
    let n = mpo.n_sites();
    assert!(n <= 10);
    // grow flat[b][out][in] site by site; new site bits go high
    let mut bond = 1usize;
    let mut dim = 1usize;
    let mut flat: Vec<S> = vec![S::one()];
    for p in 0..n {
        let w = mpo.tensor(p);
        let (bl, _, _, br) = w.dim();
        debug_assert_eq!(bl, bond);
        let ndim = dim * 2;
        let mut next = vec![S::zero(); br * ndim * ndim];
        for b2 in 0..br {
            for so in 0..2 {
                for si in 0..2 {
                    for b in 0..bl {
                        let coeff = w[[b, so, si, b2]];
                        if coeff == S::zero() {
                            continue;
                        }
                        for o in 0..dim {
                            let no = so * dim + o;
                            let row_old = b * dim * dim + o * dim;
                            let row_new = b2 * ndim * ndim + no * ndim + si * dim;
                            for i in 0..dim {
                                next[row_new + i] += coeff * flat[row_old + i];
                            }
                        }
                    }
                }
            }
        }
        flat = next;
        bond = br;
        dim = ndim;
    }
    debug_assert_eq!(bond, 1);
    Array1::from(flat).into_shape_with_order((dim, dim)).unwrap()
}

/// `H v` computed directly from the MPO tensors, usable past the dense-matrix
/// guard (memory is `O(D 2^n)`).
pub fn mpo_apply_statevector<S: Scalar>(
    mpo: &MatrixProductOperator<S>,
    v: &Array1<S>,
) -> Array1<S> {
    let n = mpo.n_sites();
    assert_eq!(v.len(), 1 << n);
    let dim = v.len();
    // carry[b][idx]: bits < k are output, bits >= k still input
    let mut carry: Vec<Vec<S>> = vec![v.to_vec()];
    for k in 0..n {
        let w = mpo.tensor(k);
        let (bl, _, _, br) = w.dim();
        debug_assert_eq!(bl, carry.len());
        let bit = 1usize << k;
        let mut next = vec![vec![S::zero(); dim]; br];
        for (b2, out) in next.iter_mut().enumerate() {
            for so in 0..2 {
                for si in 0..2 {
                    for (b, cb) in carry.iter().enumerate() {
                        let coeff = w[[b, so, si, b2]];
                        if coeff == S::zero() {
                            continue;
                        }
                        let want = if so == 0 { 0 } else { bit };
                        let put = if si == 0 { 0 } else { bit };
                        for idx in 0..dim {
                            if idx & bit == want {
                                out[idx] += coeff * cb[(idx & !bit) | put];
                            }
                        }
                    }
                }
            }
        }
        carry = next;
    }
    debug_assert_eq!(carry.len(), 1);
    Array1::from(carry.pop().unwrap())
}
