//! Matrix product states over a chain of spin-1/2 sites: canonical forms,
//! truncated bond decompositions, Schmidt spectra and entropies, amplitudes,
//! and local expectation values.
//!
//! Tensors are real rank-3 arrays with index order `(left bond, physical,
//! right bond)`; physical index 0 is spin up (+1), 1 is spin down (-1).
//! The Hamiltonian is real symmetric in this basis, so real tensors lose
//! nothing.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, Array3, ArrayView2, Order};
use thiserror::Error;

use crate::linalg::{svd, thin_lq, thin_qr};
use crate::rng::SeededRng;
use crate::{Scalar, SpinConfiguration};

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("configuration has {got} spins but the state has {expected} sites")]
    ConfigLengthMismatch { got: usize, expected: usize },
    #[error("states have different site counts: {a} vs {b}")]
    SizeMismatch { a: usize, b: usize },
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint line {line}: {msg}")]
    BadCheckpoint { line: usize, msg: String },
}

/// Controls how many Schmidt states survive a bond truncation.
///
/// `eta` caps the total discarded density-matrix weight per cut; the kept
/// count is then clamped into `[m_min, m_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy<S> {
    pub eta: S,
    pub m_max: usize,
    pub m_min: usize,
}

impl<S: Scalar> Default for TruncationPolicy<S> {
    fn default() -> Self {
        TruncationPolicy {
            eta: S::from_real(1e-8),
            m_max: 512,
            m_min: 2,
        }
    }
}

impl<S: Scalar> TruncationPolicy<S> {
    pub fn with_eta(eta: S) -> Self {
        TruncationPolicy {
            eta,
            ..Self::default()
        }
    }

    /// Smallest kept count whose discarded squared-Schmidt weight stays at or
    /// below `eta`, clamped to the policy bounds and the available rank.
    /// Returns `(kept, discarded_weight)` for a descending spectrum.
    pub fn choose(&self, squared: &[S]) -> (usize, S) {
        let n = squared.len();
        // suffix[k] = weight dropped when keeping k values
        let mut kept = n;
        let mut tail = S::zero();
        for k in (1..=n).rev() {
            let next_tail = tail + squared[k - 1];
            if next_tail <= self.eta {
                kept = k - 1;
                tail = next_tail;
            } else {
                break;
            }
        }
        let kept = kept.max(1).max(self.m_min.min(n)).min(self.m_max).min(n);
        let discarded: S = squared[kept..].iter().copied().sum();
        (kept, discarded)
    }
}

/// An open-boundary matrix product state with a tracked orthogonality center.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductState<S> {
    tensors: Vec<Array3<S>>,
    center: Option<usize>,
}

impl<S: Scalar> MatrixProductState<S> {
    /// Transverse product state: every spin along +x, all amplitudes equal to
    /// `2^(-n/2)`, bond dimension 1 everywhere.
    pub fn product_state_x(n_sites: usize) -> Self {
        assert!(n_sites >= 1);
        let amp = S::from_real(0.5f64.sqrt());
        let tensors = (0..n_sites)
            .map(|_| Array3::from_elem((1, 2, 1), amp))
            .collect();
        MatrixProductState {
            tensors,
            center: Some(0),
        }
    }

    /// Computational basis product state for a spin configuration.
    pub fn basis_state(config: &SpinConfiguration) -> Self {
        let tensors = config
            .0
            .iter()
            .map(|&s| {
                let mut t = Array3::zeros((1, 2, 1));
                t[[0, usize::from(s < 0), 0]] = S::one();
                t
            })
            .collect();
        MatrixProductState {
            tensors,
            center: Some(0),
        }
    }

    /// Normalized state with random entries and bond dimensions up to
    /// `max_bond`; deterministic in `seed`.
    pub fn random(n_sites: usize, max_bond: usize, seed: u64) -> Self {
        assert!(n_sites >= 1);
        let mut rng = SeededRng::new(seed);
        let bond = |i: usize| -> usize {
            // bond i sits between sites i and i+1
            let left = 1usize << (i + 1).min(30);
            let right = 1usize << (n_sites - 1 - i).min(30);
            max_bond.min(left).min(right).max(1)
        };
        let tensors = (0..n_sites)
            .map(|i| {
                let l = if i == 0 { 1 } else { bond(i - 1) };
                let r = if i == n_sites - 1 { 1 } else { bond(i) };
                Array3::from_shape_fn((l, 2, r), |_| S::from_real(rng.uniform_pm1()))
            })
            .collect();
        let mut mps = MatrixProductState {
            tensors,
            center: None,
        };
        mps.move_center(0);
        mps.normalize();
        mps
    }

    /// Exact MPS factorization of a dense state vector (site 0 on the lowest
    /// bit). Intended for tests and small systems.
    pub fn from_statevector(v: &Array1<S>, n_sites: usize) -> Self {
        assert!(n_sites >= 1 && v.len() == 1usize << n_sites);
        let mut rev_tensors = Vec::with_capacity(n_sites);
        // Peel sites off the high-bit end: carry[rest, b] holds the partial
        // contraction, rest spanning the remaining low bits.
        let mut carry: Array2<S> = v.view().to_shape((v.len(), 1)).unwrap().to_owned();
        for k in (1..n_sites).rev() {
            let b = carry.ncols();
            let half = 1usize << k;
            // rows split as (s_k, rest) in C order since bit k is the highest
            let m = carry
                .to_shape((2, half, b))
                .unwrap()
                .permuted_axes([1, 0, 2])
                .as_standard_layout()
                .to_shape(((half, 2 * b), Order::RowMajor))
                .unwrap()
                .to_owned();
            let f = svd(&m.view()).unwrap();
            let cutoff = S::from_real(1e-14) * f.s[0].max(S::min_positive_value());
            let rank = f.s.iter().filter(|&&x| x > cutoff).count().max(1);
            rev_tensors.push(
                f.vt.slice(ndarray::s![..rank, ..])
                    .to_shape(((rank, 2, b), Order::RowMajor))
                    .unwrap()
                    .to_owned(),
            );
            let mut us = f.u.slice(ndarray::s![.., ..rank]).to_owned();
            for (j, mut col) in us.columns_mut().into_iter().enumerate() {
                col.mapv_inplace(|x| x * f.s[j]);
            }
            carry = us;
        }
        let b = carry.ncols();
        rev_tensors.push(carry.to_shape(((1, 2, b), Order::RowMajor)).unwrap().to_owned());
        rev_tensors.reverse();
        let mut mps = MatrixProductState {
            tensors: rev_tensors,
            center: Some(0),
        };
        mps.normalize();
        mps
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    /// Inner bond dimensions, one per cut (empty for a single site).
    pub fn bond_dims(&self) -> Vec<usize> {
        (0..self.n_sites().saturating_sub(1))
            .map(|i| self.tensors[i].dim().2)
            .collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    pub(crate) fn tensor(&self, i: usize) -> &Array3<S> {
        &self.tensors[i]
    }

    pub(crate) fn set_tensor(&mut self, i: usize, t: Array3<S>) {
        self.tensors[i] = t;
    }

    pub(crate) fn set_center(&mut self, c: usize) {
        self.center = Some(c);
    }

    /// Moves the orthogonality center to `site` by successive one-site QR/LQ
    /// shifts. The state as a vector is unchanged.
    pub fn move_center(&mut self, site: usize) {
        assert!(site < self.n_sites());
        match self.center {
            None => {
                // sweep in from both ends
                for c in 0..site {
                    self.shift_right(c);
                }
                for c in (site + 1..self.n_sites()).rev() {
                    self.shift_left(c);
                }
                self.center = Some(site);
            }
            Some(c) => {
                let mut c = c;
                while c < site {
                    self.shift_right(c);
                    c += 1;
                }
                while c > site {
                    self.shift_left(c);
                    c -= 1;
                }
                self.center = Some(site);
            }
        }
    }

    fn shift_right(&mut self, c: usize) {
        let (l, p, _r) = self.tensors[c].dim();
        let (q, rfac) = thin_qr(&lmat(&self.tensors[c]));
        let k = q.ncols();
        self.tensors[c] = q.into_shape_with_order((l, p, k)).unwrap();
        let (nl, np, nr) = self.tensors[c + 1].dim();
        debug_assert_eq!(nl, _r);
        let prod = rfac.dot(&rmat(&self.tensors[c + 1]));
        self.tensors[c + 1] = prod.into_shape_with_order((k, np, nr)).unwrap();
    }

    fn shift_left(&mut self, c: usize) {
        let (_l, p, r) = self.tensors[c].dim();
        let (lfac, q) = thin_lq(&rmat(&self.tensors[c]));
        let k = q.nrows();
        self.tensors[c] = q.into_shape_with_order((k, p, r)).unwrap();
        let (pl, pp, pr) = self.tensors[c - 1].dim();
        debug_assert_eq!(pr, _l);
        let prod = lmat(&self.tensors[c - 1]).dot(&lfac);
        self.tensors[c - 1] = prod.into_shape_with_order((pl, pp, k)).unwrap();
    }

    pub fn norm(&mut self) -> S {
        if self.center.is_none() {
            self.move_center(0);
        }
        let c = self.center.unwrap();
        self.tensors[c].iter().map(|x| *x * *x).sum::<S>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > S::zero() {
            let c = self.center.unwrap();
            self.tensors[c].mapv_inplace(|x| x / n);
        }
    }

    /// Schmidt coefficients across bond `b` (between sites `b` and `b + 1`),
    /// sorted descending. Moves the center to `b` as a side effect.
    pub fn schmidt_values(&mut self, bond: usize) -> Array1<S> {
        assert!(bond + 1 < self.n_sites());
        self.move_center(bond);
        let (l, p, r) = self.tensors[bond].dim();
        let mat = self.tensors[bond]
            .view()
            .to_shape((l * p, r))
            .unwrap()
            .to_owned();
        svd(&mat.view()).unwrap().s
    }

    /// Von Neumann entropy `-sum lambda^2 ln lambda^2` across bond `b`
    /// (natural log).
    pub fn bond_entropy(&mut self, bond: usize) -> S {
        entropy_from_schmidt(&self.schmidt_values(bond))
    }

    /// Largest bond entropy over all cuts (0 for a single site).
    pub fn max_bond_entropy(&mut self) -> S {
        let n = self.n_sites();
        if n < 2 {
            return S::zero();
        }
        self.move_center(0);
        let mut best = S::zero();
        for b in 0..n - 1 {
            let (l, p, r) = self.tensors[b].dim();
            let mat = self.tensors[b].view().to_shape((l * p, r)).unwrap().to_owned();
            let s = svd(&mat.view()).unwrap().s;
            best = best.max(entropy_from_schmidt(&s));
            if b + 1 < n {
                self.shift_right(b);
                self.center = Some(b + 1);
            }
        }
        best
    }

    /// Discards Schmidt weight across bond `b` down to the policy, keeping
    /// the state normalized. Returns `(discarded_weight, kept_m)`; a kept
    /// count pinned at `m_max` with `discarded > eta` means the cap was the
    /// binding constraint.
    pub fn truncate_bond(&mut self, bond: usize, policy: &TruncationPolicy<S>) -> (S, usize) {
        assert!(bond + 1 < self.n_sites());
        self.move_center(bond);
        self.normalize();
        let (l, p, _r) = self.tensors[bond].dim();
        let f = svd(&lmat(&self.tensors[bond])).unwrap();
        let squared: Vec<S> = f.s.iter().map(|x| *x * *x).collect();
        let (kept, discarded) = policy.choose(&squared);
        let u = f.u.slice(ndarray::s![.., ..kept]).to_owned();
        self.tensors[bond] = u.into_shape_with_order((l, p, kept)).unwrap();
        let renorm = (S::one() - discarded).max(S::min_positive_value()).sqrt();
        let mut carry = f.vt.slice(ndarray::s![..kept, ..]).to_owned();
        for (i, mut row) in carry.outer_iter_mut().enumerate() {
            let w = f.s[i] / renorm;
            row.mapv_inplace(|x| x * w);
        }
        let (nl, np, nr) = self.tensors[bond + 1].dim();
        debug_assert_eq!(nl, _r);
        let prod = carry.dot(&rmat(&self.tensors[bond + 1]));
        self.tensors[bond + 1] = prod.into_shape_with_order((kept, np, nr)).unwrap();
        self.center = Some(bond + 1);
        (discarded, kept)
    }

    /// `<config|psi>` by contracting the selected physical indices.
    pub fn amplitude(&self, config: &SpinConfiguration) -> Result<S, MpsError> {
        if config.len() != self.n_sites() {
            return Err(MpsError::ConfigLengthMismatch {
                got: config.len(),
                expected: self.n_sites(),
            });
        }
        let mut v = Array1::from_elem(1, S::one());
        for (i, &s) in config.0.iter().enumerate() {
            let phys = usize::from(s < 0);
            let slice = self.tensors[i].slice(ndarray::s![.., phys, ..]);
            v = v.dot(&slice);
        }
        Ok(v[0])
    }

    /// `<sigma^z>` at one site; moves the center there.
    pub fn expect_sz(&mut self, site: usize) -> S {
        self.move_center(site);
        sz_at_center(&self.tensors[site])
    }

    /// `<sigma^z>` at every site with one sweep of center moves.
    pub fn expect_sz_all(&mut self) -> Vec<S> {
        let n = self.n_sites();
        self.move_center(0);
        let mut out = Vec::with_capacity(n);
        for c in 0..n {
            out.push(sz_at_center(&self.tensors[c]));
            if c + 1 < n {
                self.shift_right(c);
                self.center = Some(c + 1);
            }
        }
        out
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Result<S, MpsError> {
        if self.n_sites() != other.n_sites() {
            return Err(MpsError::SizeMismatch {
                a: self.n_sites(),
                b: other.n_sites(),
            });
        }
        let mut env = Array2::from_elem((1, 1), S::one());
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            let (bl, bp, br) = b.dim();
            let t = env.dot(&b.view().to_shape((bl, bp * br)).unwrap());
            let (al, ap, ar) = a.dim();
            let t = t.to_shape((al * ap, br)).unwrap().to_owned();
            let amat = a.view().to_shape((al * ap, ar)).unwrap().to_owned();
            env = amat.t().dot(&t);
        }
        Ok(env[[0, 0]])
    }

    /// Dense amplitudes, site 0 on the lowest bit. Exponential in size;
    /// guarded to 24 sites.
    pub fn to_statevector(&self) -> Array1<S> {
        let n = self.n_sites();
        assert!(n <= 24, "dense reconstruction guarded to 24 sites");
        let mut psi = Array2::from_elem((1, 1), S::one());
        for t in &self.tensors {
            let (l, p, r) = t.dim();
            let d = psi.nrows();
            let tmp = psi.dot(&t.view().to_shape((l, p * r)).unwrap()); // (d, p*r)
            let tmp = tmp
                .to_shape((d, p, r))
                .unwrap()
                .permuted_axes([1, 0, 2])
                .as_standard_layout()
                .into_owned();
            psi = tmp.to_shape(((p * d, r), Order::RowMajor)).unwrap().to_owned();
        }
        psi.into_shape_with_order(1 << n).unwrap()
    }

    /// Writes an exact text checkpoint of the tensors.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<(), MpsError> {
        writeln!(w, "qwa-mps v1")?;
        writeln!(w, "sites {}", self.n_sites())?;
        match self.center {
            Some(c) => writeln!(w, "center {c}")?,
            None => writeln!(w, "center none")?,
        }
        for (i, t) in self.tensors.iter().enumerate() {
            let (l, p, r) = t.dim();
            write!(w, "tensor {i} {l} {p} {r}")?;
            for x in t.iter() {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        writeln!(w, "end")?;
        Ok(())
    }

    /// Reads a checkpoint written by [`Self::write_checkpoint`].
    pub fn read_checkpoint<R: BufRead>(r: R) -> Result<Self, MpsError> {
        let bad = |line: usize, msg: &str| MpsError::BadCheckpoint {
            line,
            msg: msg.to_string(),
        };
        let mut lines = r.lines().enumerate();
        let (ln, first) = lines.next().ok_or_else(|| bad(1, "empty checkpoint"))?;
        if first?.trim() != "qwa-mps v1" {
            return Err(bad(ln + 1, "missing qwa-mps header"));
        }
        let mut n_sites = None;
        let mut center: Option<Option<usize>> = None;
        let mut tensors: Vec<Array3<S>> = Vec::new();
        for (ln, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next().unwrap() {
                "sites" => {
                    n_sites = parts.next().and_then(|s| s.parse().ok());
                }
                "center" => {
                    let tok = parts.next().ok_or_else(|| bad(ln + 1, "center needs a value"))?;
                    center = Some(if tok == "none" { None } else { tok.parse().ok() });
                }
                "tensor" => {
                    let mut dims = [0usize; 4];
                    for d in dims.iter_mut() {
                        *d = parts
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| bad(ln + 1, "tensor needs `i l p r` dims"))?;
                    }
                    let [idx, l, p, r] = dims;
                    if idx != tensors.len() {
                        return Err(bad(ln + 1, "tensor records out of order"));
                    }
                    let mut vals = Vec::with_capacity(l * p * r);
                    for tok in parts {
                        vals.push(
                            S::parse_text(tok).ok_or_else(|| bad(ln + 1, "bad tensor entry"))?,
                        );
                    }
                    if vals.len() != l * p * r {
                        return Err(bad(ln + 1, "tensor entry count does not match dims"));
                    }
                    tensors.push(Array3::from_shape_vec((l, p, r), vals).unwrap());
                }
                "end" => break,
                _ => return Err(bad(ln + 1, "unknown record")),
            }
        }
        let n = n_sites.ok_or_else(|| bad(0, "missing sites record"))?;
        if tensors.len() != n {
            return Err(bad(0, "tensor count does not match sites"));
        }
        for i in 0..n.saturating_sub(1) {
            if tensors[i].dim().2 != tensors[i + 1].dim().0 {
                return Err(bad(0, "adjacent tensors have mismatched bond dims"));
            }
        }
        Ok(MatrixProductState {
            tensors,
            center: center.flatten(),
        })
    }
}

fn sz_at_center<S: Scalar>(t: &Array3<S>) -> S {
    let up: S = t.slice(ndarray::s![.., 0, ..]).iter().map(|x| *x * *x).sum();
    let dn: S = t.slice(ndarray::s![.., 1, ..]).iter().map(|x| *x * *x).sum();
    up - dn
}

fn entropy_from_schmidt<S: Scalar>(s: &Array1<S>) -> S {
    let mut acc = S::zero();
    for &x in s.iter() {
        let w = x * x;
        if w > S::min_positive_value() {
            acc -= w * w.ln();
        }
    }
    acc
}

/// Left-matricized view `(l * p, r)` of a site tensor.
pub(crate) fn lmat<S: Scalar>(t: &Array3<S>) -> ArrayView2<'_, S> {
    let (l, p, r) = t.dim();
    t.view().into_shape_with_order((l * p, r)).unwrap()
}

/// Right-matricized view `(l, p * r)` of a site tensor.
pub(crate) fn rmat<S: Scalar>(t: &Array3<S>) -> ArrayView2<'_, S> {
    let (l, p, r) = t.dim();
    t.view().into_shape_with_order((l, p * r)).unwrap()
}
