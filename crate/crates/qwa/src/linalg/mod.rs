//! Dense linear algebra primitives: thin QR, singular value decomposition,
//! and symmetric eigensolvers.
//!
//! Everything here is pure Rust, generic over [`Scalar`](crate::Scalar), and
//! sized for the small-to-medium matrices that show up at matrix-product bond
//! cuts (up to a few hundred rows). The SVD and eigensolvers are ports of the
//! classic EISPACK/LINPACK routines.

mod eigh;
mod qr;
mod svd;

pub use eigh::{sym_eigh, tridiag_eigh};
pub use qr::{thin_lq, thin_qr};
pub use svd::{svd, Svd};

use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("{routine}: input contains a non-finite entry")]
    NonFinite { routine: &'static str },
    #[error("{routine}: iteration failed to converge after {iters} steps")]
    NoConvergence { routine: &'static str, iters: usize },
    #[error("{routine}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        routine: &'static str,
        rows: usize,
        cols: usize,
    },
}

/// Column-major working storage; columns are contiguous slices.
pub(crate) struct ColMat<S> {
    pub m: usize,
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> ColMat<S> {
    pub fn zeros(m: usize, n: usize) -> Self {
        ColMat {
            m,
            n,
            data: vec![S::zero(); m * n],
        }
    }

    pub fn from_view(a: &ndarray::ArrayView2<S>) -> Self {
        let (m, n) = a.dim();
        let mut data = Vec::with_capacity(m * n);
        for j in 0..n {
            data.extend(a.column(j).iter().copied());
        }
        ColMat { m, n, data }
    }

    pub fn into_array(self) -> ndarray::Array2<S> {
        let a = ndarray::Array2::from_shape_vec((self.n, self.m), self.data).unwrap();
        a.reversed_axes().as_standard_layout().into_owned()
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[S] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [S] {
        &mut self.data[j * self.m..(j + 1) * self.m]
    }

    /// Disjoint mutable views of columns `a < b`.
    #[inline]
    pub fn two_cols_mut(&mut self, a: usize, b: usize) -> (&mut [S], &mut [S]) {
        debug_assert!(a < b);
        let (lo, hi) = self.data.split_at_mut(b * self.m);
        (&mut lo[a * self.m..(a + 1) * self.m], &mut hi[..self.m])
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[j * self.m + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[j * self.m + i] = v;
    }
}

/// Plane rotation applied to two equal-length slices: `(x, y) <- (c x + s y, -s x + c y)`.
#[inline]
pub(crate) fn rotate_cols<S: Scalar>(x: &mut [S], y: &mut [S], c: S, s: S) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let t = c * *xi + s * *yi;
        *yi = -s * *xi + c * *yi;
        *xi = t;
    }
}

#[inline]
pub(crate) fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    let mut acc = S::zero();
    for (a, b) in x.iter().zip(y.iter()) {
        acc += *a * *b;
    }
    acc
}

#[inline]
pub(crate) fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    for (a, b) in x.iter().zip(y.iter_mut()) {
        *b += alpha * *a;
    }
}
