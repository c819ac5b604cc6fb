//! Thin Householder QR and LQ factorizations, used for canonicalization
//! moves on matrix-product tensors.

use ndarray::{Array2, ArrayView2};

use super::{axpy, dot, ColMat};
use crate::Scalar;

/// Thin QR: `a = q * r` with `q` of shape `(m, k)`, `r` upper-triangular of
/// shape `(k, n)`, `k = min(m, n)`. The diagonal of `r` is non-negative,
/// which makes the factorization of a full-column-rank matrix unique.
pub fn thin_qr<S: Scalar>(a: &ArrayView2<S>) -> (Array2<S>, Array2<S>) {
    let (m, n) = a.dim();
    let k = m.min(n);
    let zero = S::zero();
    let one = S::one();
    let mut r = ColMat::from_view(a);
    // Householder vectors, one per reflected column.
    let mut vs: Vec<Vec<S>> = Vec::with_capacity(k);

    for j in 0..k {
        let mut norm = zero;
        for i in j..m {
            norm = norm.hypot(r.at(i, j));
        }
        let mut v = vec![zero; m - j];
        if norm != zero {
            let mut alpha = norm;
            if r.at(j, j) > zero {
                alpha = -alpha;
            }
            v.copy_from_slice(&r.col(j)[j..]);
            v[0] -= alpha;
            let vnorm2 = dot(&v, &v);
            if vnorm2 != zero {
                // apply H = I - 2 v v'/(v'v) to the trailing block
                for c in j..n {
                    let col = &mut r.col_mut(c)[j..];
                    let t = dot(&v, col) / vnorm2;
                    axpy(-(t + t), &v, col);
                }
            }
            r.set(j, j, alpha);
            for i in j + 1..m {
                r.set(i, j, zero);
            }
        }
        vs.push(v);
    }

    // q = H_0 H_1 ... H_{k-1} applied to the first k identity columns
    let mut q = ColMat::<S>::zeros(m, k);
    for j in 0..k {
        q.set(j, j, one);
    }
    for j in (0..k).rev() {
        let v = &vs[j];
        let vnorm2 = dot(v, v);
        if vnorm2 == zero {
            continue;
        }
        for c in 0..k {
            let col = &mut q.col_mut(c)[j..];
            let t = dot(v, col) / vnorm2;
            axpy(-(t + t), v, col);
        }
    }

    // fix signs so that diag(r) >= 0
    for j in 0..k {
        if r.at(j, j) < zero {
            for c in j..n {
                let x = r.at(j, c);
                r.set(j, c, -x);
            }
            for x in q.col_mut(j).iter_mut() {
                *x = -*x;
            }
        }
    }

    let r_full = r.into_array();
    (q.into_array(), r_full.slice(ndarray::s![..k, ..]).to_owned())
}

/// Thin LQ: `a = l * q` with `l` lower-triangular `(m, k)` and `q` of shape
/// `(k, n)` having orthonormal rows, `k = min(m, n)`.
pub fn thin_lq<S: Scalar>(a: &ArrayView2<S>) -> (Array2<S>, Array2<S>) {
    let at = a.t();
    let (q, r) = thin_qr(&at);
    (
        r.reversed_axes().as_standard_layout().into_owned(),
        q.reversed_axes().as_standard_layout().into_owned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> Array2<f64> {
        let mut rng = SeededRng::new(seed);
        Array2::from_shape_fn((m, n), |_| rng.uniform_pm1())
    }

    #[test]
    fn qr_reconstruction_and_orthonormality() {
        for (m, n, seed) in [(4, 4, 1), (8, 3, 2), (3, 8, 3), (1, 5, 4), (5, 1, 5), (30, 17, 6)] {
            let a = random_matrix(m, n, seed);
            let (q, r) = thin_qr(&a.view());
            let k = m.min(n);
            assert_eq!(q.dim(), (m, k));
            assert_eq!(r.dim(), (k, n));
            let recon = q.dot(&r);
            for (x, y) in recon.iter().zip(a.iter()) {
                assert!((x - y).abs() < 1e-13);
            }
            let qtq = q.t().dot(&q);
            for i in 0..k {
                for j in 0..k {
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq[[i, j]] - id).abs() < 1e-13);
                }
            }
            for j in 0..k {
                assert!(r[[j, j]] >= 0.0);
                for i in j + 1..k {
                    assert!(r[[i, j]].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn lq_reconstruction() {
        let a = random_matrix(3, 7, 9);
        let (l, q) = thin_lq(&a.view());
        let recon = l.dot(&q);
        for (x, y) in recon.iter().zip(a.iter()) {
            assert!((x - y).abs() < 1e-13);
        }
        let qqt = q.dot(&q.t());
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((qqt[[i, j]] - id).abs() < 1e-13);
            }
        }
    }
}
