//! Symmetric eigensolvers: Householder tridiagonalization followed by the
//! implicit-shift QL iteration (EISPACK tred2/tql2 lineage).

use ndarray::{Array1, Array2, ArrayView2};

use super::{ColMat, LinalgError};
use crate::Scalar;

/// Eigendecomposition of a real symmetric tridiagonal matrix.
///
/// `diag` has length `n`, `offdiag[i]` couples rows `i` and `i + 1`
/// (length `n - 1`, may be empty for `n = 1`). Returns eigenvalues in
/// ascending order; the `k`-th column of the returned matrix is the
/// eigenvector of the `k`-th eigenvalue.
pub fn tridiag_eigh<S: Scalar>(
    diag: &[S],
    offdiag: &[S],
) -> Result<(Array1<S>, Array2<S>), LinalgError> {
    let n = diag.len();
    assert_eq!(offdiag.len(), n.saturating_sub(1));
    let mut d = diag.to_vec();
    let mut e = vec![S::zero(); n];
    e[..n - 1].copy_from_slice(offdiag);
    let mut z = ColMat::<S>::zeros(n, n);
    for j in 0..n {
        z.set(j, j, S::one());
    }
    tql2(&mut d, &mut e, &mut z)?;
    Ok((Array1::from_vec(d), z.into_array()))
}

/// Eigendecomposition of a real symmetric dense matrix (only the lower
/// triangle is referenced... both triangles are assumed equal). Eigenvalues
/// ascending, eigenvectors in the columns.
pub fn sym_eigh<S: Scalar>(a: &ArrayView2<S>) -> Result<(Array1<S>, Array2<S>), LinalgError> {
    let (m, n) = a.dim();
    if m != n {
        return Err(LinalgError::NotSquare {
            routine: "sym_eigh",
            rows: m,
            cols: n,
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite { routine: "sym_eigh" });
    }
    let mut z = ColMat::from_view(a);
    let mut d = vec![S::zero(); n];
    let mut e = vec![S::zero(); n];
    tred2(&mut z, &mut d, &mut e);
    // tred2 leaves e[i] coupling (i-1, i); shift to the (i, i+1) convention.
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = S::zero();
    tql2(&mut d, &mut e, &mut z)?;
    Ok((Array1::from_vec(d), z.into_array()))
}

/// Householder reduction of a symmetric matrix to tridiagonal form, with the
/// orthogonal transform accumulated in-place. On exit `d` holds the diagonal
/// and `e[1..]` the subdiagonal (`e[i]` couples rows `i - 1` and `i`).
#[allow(clippy::needless_range_loop)]
fn tred2<S: Scalar>(z: &mut ColMat<S>, d: &mut [S], e: &mut [S]) {
    let n = z.n;
    let zero = S::zero();
    for j in 0..n {
        d[j] = z.at(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = z.at(i - 1, j);
                z.set(i, j, zero);
                z.set(j, i, zero);
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = zero;
            }
            for j in 0..i {
                let f = d[j];
                z.set(j, i, f);
                let mut g = e[j] + z.at(j, j) * f;
                for k in j + 1..i {
                    g += z.at(k, j) * d[k];
                    e[k] += z.at(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = zero;
            for j in 0..i {
                e[j] = e[j] / h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let v = z.at(k, j) - (f * e[k] + g * d[k]);
                    z.set(k, j, v);
                }
                d[j] = z.at(i - 1, j);
                z.set(i, j, zero);
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        let v = z.at(i, i);
        z.set(n - 1, i, v);
        z.set(i, i, S::one());
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = z.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g += z.at(k, i + 1) * z.at(k, j);
                }
                for k in 0..=i {
                    let v = z.at(k, j) - g * d[k];
                    z.set(k, j, v);
                }
            }
        }
        for k in 0..=i {
            z.set(k, i + 1, zero);
        }
    }
    for j in 0..n {
        d[j] = z.at(n - 1, j);
        z.set(n - 1, j, zero);
    }
    z.set(n - 1, n - 1, S::one());
    e[0] = zero;
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix; `e[l]`
/// couples rows `l` and `l + 1` on entry, `z` accumulates the rotations.
/// Eigenvalues are sorted ascending on exit, `z` columns follow.
fn tql2<S: Scalar>(d: &mut [S], e: &mut [S], z: &mut ColMat<S>) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let zero = S::zero();
    let one = S::one();
    let two = one + one;
    let eps = S::epsilon();
    let mut f = zero;
    let mut tst1 = zero;
    e[n - 1] = zero;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        debug_assert!(m < n, "e[n-1] is zero so the scan stops before n");

        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(LinalgError::NoConvergence {
                        routine: "tql2",
                        iters: iter,
                    });
                }
                // implicit shift
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d[l + 2..n].iter_mut() {
                    *item -= h;
                }
                f += h;

                // QL sweep
                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (zi, zi1) = z.two_cols_mut(i, i + 1);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }

    // selection sort ascending, carrying eigenvector columns along
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in i + 1..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d.swap(i, k);
            let (a, b) = z.two_cols_mut(i, k);
            a.swap_with_slice(b);
        }
    }
    Ok(())
}
