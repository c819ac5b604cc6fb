//! Thin singular value decomposition by Householder bidiagonalization and
//! implicit-shift QR on the bidiagonal (Golub-Kahan-Reinsch, following the
//! LINPACK/JAMA formulation).

use ndarray::{Array1, Array2, ArrayView2};

use super::{axpy, dot, rotate_cols, ColMat, LinalgError};
use crate::Scalar;

/// Result of [`svd`]: `a = u * diag(s) * vt` with `u` of shape `(m, k)`,
/// `vt` of shape `(k, n)`, `k = min(m, n)`, and `s` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd<S> {
    pub u: Array2<S>,
    pub s: Array1<S>,
    pub vt: Array2<S>,
}

pub fn svd<S: Scalar>(a: &ArrayView2<S>) -> Result<Svd<S>, LinalgError> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite { routine: "svd" });
    }
    let (m, n) = a.dim();
    if m >= n {
        svd_tall(ColMat::from_view(a))
    } else {
        // a = u s vt  <=>  a' = v s u'
        let at = a.t();
        let Svd { u, s, vt } = svd_tall(ColMat::from_view(&at))?;
        Ok(Svd {
            u: vt.reversed_axes().as_standard_layout().into_owned(),
            s,
            vt: u.reversed_axes().as_standard_layout().into_owned(),
        })
    }
}

/// Core routine, requires `m >= n`. Returns thin `u` (m x n) and full `vt` (n x n).
#[allow(clippy::needless_range_loop)]
fn svd_tall<S: Scalar>(mut a: ColMat<S>) -> Result<Svd<S>, LinalgError> {
    let (m, n) = (a.m, a.n);
    debug_assert!(m >= n && n >= 1);
    let nu = n;
    let mut s = vec![S::zero(); n];
    let mut e = vec![S::zero(); n];
    let mut work = vec![S::zero(); m];
    let mut u = ColMat::<S>::zeros(m, nu);
    let mut v = ColMat::<S>::zeros(n, n);
    let zero = S::zero();
    let one = S::one();

    // Householder reduction to bidiagonal form; the column transforms are
    // staged in the lower part of `a`, the row transforms in `e`.
    let nct = (m - 1).min(n);
    let nrt = n.saturating_sub(2).min(m);
    for k in 0..nct.max(nrt) {
        if k < nct {
            let mut sk = zero;
            for i in k..m {
                sk = sk.hypot(a.at(i, k));
            }
            if sk != zero {
                if a.at(k, k) < zero {
                    sk = -sk;
                }
                let col = a.col_mut(k);
                for i in k..m {
                    col[i] = col[i] / sk;
                }
                col[k] += one;
            }
            s[k] = -sk;
        }
        for j in k + 1..n {
            if k < nct && s[k] != zero {
                let t = -dot(&a.col(k)[k..], &a.col(j)[k..]) / a.at(k, k);
                let (ck, cj) = a.two_cols_mut(k, j);
                axpy(t, &ck[k..], &mut cj[k..]);
            }
            e[j] = a.at(k, j);
        }
        if k < nct {
            u.col_mut(k)[k..].copy_from_slice(&a.col(k)[k..]);
        }
        if k < nrt {
            let mut ek = zero;
            for i in k + 1..n {
                ek = ek.hypot(e[i]);
            }
            if ek != zero {
                if e[k + 1] < zero {
                    ek = -ek;
                }
                for i in k + 1..n {
                    e[i] = e[i] / ek;
                }
                e[k + 1] += one;
            }
            e[k] = -ek;
            if k + 1 < m && e[k] != zero {
                for w in work[k + 1..m].iter_mut() {
                    *w = zero;
                }
                for j in k + 1..n {
                    axpy(e[j], &a.col(j)[k + 1..], &mut work[k + 1..]);
                }
                for j in k + 1..n {
                    let t = -e[j] / e[k + 1];
                    axpy(t, &work[k + 1..], &mut a.col_mut(j)[k + 1..]);
                }
            }
            v.col_mut(k)[k + 1..].copy_from_slice(&e[k + 1..n]);
        }
    }

    // Final bidiagonal: diagonal in s, superdiagonal in e.
    let p_init = n.min(m + 1);
    if nct < n {
        s[nct] = a.at(nct, nct);
    }
    if m < p_init {
        s[p_init - 1] = zero;
    }
    if nrt + 1 < p_init {
        e[nrt] = a.at(nrt, p_init - 1);
    }
    e[p_init - 1] = zero;

    // Accumulate the left transforms into u.
    for j in nct..nu {
        for x in u.col_mut(j).iter_mut() {
            *x = zero;
        }
        u.set(j, j, one);
    }
    for k in (0..nct).rev() {
        if s[k] != zero {
            for j in k + 1..nu {
                let t = -dot(&u.col(k)[k..], &u.col(j)[k..]) / u.at(k, k);
                let (ck, cj) = u.two_cols_mut(k, j);
                axpy(t, &ck[k..], &mut cj[k..]);
            }
            let col = u.col_mut(k);
            for x in col[k..].iter_mut() {
                *x = -*x;
            }
            col[k] += one;
            for x in col[..k].iter_mut() {
                *x = zero;
            }
        } else {
            for x in u.col_mut(k).iter_mut() {
                *x = zero;
            }
            u.set(k, k, one);
        }
    }

    // Accumulate the right transforms into v.
    for k in (0..n).rev() {
        if k < nrt && e[k] != zero {
            for j in k + 1..nu {
                let t = -dot(&v.col(k)[k + 1..], &v.col(j)[k + 1..]) / v.at(k + 1, k);
                let (ck, cj) = v.two_cols_mut(k, j);
                axpy(t, &ck[k + 1..], &mut cj[k + 1..]);
            }
        }
        for x in v.col_mut(k).iter_mut() {
            *x = zero;
        }
        v.set(k, k, one);
    }

    // Implicit-shift QR on the bidiagonal.
    let mut p = p_init;
    let pp = p - 1;
    let mut iter = 0usize;
    let total_budget = 60 * n.max(1);
    let eps = S::epsilon();
    let tiny = S::min_positive_value() / eps;
    while p > 0 {
        // Negligible superdiagonal / diagonal detection picks the step kind:
        // 1 deflate s(p-1), 2 split at negligible s(k), 3 QR step, 4 converged.
        let mut k: isize = p as isize - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = zero;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p as isize - 2 {
            kase = 4;
        } else {
            let mut ks: isize = p as isize - 1;
            while ks > k {
                let ksu = ks as usize;
                let mut t = e[ksu].abs();
                if ks != k + 1 {
                    t += e[ksu - 1].abs();
                }
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = zero;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p as isize - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        let k = (k + 1) as usize;

        match kase {
            1 => {
                let mut f = e[p - 2];
                e[p - 2] = zero;
                for j in (k..p - 1).rev() {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] = cs * e[j - 1];
                    }
                    let (cj, cp) = v.two_cols_mut(j, p - 1);
                    rotate_cols(cj, cp, cs, sn);
                }
            }
            2 => {
                let mut f = e[k - 1];
                e[k - 1] = zero;
                for j in k..p {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] = cs * e[j];
                    let (ck, cj) = u.two_cols_mut(k - 1, j);
                    rotate_cols(cj, ck, cs, sn);
                }
            }
            3 => {
                // Wilkinson shift from the trailing 2x2.
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let two = one + one;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / two;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = zero;
                if b != zero || c != zero {
                    shift = (b * b + c).sqrt();
                    if b < zero {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in k..p - 1 {
                    let t = f.hypot(g);
                    let mut cs = f / t;
                    let mut sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] = cs * s[j + 1];
                    {
                        let (cj, cj1) = v.two_cols_mut(j, j + 1);
                        rotate_cols(cj, cj1, cs, sn);
                    }
                    let t = f.hypot(g);
                    cs = f / t;
                    sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] = cs * e[j + 1];
                    if j < m - 1 {
                        let (cj, cj1) = u.two_cols_mut(j, j + 1);
                        rotate_cols(cj, cj1, cs, sn);
                    }
                }
                e[p - 2] = f;
                iter += 1;
                if iter > total_budget {
                    return Err(LinalgError::NoConvergence {
                        routine: "svd",
                        iters: iter,
                    });
                }
            }
            _ => {
                // Converged: fix the sign, then bubble into sorted order.
                let mut k = k;
                if s[k] <= zero {
                    s[k] = if s[k] < zero { -s[k] } else { zero };
                    for x in v.col_mut(k).iter_mut() {
                        *x = -*x;
                    }
                }
                while k < pp {
                    if s[k] >= s[k + 1] {
                        break;
                    }
                    s.swap(k, k + 1);
                    if k < n - 1 {
                        let (ca, cb) = v.two_cols_mut(k, k + 1);
                        ca.swap_with_slice(cb);
                    }
                    if k < m - 1 {
                        let (ca, cb) = u.two_cols_mut(k, k + 1);
                        ca.swap_with_slice(cb);
                    }
                    k += 1;
                }
                iter = 0;
                p -= 1;
            }
        }
    }

    Ok(Svd {
        u: u.into_array(),
        s: Array1::from_vec(s),
        vt: v.into_array().reversed_axes().as_standard_layout().into_owned(),
    })
}
