//! Symmetric tridiagonal eigensolver: implicit QL with Wilkinson shifts.
//!
//! Follows the classic `tql2` scheme (Bowdler, Martin, Reinsch, Wilkinson):
//! the matrix is deflated whenever an off-diagonal element falls below
//! `tol · (|d_m| + |d_{m+1}|)`, and plane rotations are accumulated into the
//! eigenvector matrix when requested.

use crate::error::{Error, Result};

/// Iterations allowed per eigenvalue before giving up.
const MAX_SWEEPS: usize = 60;

/// Eigenvalues in ascending order and, optionally, eigenvectors stored
/// column-major (`vectors[k + n * i]` is component `k` of vector `i`).
pub(crate) struct Decomposition {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

pub(crate) fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64], tol: f64, want_vectors: bool) -> Result<Decomposition> {
    let n = diag.len();
    debug_assert!(n == 0 || offdiag.len() + 1 == n);
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..offdiag.len().min(n)].copy_from_slice(&offdiag[..offdiag.len().min(n)]);
    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i + n * i] = 1.0;
        }
        Some(z)
    } else {
        None
    };

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= tol * dd || e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l, iterations: sweeps - 1 });
            }

            // Wilkinson shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;

            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    let (left, right) = z.split_at_mut(n * (i + 1));
                    let col_i = &mut left[n * i..];
                    let col_next = &mut right[..n];
                    for (zi, zn) in col_i.iter_mut().zip(col_next.iter_mut()) {
                        let f = *zn;
                        *zn = s * *zi + c * f;
                        *zi = c * *zi - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // Sort ascending, carrying vectors along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| {
        let mut sorted = Vec::with_capacity(n * n);
        for &i in &order {
            let col = &z[n * i..n * (i + 1)];
            let sign = sign_of_first_nonzero(col);
            sorted.extend(col.iter().map(|x| sign * x));
        }
        sorted
    });
    Ok(Decomposition { values, vectors })
}

/// `+1` or `-1` so that the first component above the noise floor
/// (`ε · max|c|`) is positive.
pub(crate) fn sign_of_first_nonzero(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let floor = f64::EPSILON * scale;
    match v.iter().find(|x| x.abs() > floor) {
        Some(x) if *x < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Eigenvector of the symmetric tridiagonal matrix for the isolated
/// eigenvalue `lambda` by shifted inverse iteration (LDLᵀ solve, no pivoting
/// needed when the shift lies below the spectrum).
pub(crate) fn inverse_iteration(diag: &[f64], offdiag: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let scale = diag.iter().map(|x| x.abs()).chain(offdiag.iter().map(|x| x.abs())).fold(1.0f64, f64::max);
    let shift = lambda - 1e-10 * scale;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut piv = vec![0.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..4 {
        // Forward elimination of (T - shift) y = x.
        piv[0] = diag[0] - shift;
        y[0] = x[0];
        for i in 1..n {
            let w = offdiag[i - 1] / nonzero(piv[i - 1]);
            piv[i] = diag[i] - shift - w * offdiag[i - 1];
            y[i] = x[i] - w * y[i - 1];
        }
        x[n - 1] = y[n - 1] / nonzero(piv[n - 1]);
        for i in (0..n - 1).rev() {
            x[i] = (y[i] - offdiag[i] * x[i + 1]) / nonzero(piv[i]);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    // Components below the rounding floor carry no information; flushing
    // them makes decoupled blocks come out as exact unit vectors.
    let floor = f64::EPSILON * x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let sign = sign_of_first_nonzero(&x);
    x.iter_mut().for_each(|v| *v = if v.abs() < floor { 0.0 } else { *v * sign });
    x
}

fn nonzero(p: f64) -> f64 {
    if p == 0.0 {
        f64::MIN_POSITIVE
    } else {
        p
    }
}
