//! Small dense symmetric positive-definite routines on row-major `n x n`
//! slices, enough for the per-sub-action posterior updates.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Lower Cholesky factor `L` with `A = L L^T`.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for p in 0..j {
                sum -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Cholesky with escalating diagonal jitter (starting at `jitter`, ten
/// tries, x10 each). Returns the factor and the jitter actually added.
pub fn cholesky_jittered(a: &[f64], n: usize, jitter: f64) -> Result<(Vec<f64>, f64)> {
    if let Ok(l) = cholesky(a, n) {
        return Ok((l, 0.0));
    }
    let mut eps = jitter;
    let mut work = a.to_vec();
    for _ in 0..10 {
        for i in 0..n {
            work[i * n + i] = a[i * n + i] + eps;
        }
        if let Ok(l) = cholesky(&work, n) {
            return Ok((l, eps));
        }
        eps *= 10.0;
    }
    Err(Error::NotPositiveDefinite)
}

/// Solves `L y = b` in place.
pub fn forward_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * n + p] * b[p];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `L^T x = b` in place.
pub fn backward_substitute_transposed(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for p in i + 1..n {
            s -= l[p * n + i] * b[p];
        }
        b[i] = s / l[i * n + i];
    }
}

/// `A^{-1} b` given the Cholesky factor of `A`.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    forward_substitute(l, n, &mut x);
    backward_substitute_transposed(l, n, &mut x);
    x
}

/// `A^{-1}` given the Cholesky factor of `A`, symmetrized.
pub fn cholesky_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        forward_substitute(l, n, &mut e);
        backward_substitute_transposed(l, n, &mut e);
        for i in 0..n {
            inv[i * n + j] = e[i];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (inv[i * n + j] + inv[j * n + i]);
            inv[i * n + j] = avg;
            inv[j * n + i] = avg;
        }
    }
    inv
}

/// `y = L x` for lower-triangular `L`.
pub fn lower_mul(l: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..=i).map(|p| l[i * n + p] * x[p]).sum()).collect()
}
