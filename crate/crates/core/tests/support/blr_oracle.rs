//! Dense normal-equation Bayesian linear regression with nalgebra, used as
//! the reference for the Cholesky-based posterior.

use nalgebra::{DMatrix, DVector};
use oranmec_core::agents::BlrPosterior;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Dataset {
    pub dim: usize,
    pub phi: Vec<f64>,
    pub u: Vec<f64>,
    pub sigma_eps: f64,
    pub prior_sigma: f64,
}

/// Random problem with `d <= 8`, `n <= 64`.
pub fn random_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=8);
    let n = rng.random_range(1..=64);
    let phi = (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let u = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    Dataset { dim, phi, u, sigma_eps: rng.random_range(0.2..2.0), prior_sigma: rng.random_range(0.2..5.0) }
}

/// `(mean, covariance)` by explicit inversion of the precision matrix.
pub fn solve(ds: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = ds.u.len();
    let phi = DMatrix::from_row_slice(n, ds.dim, &ds.phi);
    let u = DVector::from_column_slice(&ds.u);
    let noise = ds.sigma_eps * ds.sigma_eps;
    let precision = phi.transpose() * &phi / noise + DMatrix::identity(ds.dim, ds.dim) / ds.prior_sigma;
    let cov = precision.try_inverse().expect("precision is positive definite");
    let mean = &cov * phi.transpose() * u / noise;
    // row-major to match the crate's layout
    let cov_rows = (0..ds.dim).flat_map(|i| (0..ds.dim).map(move |j| (i, j))).map(|(i, j)| cov[(i, j)]).collect();
    (mean.iter().copied().collect(), cov_rows)
}

/// Largest absolute deviation of mean and covariance from the oracle.
pub fn max_abs_error(ds: &Dataset) -> f64 {
    let post = BlrPosterior::fit(ds.dim, &ds.phi, &ds.u, ds.sigma_eps, ds.prior_sigma).unwrap();
    let (mean, cov) = solve(ds);
    let cov_post = post.covariance();
    post.mean
        .iter()
        .zip(&mean)
        .chain(cov_post.iter().zip(&cov))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
