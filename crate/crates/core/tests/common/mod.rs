//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn se_cov(a: &[f64], b: &[f64], lengthscale: f64, signal_variance: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    signal_variance * (-d2 / (2.0 * lengthscale * lengthscale)).exp()
}

pub struct DenseGp {
    pub mean: f64,
    pub var: f64,
}

fn row(x: &DMatrix<f64>, i: usize) -> Vec<f64> {
    x.row(i).iter().copied().collect()
}

/// `K + diag` built entry by entry.
pub fn dense_cov(x: &DMatrix<f64>, lengthscale: f64, signal_variance: f64, diag: f64) -> DMatrix<f64> {
    let m = x.nrows();
    DMatrix::from_fn(m, m, |i, j| {
        se_cov(&row(x, i), &row(x, j), lengthscale, signal_variance) + if i == j { diag } else { 0.0 }
    })
}

/// Textbook posterior via an explicit (LU) inverse.
pub fn dense_posterior(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lengthscale: f64,
    signal_variance: f64,
    diag: f64,
    x_star: &[f64],
) -> DenseGp {
    let inv = dense_cov(x, lengthscale, signal_variance, diag).try_inverse().expect("invertible");
    let k = DVector::from_fn(x.nrows(), |i, _| se_cov(&row(x, i), x_star, lengthscale, signal_variance));
    DenseGp { mean: (k.transpose() * &inv * y)[0], var: signal_variance - (k.transpose() * &inv * &k)[0] }
}

/// Log evidence from an explicit inverse and an LU determinant.
pub fn dense_log_evidence(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lengthscale: f64,
    signal_variance: f64,
    diag: f64,
) -> f64 {
    let c = dense_cov(x, lengthscale, signal_variance, diag);
    let det = c.clone().lu().determinant();
    let inv = c.try_inverse().expect("invertible");
    let m = y.len() as f64;
    -0.5 * (y.transpose() * inv * y)[0] - 0.5 * det.ln() - 0.5 * m * (2.0 * std::f64::consts::PI).ln()
}

/// Monte-Carlo `E[max(Z - best, 0)]`, `Z ~ N(mean, std^2)`: `(estimate, standard error)`.
pub fn mc_expected_improvement(mean: f64, std: f64, best: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let z: f64 = r.sample(StandardNormal);
        let imp = (mean + std * z - best).max(0.0);
        s += imp;
        s2 += imp * imp;
    }
    let nf = n as f64;
    let est = s / nf;
    let var = (s2 / nf - est * est) * nf / (nf - 1.0);
    (est, (var / nf).sqrt())
}

/// Composite Simpson integral of the standard normal density on `[0, z]`, plus 1/2.
pub fn simpson_normal_cdf(z: f64, intervals: usize) -> f64 {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let n = intervals + intervals % 2;
    let h = z / n as f64;
    let mut acc = pdf(0.0) + pdf(z);
    for i in 1..n {
        acc += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + acc * h / 3.0
}

pub fn random_matrix(r: &mut ChaCha8Rng, m: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, p, |_, _| r.sample::<f64, _>(StandardNormal))
}

pub fn random_vector(r: &mut ChaCha8Rng, m: usize) -> DVector<f64> {
    DVector::from_fn(m, |_, _| r.sample::<f64, _>(StandardNormal))
}
