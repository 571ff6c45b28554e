//! Exact Gaussian-process regression with a zero mean on standardized data.
//!
//! The posterior is computed through the Cholesky factor `L` of
//! `K + (noise + jitter) I`:
//!
//! - `alpha = L^-T L^-1 y`
//! - `mean(x*) = k*^T alpha`
//! - `var(x*) = k(x*, x*) - |L^-1 k*|^2`
//! - `log p(y) = -y^T alpha / 2 - sum(ln L_ii) - m ln(2 pi) / 2`

mod kernel;
mod optimize;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use crate::dataset::ScalingParams;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use kernel::{kernel, KernelParams};
use kernel::{sq_dist, sq_dist_matrix};
use optimize::{minimize, NelderMeadOptions};

/// First diagonal jitter tried.
pub const JITTER_START: f64 = 1e-10;
/// Largest jitter tried before giving up.
pub const JITTER_MAX: f64 = 1e-4;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Hyperparameter search settings. Bounds are on the natural scale and the
/// search runs in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct GpFitConfig {
    pub n_restarts: usize,
    pub max_evals: usize,
    pub lengthscale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    pub noise_variance_bounds: (f64, f64),
}

impl Default for GpFitConfig {
    fn default() -> Self {
        GpFitConfig {
            n_restarts: 5,
            max_evals: 400,
            lengthscale_bounds: (1e-2, 1e2),
            signal_variance_bounds: (1e-2, 1e2),
            noise_variance_bounds: (1e-6, 1e1),
        }
    }
}

impl GpFitConfig {
    /// `(lower, upper)` in log space, ordered as [`KernelParams::to_log`].
    pub fn log_bounds(&self) -> ([f64; 3], [f64; 3]) {
        let b = [self.lengthscale_bounds, self.signal_variance_bounds, self.noise_variance_bounds];
        (b.map(|(lo, _)| lo.ln()), b.map(|(_, hi)| hi.ln()))
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.log_bounds();
        if self.n_restarts == 0 || lo.iter().zip(&hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
            return Err(Error::InvalidArgument(format!("invalid GP fit config {self:?}")));
        }
        Ok(())
    }

    /// Parameter vector drawn log-uniformly from the search box.
    pub fn sample_params<R: Rng>(&self, rng: &mut R) -> KernelParams {
        let (lo, hi) = self.log_bounds();
        let v: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
        KernelParams::from_log(&v)
    }
}

/// A GP conditioned on standardized training data at fixed hyperparameters.
#[derive(Debug, Clone)]
pub struct GpModel {
    x: DMatrix<f64>,
    y: DVector<f64>,
    params: KernelParams,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    log_evidence: f64,
    jitter: f64,
}

/// Posterior predictive in original response units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

fn check_training(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.nrows(), got: y.len() });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("GP training data"));
    }
    Ok(())
}

/// Factorizes `cov + (noise + jitter) I`, escalating the jitter tenfold from
/// [`JITTER_START`] up to [`JITTER_MAX`].
fn factorize(cov: &DMatrix<f64>, noise: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = JITTER_START;
    loop {
        let mut a = cov.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += noise + jitter;
        }
        if let Some(chol) = Cholesky::new(a) {
            return Ok((chol, jitter));
        }
        if jitter >= JITTER_MAX {
            return Err(Error::Numerical(format!(
                "covariance of order {} not positive definite with jitter {jitter:e} (noise {noise:e})",
                cov.nrows()
            )));
        }
        jitter *= 10.0;
    }
}

fn covariance_from_sq_dist(d2: &DMatrix<f64>, params: &KernelParams) -> DMatrix<f64> {
    d2.map(|d| params.cov_sq(d))
}

/// `(log evidence, cholesky, alpha, jitter)`.
type EvidenceParts = (f64, Cholesky<f64, Dyn>, DVector<f64>, f64);

fn evidence_parts(d2: &DMatrix<f64>, y: &DVector<f64>, params: &KernelParams) -> Result<EvidenceParts> {
    let cov = covariance_from_sq_dist(d2, params);
    let (chol, jitter) = factorize(&cov, params.noise_variance)?;
    let alpha = chol.solve(y);
    let half_log_det: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    let m = y.len() as f64;
    let lml = -0.5 * y.dot(&alpha) - half_log_det - 0.5 * m * LN_2PI;
    if !lml.is_finite() {
        return Err(Error::Numerical(format!("non-finite log evidence at {params:?}")));
    }
    Ok((lml, chol, alpha, jitter))
}

/// Exact GP log marginal likelihood of `y` given inputs `x` and `params`.
pub fn log_marginal_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, params: &KernelParams) -> Result<f64> {
    params.check()?;
    check_training(x, y)?;
    evidence_parts(&sq_dist_matrix(x), y, params).map(|(lml, ..)| lml)
}

/// Fits hyperparameters by maximizing the log marginal likelihood: one
/// Nelder-Mead run per restart, the first started from `(1, 1, 1e-2)` (or
/// `warm_start` when given) and the rest from log-uniform draws seeded by
/// `rng_seed`. The best restart wins; ties go to the earliest.
pub fn fit(x: &DMatrix<f64>, y: &DVector<f64>, config: &GpFitConfig, rng_seed: u64) -> Result<GpModel> {
    fit_from(x, y, config, rng_seed, None)
}

pub fn fit_from(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    config: &GpFitConfig,
    rng_seed: u64,
    warm_start: Option<KernelParams>,
) -> Result<GpModel> {
    config.validate()?;
    check_training(x, y)?;
    if x.nrows() < 2 {
        return Err(Error::InsufficientRows { needed: 2, got: x.nrows() });
    }
    let d2 = sq_dist_matrix(x);
    let (lower, upper) = config.log_bounds();
    let opts = NelderMeadOptions { max_evals: config.max_evals, ftol: 1e-10, xtol: 1e-6, initial_step: 0.5 };

    let mut rng = rng_from_seed(rng_seed);
    let first = warm_start.unwrap_or(KernelParams { lengthscale: 1.0, signal_variance: 1.0, noise_variance: 1e-2 });
    let starts: Vec<[f64; 3]> = std::iter::once(first.to_log())
        .chain((1..config.n_restarts).map(|_| config.sample_params(&mut rng).to_log()))
        .collect();

    let objective = |v: &[f64]| match evidence_parts(&d2, y, &KernelParams::from_log(v)) {
        Ok((lml, ..)) => -lml,
        Err(_) => f64::INFINITY,
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in &starts {
        let m = minimize(objective, start, &lower, &upper, &opts);
        if m.value.is_finite() && best.as_ref().is_none_or(|(v, _)| m.value < *v) {
            best = Some((m.value, m.x));
        }
    }
    let (_, v) = best
        .ok_or_else(|| Error::Numerical(format!("no restart produced a finite log evidence ({} rows)", x.nrows())))?;
    let params = KernelParams::from_log(&v);
    let (log_evidence, chol, alpha, jitter) = evidence_parts(&d2, y, &params)?;
    Ok(GpModel { x: x.clone(), y: y.clone(), params, chol, alpha, log_evidence, jitter })
}

impl GpModel {
    /// Conditions on `(x, y)` at fixed `params` without any fitting.
    pub fn condition(x: DMatrix<f64>, y: DVector<f64>, params: KernelParams) -> Result<GpModel> {
        params.check()?;
        check_training(&x, &y)?;
        let (log_evidence, chol, alpha, jitter) = evidence_parts(&sq_dist_matrix(&x), &y, &params)?;
        Ok(GpModel { x, y, params, chol, alpha, log_evidence, jitter })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    pub fn n_train(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn train_inputs(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn train_targets(&self) -> &DVector<f64> {
        &self.y
    }

    /// Diagonal jitter that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Lower Cholesky factor of `K + (noise + jitter) I`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    fn cross_cov(&self, z: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.x.nrows(),
            (0..self.x.nrows()).map(|i| {
                let row = self.x.row(i);
                let d2: f64 = row.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                self.params.cov_sq(d2)
            }),
        )
    }

    /// Latent posterior mean and standard deviation at a standardized input.
    pub fn predict_standardized(&self, z: &[f64]) -> Result<(f64, f64)> {
        if z.len() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: z.len() });
        }
        let k_star = self.cross_cov(z);
        let mean = k_star.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&k_star)
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        let prior = self.params.cov_sq(sq_dist(z, z));
        let var = (prior - v.norm_squared()).max(0.0);
        Ok((mean, var.sqrt()))
    }

    /// Standardizes `x_star` with `scaling`, predicts, and maps the result
    /// back to response units.
    pub fn predict(&self, x_star: &[f64], scaling: &ScalingParams) -> Result<Prediction> {
        let z = scaling.scale_features(x_star)?;
        let (mean, std) = self.predict_standardized(&z)?;
        Ok(Prediction { mean: scaling.unscale_response(mean), std: scaling.unscale_std(std) })
    }

    /// Same hyperparameters, one more (standardized) observation.
    pub fn with_observation(&self, z: &[f64], y: f64) -> Result<GpModel> {
        if z.len() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: z.len() });
        }
        let m = self.x.nrows();
        let x = self.x.clone().insert_row(m, 0.0);
        let mut x = x;
        for (j, v) in z.iter().enumerate() {
            x[(m, j)] = *v;
        }
        let y = self.y.clone().push(y);
        GpModel::condition(x, y, self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_problem(seed: u64, m: usize, p: usize) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = rng_from_seed(seed);
        let x = DMatrix::from_fn(m, p, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y = DVector::from_fn(m, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        (x, y)
    }

    #[test]
    fn one_point_evidence() {
        let x = DMatrix::from_element(1, 1, 0.0);
        let y = DVector::from_element(1, 0.0);
        // K + noise = 1 (up to jitter)
        let p = KernelParams::new(1.0, 1.0 - JITTER_START, 0.0).unwrap();
        let lml = log_marginal_likelihood(&x, &y, &p).unwrap();
        assert!((lml + 0.918_938_533_204_672_8).abs() < 1e-12, "{lml}");
    }

    #[test]
    fn constant_zero_response() {
        let (x, _) = random_problem(1, 8, 3);
        let y = DVector::zeros(8);
        let gp = fit(&x, &y, &GpFitConfig::default(), 0).unwrap();
        assert!(gp.log_evidence().is_finite());
        for probe in [[0.0, 0.0, 0.0], [0.5, -0.3, 2.0]] {
            let (mean, _) = gp.predict_standardized(&probe).unwrap();
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y) = random_problem(2, 10, 4);
        let a = fit(&x, &y, &GpFitConfig::default(), 77).unwrap();
        let b = fit(&x, &y, &GpFitConfig::default(), 77).unwrap();
        assert_eq!(a.params().to_log().map(f64::to_bits), b.params().to_log().map(f64::to_bits));
        assert_eq!(a.log_evidence().to_bits(), b.log_evidence().to_bits());
    }

    #[test]
    fn fit_stays_in_bounds() {
        let (x, y) = random_problem(3, 12, 2);
        let cfg = GpFitConfig::default();
        let p = *fit(&x, &y, &cfg, 5).unwrap().params();
        assert!((cfg.lengthscale_bounds.0..=cfg.lengthscale_bounds.1).contains(&p.lengthscale));
        assert!((cfg.signal_variance_bounds.0..=cfg.signal_variance_bounds.1).contains(&p.signal_variance));
        assert!((cfg.noise_variance_bounds.0..=cfg.noise_variance_bounds.1).contains(&p.noise_variance));
    }

    #[test]
    fn fit_needs_two_rows() {
        let x = DMatrix::from_element(1, 2, 0.0);
        let y = DVector::from_element(1, 0.0);
        assert!(matches!(fit(&x, &y, &GpFitConfig::default(), 0), Err(Error::InsufficientRows { .. })));
    }

    #[test]
    fn interpolates_training_points() {
        let (x, y) = random_problem(4, 6, 2);
        let gp = GpModel::condition(x.clone(), y.clone(), KernelParams::new(0.7, 1.0, 0.0).unwrap()).unwrap();
        for i in 0..6 {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            let (mean, std) = gp.predict_standardized(&row).unwrap();
            assert!((mean - y[i]).abs() < 1e-5, "{mean} vs {}", y[i]);
            assert!(std < 2e-3, "{std}");
        }
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let (x, y) = random_problem(5, 6, 2);
        let gp = GpModel::condition(x, y, KernelParams::new(0.5, 2.0, 1e-3).unwrap()).unwrap();
        let (mean, std) = gp.predict_standardized(&[100.0, -100.0]).unwrap();
        assert!(mean.abs() < 1e-12);
        assert!((std - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn predict_applies_scaling() {
        let (x, y) = random_problem(6, 5, 1);
        let gp = GpModel::condition(x, y, KernelParams::new(0.5, 1.0, 1e-2).unwrap()).unwrap();
        let s = ScalingParams {
            feature_mean: vec![10.0],
            feature_std: vec![2.0],
            response_mean: 500.0,
            response_std: 100.0,
        };
        let (zm, zs) = gp.predict_standardized(&[0.25]).unwrap();
        let p = gp.predict(&[10.5], &s).unwrap();
        assert!((p.mean - (500.0 + 100.0 * zm)).abs() < 1e-9);
        assert!((p.std - 100.0 * zs).abs() < 1e-9);
        assert!(matches!(gp.predict(&[1.0, 2.0], &s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn jitter_rescues_duplicate_rows() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 0.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let gp = GpModel::condition(x, y, KernelParams::new(1.0, 1.0, 0.0).unwrap()).unwrap();
        assert!(gp.jitter() >= JITTER_START);
        assert!(gp.log_evidence().is_finite());
    }

    #[test]
    fn cholesky_reconstructs_covariance() {
        let (x, y) = random_problem(7, 15, 5);
        let gp = fit(&x, &y, &GpFitConfig::default(), 1).unwrap();
        let l = gp.cholesky_factor();
        let p = gp.params();
        let mut k = DMatrix::from_fn(15, 15, |i, j| {
            let a: Vec<f64> = x.row(i).iter().copied().collect();
            let b: Vec<f64> = x.row(j).iter().copied().collect();
            kernel(&a, &b, p).unwrap()
        });
        for i in 0..15 {
            k[(i, i)] += p.noise_variance + gp.jitter();
        }
        let rel = (&l * l.transpose() - &k).norm() / k.norm();
        assert!(rel < 1e-8, "{rel}");
    }

    #[test]
    fn with_observation_matches_condition() {
        let (x, y) = random_problem(8, 5, 2);
        let params = KernelParams::new(0.8, 1.5, 1e-2).unwrap();
        let gp = GpModel::condition(x.clone(), y.clone(), params).unwrap();
        let grown = gp.with_observation(&[0.1, 0.2], 0.3).unwrap();
        let x2 = x.insert_row(5, 0.0);
        let mut x2 = x2;
        x2[(5, 0)] = 0.1;
        x2[(5, 1)] = 0.2;
        let direct = GpModel::condition(x2, y.push(0.3), params).unwrap();
        assert_eq!(grown.log_evidence(), direct.log_evidence());
    }
}
