use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Isotropic squared-exponential kernel hyperparameters, in standardized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelParams {
    pub fn new(lengthscale: f64, signal_variance: f64, noise_variance: f64) -> Result<Self> {
        let p = KernelParams { lengthscale, signal_variance, noise_variance };
        p.check()?;
        Ok(p)
    }

    pub(crate) fn check(&self) -> Result<()> {
        let ok = self.lengthscale > 0.0
            && self.signal_variance > 0.0
            && self.noise_variance >= 0.0
            && self.lengthscale.is_finite()
            && self.signal_variance.is_finite()
            && self.noise_variance.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid kernel parameters {self:?}")))
        }
    }

    /// `(ln lengthscale, ln signal_variance, ln noise_variance)`.
    pub fn to_log(&self) -> [f64; 3] {
        [self.lengthscale.ln(), self.signal_variance.ln(), self.noise_variance.ln()]
    }

    pub fn from_log(v: &[f64]) -> Self {
        KernelParams { lengthscale: v[0].exp(), signal_variance: v[1].exp(), noise_variance: v[2].exp() }
    }

    /// Covariance at squared distance `d2`.
    #[inline]
    pub fn cov_sq(&self, d2: f64) -> f64 {
        self.signal_variance * (-0.5 * d2 / (self.lengthscale * self.lengthscale)).exp()
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `signal_variance * exp(-|x1 - x2|^2 / (2 * lengthscale^2))`.
pub fn kernel(x1: &[f64], x2: &[f64], params: &KernelParams) -> Result<f64> {
    if x1.len() != x2.len() {
        return Err(Error::DimensionMismatch { expected: x1.len(), got: x2.len() });
    }
    Ok(params.cov_sq(sq_dist(x1, x2)))
}

/// Pairwise squared distances between the rows of `x`.
pub(crate) fn sq_dist_matrix(x: &DMatrix<f64>) -> DMatrix<f64> {
    let m = x.nrows();
    let rows: Vec<Vec<f64>> = (0..m).map(|i| x.row(i).iter().copied().collect()).collect();
    let mut d = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..i {
            let v = sq_dist(&rows[i], &rows[j]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}
