use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{ExperimentTable, ModelSpec, NIMS_FEATURES};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Noiseless synthetic response: `500 + 100 * sum_k (sin(pi * u_k) + 0.5 * u_k)`
/// over the values `u_k` of the generating spec's features, in spec order.
pub fn synth_response(true_features: &[f64]) -> f64 {
    500.0 + 100.0 * true_features.iter().map(|u| (std::f64::consts::PI * u).sin() + 0.5 * u).sum::<f64>()
}

/// Synthetic table over the 14 fatigue feature columns whose response
/// depends only on `spec_true`'s columns. See [`synth_table_with_columns`].
pub fn synth_table(n: usize, spec_true: &ModelSpec, noise_std: f64, rng_seed: u64) -> Result<ExperimentTable> {
    synth_table_with_columns(&NIMS_FEATURES, n, spec_true, noise_std, rng_seed)
}

/// Features are i.i.d. uniform on `[0, 1)`; the response is
/// [`synth_response`] of `spec_true`'s columns plus `Normal(0, noise_std^2)`
/// noise. Features and noise come from separate streams of `rng_seed`, so
/// changing `noise_std` leaves the features unchanged.
pub fn synth_table_with_columns<S: AsRef<str>>(
    columns: &[S],
    n: usize,
    spec_true: &ModelSpec,
    noise_std: f64,
    rng_seed: u64,
) -> Result<ExperimentTable> {
    if n < 10 {
        return Err(Error::InsufficientRows { needed: 10, got: n });
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise_std {noise_std} must be finite and >= 0")));
    }
    let names: Vec<String> = columns.iter().map(|c| c.as_ref().to_string()).collect();
    let true_cols: Vec<usize> = spec_true
        .features
        .iter()
        .map(|f| names.iter().position(|n| n == f).ok_or_else(|| Error::UnknownFeature(f.clone())))
        .collect::<Result<_>>()?;

    let mut feature_rng = rng_from_seed(derive_seed(rng_seed, 0));
    let mut noise_rng = rng_from_seed(derive_seed(rng_seed, 1));
    let noise = Normal::new(0.0, noise_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut rows = Vec::with_capacity(n);
    let mut responses = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..names.len()).map(|_| feature_rng.random::<f64>()).collect();
        let u: Vec<f64> = true_cols.iter().map(|&c| row[c]).collect();
        let eps = if noise_std > 0.0 { noise.sample(&mut noise_rng) } else { 0.0 };
        responses.push(synth_response(&u) + eps);
        rows.push(row);
    }
    ExperimentTable::new(names, rows, responses)
}
