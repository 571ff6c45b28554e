//! Bayesian model averaging over GP surrogates built on different feature
//! subsets.
//!
//! Each model's evidence is its exact GP log marginal likelihood at the
//! fitted hyperparameters. All models share the training rows and the
//! response standardization, so their evidences are directly comparable.

use nalgebra::{DMatrix, DVector};

use crate::acquisition::{expected_improvement, sort_ranked, Candidate, Incumbent, ScoredCandidate};
use crate::dataset::{fit_scaling, ExperimentTable, ModelSpec, ScalingParams};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::gp::{fit_from, GpFitConfig, GpModel, KernelParams};

/// Posterior model probabilities from log evidences and log priors,
/// normalized with log-sum-exp.
pub fn compute_weights(log_evidences: &[f64], log_priors: &[f64]) -> Result<Vec<f64>> {
    if log_evidences.is_empty() {
        return Err(Error::InvalidArgument("no models to weight".into()));
    }
    if log_evidences.len() != log_priors.len() {
        return Err(Error::DimensionMismatch { expected: log_evidences.len(), got: log_priors.len() });
    }
    if log_evidences.iter().chain(log_priors).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("model weight input"));
    }
    let log_joint: Vec<f64> = log_evidences.iter().zip(log_priors).map(|(e, p)| e + p).collect();
    let max = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = log_joint.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    Ok(shifted.into_iter().map(|v| v / total).collect())
}

/// How the ensemble turns per-model predictions into one acquisition score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AcquisitionVariant {
    /// Posterior-weighted average of each model's EI.
    #[default]
    WeightedEi,
    /// EI of a normal with the mixture's mean and variance.
    MixtureEi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixturePrediction {
    pub mean: f64,
    pub std: f64,
    pub component_means: Vec<f64>,
    pub component_stds: Vec<f64>,
}

/// Mean and standard deviation of a finite mixture with the given component
/// moments. The variance is computed as within-model plus between-model
/// spread, which equals `sum w (s^2 + m^2) - mean^2` and cannot round below
/// the within-model part.
pub fn mixture_moments(weights: &[f64], means: &[f64], stds: &[f64]) -> (f64, f64) {
    let mean: f64 = weights.iter().zip(means).map(|(w, m)| w * m).sum();
    let within: f64 = weights.iter().zip(stds).map(|(w, s)| w * s * s).sum();
    let between: f64 = weights.iter().zip(means).map(|(w, m)| w * (m - mean) * (m - mean)).sum();
    (mean, (within + between).sqrt())
}

/// L fitted GPs with their posterior weights.
#[derive(Debug, Clone)]
pub struct BmaEnsemble {
    specs: Vec<ModelSpec>,
    columns: Vec<Vec<usize>>,
    scalings: Vec<ScalingParams>,
    models: Vec<GpModel>,
    log_evidences: Vec<f64>,
    weights: Vec<f64>,
}

/// Fits one GP per spec on the projected, standardized `training_rows` and
/// weights them by evidence and prior. All fits use the same `rng_seed`.
pub fn fit_ensemble(
    table: &ExperimentTable,
    training_rows: &[usize],
    specs: &[ModelSpec],
    config: &GpFitConfig,
    rng_seed: u64,
    exec: Execution,
) -> Result<BmaEnsemble> {
    fit_ensemble_from(table, training_rows, specs, config, rng_seed, exec, None)
}

/// [`fit_ensemble`] with optional per-spec warm-start hyperparameters.
pub fn fit_ensemble_from(
    table: &ExperimentTable,
    training_rows: &[usize],
    specs: &[ModelSpec],
    config: &GpFitConfig,
    rng_seed: u64,
    exec: Execution,
    warm_start: Option<&[KernelParams]>,
) -> Result<BmaEnsemble> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("ensemble needs at least one model spec".into()));
    }
    if training_rows.len() < 2 {
        return Err(Error::InsufficientRows { needed: 2, got: training_rows.len() });
    }
    if let Some(w) = warm_start {
        if w.len() != specs.len() {
            return Err(Error::DimensionMismatch { expected: specs.len(), got: w.len() });
        }
    }
    let columns = specs.iter().map(|s| table.column_indices(&s.features)).collect::<Result<Vec<_>>>()?;

    let indexed: Vec<usize> = (0..specs.len()).collect();
    let fitted = map_slice(exec, &indexed, |&k| -> Result<(ScalingParams, GpModel)> {
        let projected = table.project(&specs[k])?;
        let scaling = fit_scaling(&projected, training_rows)?;
        let p = projected.n_features();
        let mut x = DMatrix::zeros(training_rows.len(), p);
        for (r, &i) in training_rows.iter().enumerate() {
            let z = scaling.scale_features(projected.row(i))?;
            for (c, v) in z.into_iter().enumerate() {
                x[(r, c)] = v;
            }
        }
        let y = DVector::from_iterator(
            training_rows.len(),
            training_rows.iter().map(|&i| scaling.scale_response(projected.response(i))),
        );
        let model = fit_from(&x, &y, config, rng_seed, warm_start.map(|w| w[k]))?;
        Ok((scaling, model))
    });

    let mut scalings = Vec::with_capacity(specs.len());
    let mut models = Vec::with_capacity(specs.len());
    for (spec, res) in specs.iter().zip(fitted) {
        let (s, m) = res.map_err(|e| Error::Fit { spec: spec.name.clone(), source: Box::new(e) })?;
        scalings.push(s);
        models.push(m);
    }
    let log_evidences: Vec<f64> = models.iter().map(GpModel::log_evidence).collect();
    let log_priors: Vec<f64> = specs.iter().map(|s| s.prior_weight.ln()).collect();
    let weights = compute_weights(&log_evidences, &log_priors)?;
    Ok(BmaEnsemble { specs: specs.to_vec(), columns, scalings, models, log_evidences, weights })
}

impl BmaEnsemble {
    /// Assembles an ensemble from already-fitted parts. `columns[i]` maps
    /// model `i`'s inputs to positions in the full feature rows passed to
    /// the prediction methods.
    pub fn from_parts(
        specs: Vec<ModelSpec>,
        columns: Vec<Vec<usize>>,
        scalings: Vec<ScalingParams>,
        models: Vec<GpModel>,
        weights: Vec<f64>,
    ) -> Result<BmaEnsemble> {
        let l = specs.len();
        if l == 0 || [columns.len(), scalings.len(), models.len(), weights.len()].iter().any(|&n| n != l) {
            return Err(Error::InvalidArgument("ensemble parts have inconsistent lengths".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights {weights:?} are not a distribution")));
        }
        let log_evidences = models.iter().map(GpModel::log_evidence).collect();
        Ok(BmaEnsemble { specs, columns, scalings, models, log_evidences, weights })
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn specs(&self) -> &[ModelSpec] {
        &self.specs
    }

    pub fn models(&self) -> &[GpModel] {
        &self.models
    }

    pub fn scalings(&self) -> &[ScalingParams] {
        &self.scalings
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn log_evidences(&self) -> &[f64] {
        &self.log_evidences
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Shared response standardization.
    pub fn response_scaling(&self) -> &ScalingParams {
        &self.scalings[0]
    }

    fn project(&self, k: usize, x_full: &[f64]) -> Result<Vec<f64>> {
        let cols = &self.columns[k];
        match cols.iter().find(|&&c| c >= x_full.len()) {
            Some(_) => {
                Err(Error::DimensionMismatch { expected: cols.iter().max().map_or(0, |m| m + 1), got: x_full.len() })
            }
            None => Ok(cols.iter().map(|&c| x_full[c]).collect()),
        }
    }

    /// Conditions every model on one more observation `(x_full, y)` at fixed
    /// hyperparameters and scaling. Weights are kept as they are.
    pub fn with_fantasy(&self, x_full: &[f64], y: f64) -> Result<BmaEnsemble> {
        let models = (0..self.len())
            .map(|k| {
                let s = &self.scalings[k];
                let z = s.scale_features(&self.project(k, x_full)?)?;
                self.models[k].with_observation(&z, s.scale_response(y))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BmaEnsemble {
            specs: self.specs.clone(),
            columns: self.columns.clone(),
            scalings: self.scalings.clone(),
            log_evidences: models.iter().map(GpModel::log_evidence).collect(),
            models,
            weights: self.weights.clone(),
        })
    }

    /// Per-model latent `(mean, std)` in standardized response units.
    pub fn component_standardized(&self, x_full: &[f64]) -> Result<Vec<(f64, f64)>> {
        (0..self.len())
            .map(|k| {
                let z = self.scalings[k].scale_features(&self.project(k, x_full)?)?;
                self.models[k].predict_standardized(&z)
            })
            .collect()
    }

    /// Model-averaged predictive moments in response units.
    pub fn mixture_predict(&self, x_full: &[f64]) -> Result<MixturePrediction> {
        let parts = self.component_standardized(x_full)?;
        let s = self.response_scaling();
        let component_means: Vec<f64> = parts.iter().map(|(m, _)| s.unscale_response(*m)).collect();
        let component_stds: Vec<f64> = parts.iter().map(|(_, sd)| s.unscale_std(*sd)).collect();
        let (mean, std) = mixture_moments(&self.weights, &component_means, &component_stds);
        Ok(MixturePrediction { mean, std, component_means, component_stds })
    }

    /// `sum_i w_i * EI_i(x)` in standardized response units.
    pub fn averaged_ei(&self, x_full: &[f64], incumbent: &Incumbent) -> Result<f64> {
        let best = self.response_scaling().scale_response(incumbent.value);
        let parts = self.component_standardized(x_full)?;
        let mut total = 0.0;
        for (w, (m, s)) in self.weights.iter().zip(parts) {
            total += w * expected_improvement(m, s, best)?;
        }
        Ok(total)
    }

    /// EI of the moment-matched mixture, standardized units.
    pub fn mixture_ei(&self, x_full: &[f64], incumbent: &Incumbent) -> Result<f64> {
        let best = self.response_scaling().scale_response(incumbent.value);
        let parts = self.component_standardized(x_full)?;
        let (means, stds): (Vec<f64>, Vec<f64>) = parts.into_iter().unzip();
        let (m, s) = mixture_moments(&self.weights, &means, &stds);
        expected_improvement(m, s, best)
    }

    /// Scores full-feature candidate rows with the chosen variant and ranks
    /// them by descending score, then ascending index. Reported mean and std
    /// are the mixture moments in response units.
    pub fn rank_pool(
        &self,
        pool: &[Candidate<'_>],
        incumbent: &Incumbent,
        variant: AcquisitionVariant,
        exec: Execution,
    ) -> Result<Vec<ScoredCandidate>> {
        if pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        let scored = map_slice(exec, pool, |c| -> Result<ScoredCandidate> {
            let ei = match variant {
                AcquisitionVariant::WeightedEi => self.averaged_ei(c.features, incumbent)?,
                AcquisitionVariant::MixtureEi => self.mixture_ei(c.features, incumbent)?,
            };
            let mix = self.mixture_predict(c.features)?;
            Ok(ScoredCandidate { pool_index: c.index, ei, predicted_mean: mix.mean, predicted_std: mix.std })
        });
        let mut ranked = scored.into_iter().collect::<Result<Vec<_>>>()?;
        sort_ranked(&mut ranked);
        Ok(ranked)
    }
}
