//! RMSE and repeated-run summaries.
//!
//! Spread is the sample standard deviation (n - 1 denominator). Quartiles
//! interpolate linearly between order statistics: the `p`-quantile of sorted
//! values `v` is `v[h] + (h - floor(h)) * (v[floor(h) + 1] - v[floor(h)])`
//! with `h = (n - 1) p`.

use serde::{Deserialize, Serialize};

use crate::engine::CampaignResult;
use crate::error::{Error, Result};

pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("RMSE of an empty set".into()));
    }
    if y_true.iter().chain(y_pred).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("RMSE input"));
    }
    let ss: f64 = y_true.iter().zip(y_pred).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / y_true.len() as f64).sqrt())
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of already sorted values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Result<Quartiles> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("quartiles of an empty set".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(Quartiles {
            min: v[0],
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub per_run_rmse: Vec<f64>,
    pub mean_rmse: f64,
    /// Zero when only one run is available; see `std_defined`.
    pub std_rmse: f64,
    pub std_defined: bool,
    pub quartiles: Quartiles,
    /// BMA only: final weights averaged over runs.
    pub mean_weights: Option<Vec<f64>>,
}

/// Mean and sample standard deviation; the latter is `None` for one value.
pub fn mean_and_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, Some((ss / (n - 1.0)).sqrt()))
}

/// Summary of per-run RMSE values, with optional per-run final weights.
pub fn summarize_values(per_run_rmse: &[f64], final_weights: Option<&[Vec<f64>]>) -> Result<RunSummary> {
    if per_run_rmse.is_empty() {
        return Err(Error::InvalidArgument("no runs to summarize".into()));
    }
    if per_run_rmse.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("per-run RMSE"));
    }
    let (mean_rmse, std) = mean_and_std(per_run_rmse);
    let mean_weights = match final_weights {
        None => None,
        Some(ws) => {
            let l = ws.first().map_or(0, Vec::len);
            if ws.len() != per_run_rmse.len() || ws.iter().any(|w| w.len() != l) {
                return Err(Error::InvalidArgument("inconsistent final weights".into()));
            }
            Some((0..l).map(|k| ws.iter().map(|w| w[k]).sum::<f64>() / ws.len() as f64).collect())
        }
    };
    Ok(RunSummary {
        per_run_rmse: per_run_rmse.to_vec(),
        mean_rmse,
        std_rmse: std.unwrap_or(0.0),
        std_defined: std.is_some(),
        quartiles: Quartiles::of(per_run_rmse)?,
        mean_weights,
    })
}

pub fn summarize(results: &[CampaignResult]) -> Result<RunSummary> {
    let rmse: Vec<f64> = results.iter().map(|r| r.test_rmse).collect();
    let weights: Option<Vec<Vec<f64>>> = results.iter().map(|r| r.final_weights.clone()).collect();
    summarize_values(&rmse, weights.as_deref())
}
