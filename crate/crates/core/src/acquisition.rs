//! Expected Improvement and greedy batch selection over a finite pool.
//!
//! The loop maximizes the response, so the incumbent is the largest observed
//! value. EI is evaluated in standardized response units.

use std::cmp::Ordering;

use crate::dataset::{ExperimentTable, ScalingParams};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::gp::GpModel;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF, `erfc(-z / sqrt(2)) / 2`.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// `phi(t) - t * (1 - Phi(t))`, the EI of a unit normal with improvement
/// `-t`. Non-negative for all `t`.
fn unit_ei_tail(t: f64) -> f64 {
    let upper_tail = 0.5 * libm::erfc(t * std::f64::consts::FRAC_1_SQRT_2);
    (std_normal_pdf(t) - t * upper_tail).max(0.0)
}

/// `E[max(Y - incumbent, 0)]` for `Y ~ Normal(mean, std^2)`; with zero
/// `std` this is `max(mean - incumbent, 0)`.
///
/// Evaluated as `max(delta, 0) + std * g(|delta| / std)` with
/// `g(t) = phi(t) - t (1 - Phi(t))`, which equals
/// `delta Phi(delta/std) + std phi(delta/std)` and never rounds below the
/// zero-variance value.
pub fn expected_improvement(mean: f64, std: f64, incumbent_value: f64) -> Result<f64> {
    if !(mean.is_finite() && std.is_finite() && incumbent_value.is_finite()) {
        return Err(Error::NonFinite("expected improvement input"));
    }
    if std < 0.0 {
        return Err(Error::InvalidArgument(format!("negative predictive std {std}")));
    }
    let delta = mean - incumbent_value;
    if std == 0.0 {
        return Ok(delta.max(0.0));
    }
    Ok(delta.max(0.0) + std * unit_ei_tail(delta.abs() / std))
}

/// Best observed experiment so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incumbent {
    pub value: f64,
    pub index: usize,
}

impl Incumbent {
    /// Maximum response over `observed`; ties go to the lowest row index.
    pub fn from_observed(table: &ExperimentTable, observed: &[usize]) -> Option<Incumbent> {
        observed.iter().map(|&i| Incumbent { value: table.response(i), index: i }).reduce(|best, c| {
            match c.value.total_cmp(&best.value) {
                Ordering::Greater => c,
                Ordering::Equal if c.index < best.index => c,
                _ => best,
            }
        })
    }
}

/// A pool row to be scored, with features already in model column order.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub index: usize,
    pub features: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub pool_index: usize,
    /// Standardized response units.
    pub ei: f64,
    /// Original response units.
    pub predicted_mean: f64,
    /// Original response units.
    pub predicted_std: f64,
}

/// Descending EI, then ascending pool index.
pub fn sort_ranked(ranked: &mut [ScoredCandidate]) {
    ranked.sort_by(|a, b| b.ei.total_cmp(&a.ei).then(a.pool_index.cmp(&b.pool_index)));
}

/// Scores every candidate by EI against `incumbent` and returns them ranked.
pub fn rank_pool(
    model: &GpModel,
    pool: &[Candidate<'_>],
    incumbent: &Incumbent,
    scaling: &ScalingParams,
    exec: Execution,
) -> Result<Vec<ScoredCandidate>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let best = scaling.scale_response(incumbent.value);
    let scored = map_slice(exec, pool, |c| -> Result<ScoredCandidate> {
        let z = scaling.scale_features(c.features)?;
        let (mean, std) = model.predict_standardized(&z)?;
        Ok(ScoredCandidate {
            pool_index: c.index,
            ei: expected_improvement(mean, std, best)?,
            predicted_mean: scaling.unscale_response(mean),
            predicted_std: scaling.unscale_std(std),
        })
    });
    let mut ranked = scored.into_iter().collect::<Result<Vec<_>>>()?;
    sort_ranked(&mut ranked);
    Ok(ranked)
}

/// Greedy top-`q`: the first `min(q, ranked.len())` pool indices.
pub fn select_batch(ranked: &[ScoredCandidate], q: usize) -> Result<Vec<usize>> {
    if q == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    Ok(ranked.iter().take(q).map(|c| c.pool_index).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::KernelParams;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn normal_reference_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert!((std_normal_cdf(-1.0) + std_normal_cdf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ei_closed_forms() {
        let ei = expected_improvement(2.0, 1.0, 2.0).unwrap();
        assert!((ei - 0.398_942).abs() < 1e-6);
        assert_eq!(expected_improvement(-3.0, 0.0, 2.0).unwrap(), 0.0);
        assert_eq!(expected_improvement(2.5, 0.0, 2.0).unwrap(), 0.5);
        assert!(expected_improvement(f64::NAN, 1.0, 0.0).is_err());
        assert!(expected_improvement(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn ei_monotone_on_grid() {
        for &inc in &[-1.0, 0.0, 2.0] {
            for si in 0..20 {
                let std = si as f64 * 0.25;
                let mut prev = 0.0;
                for mi in -40..=40 {
                    let ei = expected_improvement(mi as f64 * 0.1, std, inc).unwrap();
                    assert!(ei >= prev, "mean monotonicity at std={std}");
                    prev = ei;
                }
            }
            for di in 0..20 {
                let mean = inc + di as f64 * 0.2;
                let mut prev = 0.0;
                for si in 0..40 {
                    let ei = expected_improvement(mean, si as f64 * 0.1, inc).unwrap();
                    assert!(ei >= prev, "std monotonicity at delta={}", mean - inc);
                    prev = ei;
                }
            }
        }
    }

    #[test]
    fn ei_translation_invariant() {
        for &(m, s, f) in &[(0.3, 0.7, 0.1), (-1.0, 2.0, 1.5), (4.0, 0.01, 3.99)] {
            for &c in &[-100.0, 0.5, 1e3] {
                let a = expected_improvement(m, s, f).unwrap();
                let b = expected_improvement(m + c, s, f + c).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn incumbent_ties_take_lowest_index() {
        let t = ExperimentTable::new(
            vec!["a".into()],
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![5.0, 9.0, 1.0, 9.0],
        )
        .unwrap();
        let inc = Incumbent::from_observed(&t, &[3, 2, 1]).unwrap();
        assert_eq!((inc.value, inc.index), (9.0, 1));
        assert!(Incumbent::from_observed(&t, &[]).is_none());
    }

    fn toy_model() -> (GpModel, ScalingParams) {
        let x = DMatrix::from_row_slice(4, 1, &[-1.0, -0.3, 0.4, 1.2]);
        let y = DVector::from_vec(vec![-0.5, 0.2, 0.9, -0.1]);
        let gp = GpModel::condition(x, y, KernelParams::new(0.6, 1.0, 1e-3).unwrap()).unwrap();
        let s =
            ScalingParams { feature_mean: vec![0.0], feature_std: vec![1.0], response_mean: 0.0, response_std: 1.0 };
        (gp, s)
    }

    #[test]
    fn ranking_contracts() {
        let (gp, s) = toy_model();
        let inc = Incumbent { value: 0.9, index: 2 };
        let feats = [[0.0], [2.5], [0.0], [-3.0]];
        let pool: Vec<Candidate> =
            feats.iter().enumerate().map(|(i, f)| Candidate { index: 10 + i, features: f }).collect();

        let one = rank_pool(&gp, &pool[1..2], &inc, &s, Execution::Sequential).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].pool_index, 11);

        let ranked = rank_pool(&gp, &pool, &inc, &s, Execution::Parallel).unwrap();
        assert!(ranked.windows(2).all(|w| w[0].ei >= w[1].ei));
        let p10 = ranked.iter().position(|c| c.pool_index == 10).unwrap();
        let p12 = ranked.iter().position(|c| c.pool_index == 12).unwrap();
        assert_eq!(ranked[p10].ei, ranked[p12].ei);
        assert!(p10 < p12);

        let mut reversed = pool.clone();
        reversed.reverse();
        assert_eq!(rank_pool(&gp, &reversed, &inc, &s, Execution::Sequential).unwrap(), ranked);

        assert!(matches!(rank_pool(&gp, &[], &inc, &s, Execution::Sequential), Err(Error::EmptyPool)));
    }

    #[test]
    fn batch_selection() {
        let ranked: Vec<ScoredCandidate> = (0..10)
            .map(|i| ScoredCandidate {
                pool_index: i,
                ei: 1.0 / (i + 1) as f64,
                predicted_mean: 0.0,
                predicted_std: 1.0,
            })
            .collect();
        assert_eq!(select_batch(&ranked, 3).unwrap(), [0, 1, 2]);
        assert_eq!(select_batch(&ranked[..2], 3).unwrap(), [0, 1]);
        assert_eq!(select_batch(&ranked, 1).unwrap(), [0]);
        assert!(select_batch(&ranked, 0).is_err());
    }
}
