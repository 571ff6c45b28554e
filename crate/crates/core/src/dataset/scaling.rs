use crate::dataset::ExperimentTable;
use crate::error::{Error, Result};

/// Z-score parameters for features and response, estimated on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub response_mean: f64,
    pub response_std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Standard deviations at or below this are treated as a constant column.
const MIN_STD: f64 = 1e-12;

fn guard(std: f64, what: &str) -> f64 {
    if std > MIN_STD {
        std
    } else {
        log::warn!("{what} is constant on the training rows; using unit scale");
        1.0
    }
}

/// Estimates means and sample standard deviations (n - 1 denominator) on
/// `rows` only. Constant columns get unit scale.
pub fn fit_scaling(table: &ExperimentTable, rows: &[usize]) -> Result<ScalingParams> {
    if rows.len() < 2 {
        return Err(Error::InsufficientRows { needed: 2, got: rows.len() });
    }
    let p = table.n_features();
    let mut feature_mean = Vec::with_capacity(p);
    let mut feature_std = Vec::with_capacity(p);
    for j in 0..p {
        let (m, s) = mean_std(rows.iter().map(|&i| table.row(i)[j]));
        feature_mean.push(m);
        feature_std.push(guard(s, &format!("feature `{}`", table.feature_names()[j])));
    }
    let (response_mean, s) = mean_std(rows.iter().map(|&i| table.response(i)));
    Ok(ScalingParams { feature_mean, feature_std, response_mean, response_std: guard(s, "response") })
}

impl ScalingParams {
    pub fn n_features(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn scale_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: x.len() });
        }
        Ok(x.iter().zip(self.feature_mean.iter().zip(&self.feature_std)).map(|(v, (m, s))| (v - m) / s).collect())
    }

    pub fn unscale_features(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.feature_mean.iter().zip(&self.feature_std)).map(|(v, (m, s))| v * s + m).collect()
    }

    pub fn scale_response(&self, y: f64) -> f64 {
        (y - self.response_mean) / self.response_std
    }

    pub fn unscale_response(&self, z: f64) -> f64 {
        z * self.response_std + self.response_mean
    }

    /// Converts a standardized standard deviation back to response units.
    pub fn unscale_std(&self, s: f64) -> f64 {
        s * self.response_std
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(cols: Vec<Vec<f64>>, y: Vec<f64>) -> ExperimentTable {
        let n = y.len();
        let names = (0..cols.len()).map(|j| format!("f{j}")).collect();
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        ExperimentTable::new(names, rows, y).unwrap()
    }

    #[test]
    fn two_point_case() {
        let t = table(vec![vec![0.0, 2.0]], vec![1.0, 3.0]);
        let s = fit_scaling(&t, &[0, 1]).unwrap();
        assert_eq!(s.feature_mean, [1.0]);
        assert!((s.feature_std[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.response_mean, 2.0);
    }

    #[test]
    fn constant_column_gets_unit_scale() {
        let t = table(vec![vec![5.0, 5.0, 5.0]], vec![1.0, 2.0, 4.0]);
        let s = fit_scaling(&t, &[0, 1, 2]).unwrap();
        assert_eq!(s.feature_mean, [5.0]);
        assert_eq!(s.feature_std, [1.0]);
    }

    #[test]
    fn uses_only_the_subset() {
        let t = table(vec![vec![0.0, 2.0, 1000.0]], vec![1.0, 3.0, -50.0]);
        let s = fit_scaling(&t, &[0, 1]).unwrap();
        assert_eq!(s.feature_mean, [1.0]);
        assert_eq!(s.response_mean, 2.0);
    }

    #[test]
    fn subset_of_one_is_an_error() {
        let t = table(vec![vec![0.0, 2.0]], vec![1.0, 3.0]);
        assert!(matches!(fit_scaling(&t, &[0]), Err(Error::InsufficientRows { .. })));
    }

    proptest! {
        #[test]
        fn forward_inverse_roundtrip(
            x in proptest::collection::vec(-1e4f64..1e4, 3),
            mean in proptest::collection::vec(-100f64..100.0, 3),
            std in proptest::collection::vec(0.01f64..100.0, 3),
            y in -1e4f64..1e4,
        ) {
            let s = ScalingParams { feature_mean: mean, feature_std: std, response_mean: 3.0, response_std: 7.5 };
            let back = s.unscale_features(&s.scale_features(&x).unwrap());
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
            let yb = s.unscale_response(s.scale_response(y));
            prop_assert!((yb - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}
