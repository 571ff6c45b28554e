use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ExperimentTable, NIMS_FEATURES};
use crate::error::{Error, Result};

/// One candidate predictive model: a named, ordered subset of feature
/// columns with a prior weight.
///
/// Prior weights are relative; they are renormalized across an ensemble when
/// posterior weights are computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub name: String,
    pub features: Vec<String>,
    pub prior_weight: f64,
}

impl ModelSpec {
    pub fn new<S: Into<String>>(name: impl Into<String>, features: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::with_prior(name, features, 1.0)
    }

    pub fn with_prior<S: Into<String>>(
        name: impl Into<String>,
        features: impl IntoIterator<Item = S>,
        prior_weight: f64,
    ) -> Result<Self> {
        let spec =
            ModelSpec { name: name.into(), features: features.into_iter().map(Into::into).collect(), prior_weight };
        spec.check()?;
        Ok(spec)
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidSpec { name: self.name.clone(), reason: reason.into() }
    }

    fn check(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(self.invalid("feature list is empty"));
        }
        let mut seen = HashSet::new();
        for f in &self.features {
            if !seen.insert(f.as_str()) {
                return Err(self.invalid(format!("duplicate feature `{f}`")));
            }
        }
        if !(self.prior_weight > 0.0 && self.prior_weight <= 1.0) {
            return Err(self.invalid(format!("prior weight {} outside (0, 1]", self.prior_weight)));
        }
        Ok(())
    }

    /// Fails with the first feature the table does not have.
    pub fn check_against(&self, table: &ExperimentTable) -> Result<()> {
        match self.features.iter().find(|f| table.column_index(f).is_none()) {
            Some(f) => Err(self.invalid(format!("unknown feature `{f}`"))),
            None => Ok(()),
        }
    }

    /// All 14 fatigue features as a single model.
    pub fn nims_all() -> Self {
        ModelSpec::new("all14", NIMS_FEATURES).expect("static spec is valid")
    }

    /// The three hand-picked fatigue models, uniform priors.
    pub fn nims_models() -> Vec<Self> {
        let third = 1.0 / 3.0;
        vec![
            ModelSpec::with_prior("model1", ["NT", "THT", "THQCr", "DT", "TT", "TCr"], third),
            ModelSpec::with_prior("model2", ["C", "Si", "Mn", "Ni", "Cr", "Mo"], third),
            ModelSpec::with_prior("model3", ["QmT", "CT", "NT", "C", "Ni", "Cr"], third),
        ]
        .into_iter()
        .collect::<Result<_>>()
        .expect("static specs are valid")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(rename = "model", default)]
    models: Vec<SpecEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecEntry {
    name: String,
    features: Vec<String>,
    prior: Option<f64>,
}

/// Parses a model-spec config:
///
/// ```toml
/// [[model]]
/// name = "model1"
/// features = ["NT", "THT", "THQCr", "DT", "TT", "TCr"]
/// prior = 0.5          # optional, defaults to 1/L
/// ```
pub fn parse_spec_config(text: &str) -> Result<Vec<ModelSpec>> {
    let file: SpecFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.models.is_empty() {
        return Err(Error::Config("no [[model]] entries".into()));
    }
    let uniform = 1.0 / file.models.len() as f64;
    let mut names = HashSet::new();
    let mut specs = Vec::with_capacity(file.models.len());
    for entry in file.models {
        if !names.insert(entry.name.clone()) {
            return Err(Error::Config(format!("duplicate model name `{}`", entry.name)));
        }
        specs.push(ModelSpec::with_prior(entry.name, entry.features, entry.prior.unwrap_or(uniform))?);
    }
    Ok(specs)
}

pub fn load_spec_config(path: &Path) -> Result<Vec<ModelSpec>> {
    parse_spec_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_default_priors() {
        let specs = parse_spec_config(
            r#"
            [[model]]
            name = "a"
            features = ["NT", "THT"]

            [[model]]
            name = "b"
            features = ["C"]
            prior = 0.75
            "#,
        )
        .unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].prior_weight, 0.5);
        assert_eq!(specs[1].prior_weight, 0.75);
        assert_eq!(specs[0].features, ["NT", "THT"]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ModelSpec::new("e", Vec::<String>::new()).is_err());
        assert!(ModelSpec::new("d", ["a", "a"]).is_err());
        assert!(ModelSpec::with_prior("p", ["a"], 0.0).is_err());
        assert!(ModelSpec::with_prior("p", ["a"], 1.5).is_err());
        assert!(parse_spec_config("").is_err());
        assert!(parse_spec_config("[[model]]\nname='x'\nfeatures=['a']\n[[model]]\nname='x'\nfeatures=['b']").is_err());
    }

    #[test]
    fn nims_fixtures_match_schema() {
        let m = ModelSpec::nims_models();
        assert_eq!(m[0].features, ["NT", "THT", "THQCr", "DT", "TT", "TCr"]);
        assert_eq!(m[1].features, ["C", "Si", "Mn", "Ni", "Cr", "Mo"]);
        assert_eq!(m[2].features, ["QmT", "CT", "NT", "C", "Ni", "Cr"]);
        assert_eq!(ModelSpec::nims_all().features.len(), 14);
    }
}
