use std::path::Path;

use anyhow::{Context, Result};
use bmabo::dataset::{load_spec_config, load_table, ExperimentTable, ModelSpec, Schema};
use bmabo::engine::Mode;
use sha2::{Digest, Sha256};

pub struct LoadedData {
    pub bytes: Vec<u8>,
    pub sha256: String,
}

pub fn read_data(path: &Path) -> Result<LoadedData> {
    let bytes = std::fs::read(path).with_context(|| format!("reading data file {}", path.display()))?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    Ok(LoadedData { bytes, sha256 })
}

pub fn model_specs(path: Option<&Path>, mode: Mode) -> Result<Vec<ModelSpec>> {
    match path {
        Some(p) => load_spec_config(p).with_context(|| format!("loading model config {}", p.display())),
        None => Ok(match mode {
            Mode::Bo => vec![ModelSpec::nims_all()],
            Mode::Bma => ModelSpec::nims_models(),
        }),
    }
}

/// Every feature named by some spec, in order of first mention.
pub fn schema_for(specs: &[ModelSpec], response: &str) -> Schema {
    let mut features: Vec<String> = Vec::new();
    for f in specs.iter().flat_map(|s| &s.features) {
        if !features.contains(f) {
            features.push(f.clone());
        }
    }
    Schema::new(features, response)
}

pub fn load(data: &LoadedData, schema: &Schema) -> Result<ExperimentTable> {
    Ok(load_table(data.bytes.as_slice(), schema)?)
}
