use std::collections::HashSet;
use std::io::Read;

use crate::dataset::ModelSpec;
use crate::error::{BadRow, Error, Result};

/// Heat-treatment and composition feature columns of the steel fatigue data,
/// in canonical order.
pub const NIMS_FEATURES: [&str; 14] =
    ["NT", "THT", "THQCr", "CT", "DT", "QmT", "TT", "TCr", "C", "Si", "Mn", "Ni", "Cr", "Mo"];

/// Response column of the steel fatigue data (fatigue strength, MPa).
pub const NIMS_RESPONSE: &str = "Fatigue";

/// Column names a data file must provide.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub features: Vec<String>,
    pub response: String,
}

impl Schema {
    pub fn new<S: Into<String>>(features: impl IntoIterator<Item = S>, response: impl Into<String>) -> Self {
        Schema { features: features.into_iter().map(Into::into).collect(), response: response.into() }
    }

    /// The 14-feature fatigue schema.
    pub fn nims() -> Self {
        Schema::new(NIMS_FEATURES, NIMS_RESPONSE)
    }
}

impl Default for Schema {
    fn default() -> Self {
        Schema::nims()
    }
}

/// Previously conducted experiments: one feature vector and one recorded
/// response per row. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    feature_names: Vec<String>,
    /// Row-major, `n * p`.
    values: Vec<f64>,
    responses: Vec<f64>,
}

impl ExperimentTable {
    /// Builds a table from row vectors, checking shape, finiteness and name
    /// uniqueness.
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, responses: Vec<f64>) -> Result<Self> {
        let p = feature_names.len();
        if p == 0 {
            return Err(Error::Ingest("table has no feature columns".into()));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if rows.len() != responses.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), got: responses.len() });
        }
        let mut values = Vec::with_capacity(rows.len() * p);
        for row in &rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: row.len() });
            }
            values.extend_from_slice(row);
        }
        if values.iter().chain(&responses).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("experiment table"));
        }
        Ok(ExperimentTable { feature_names, values, responses })
    }

    pub fn n_rows(&self) -> usize {
        self.responses.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features())
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn response(&self, i: usize) -> f64 {
        self.responses[i]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Resolves feature names to column positions, failing on the first
    /// unknown name.
    pub fn column_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.column_index(n.as_ref()).ok_or_else(|| Error::UnknownFeature(n.as_ref().to_string())))
            .collect()
    }

    /// Keeps only the columns named by `spec`, in spec order.
    pub fn project(&self, spec: &ModelSpec) -> Result<ExperimentTable> {
        let cols = self.column_indices(&spec.features)?;
        let mut values = Vec::with_capacity(self.n_rows() * cols.len());
        for row in self.rows() {
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(ExperimentTable { feature_names: spec.features.clone(), values, responses: self.responses.clone() })
    }

    /// Writes the table as comma-separated text with a header row.
    pub fn write_csv<W: std::io::Write>(&self, writer: W, response_name: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(response_name);
        w.write_record(&header)?;
        for (row, y) in self.rows().zip(&self.responses) {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            rec.push(format!("{y:?}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn detect_delimiter(bytes: &[u8]) -> u8 {
    let first_line = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    if first_line.contains(&b'\t') && !first_line.contains(&b',') {
        b'\t'
    } else {
        b','
    }
}

/// Column names from the header row of a delimited table.
pub fn read_header<R: Read>(mut source: R) -> Result<Vec<String>> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(&bytes))
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    Ok(reader.headers()?.iter().map(str::to_string).collect())
}

/// Reads a delimited table (comma or tab, header row required) and reorders
/// its columns to match `schema`. Extra columns are ignored. Any row with a
/// missing or unparseable cell fails the whole load, and every offending
/// line is reported.
pub fn load_table<R: Read>(mut source: R, schema: &Schema) -> Result<ExperimentTable> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(&bytes))
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());

    let header = reader.headers()?.clone();
    let locate =
        |name: &str| header.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let feature_cols = schema.features.iter().map(|f| locate(f)).collect::<Result<Vec<_>>>()?;
    let response_col = locate(&schema.response)?;

    let mut rows = Vec::new();
    let mut responses = Vec::new();
    let mut bad = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse = |col: usize, name: &str| -> std::result::Result<f64, String> {
            let cell = record.get(col).unwrap_or("");
            if cell.is_empty() {
                return Err(format!("missing value for `{name}`"));
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("cannot parse `{cell}` for `{name}`")),
            }
        };
        let row: std::result::Result<Vec<f64>, String> =
            feature_cols.iter().zip(&schema.features).map(|(&c, name)| parse(c, name)).collect();
        match (row, parse(response_col, &schema.response)) {
            (Ok(row), Ok(y)) => {
                rows.push(row);
                responses.push(y);
            }
            (Err(reason), _) | (_, Err(reason)) => bad.push(BadRow { line, reason }),
        }
    }
    if !bad.is_empty() {
        return Err(Error::BadRows(bad));
    }
    if rows.is_empty() {
        return Err(Error::Ingest("table has no data rows".into()));
    }
    ExperimentTable::new(schema.features.clone(), rows, responses)
}
