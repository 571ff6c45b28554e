//! Machine-readable campaign outputs.
//!
//! Four artifacts are produced per invocation; the first three are written
//! here and are byte-for-byte reproducible for a given configuration and
//! seed. Floats use the shortest representation that parses back to the same
//! value, so reading a file loses nothing.
//!
//! `results.csv` ([`RESULTS_SCHEMA`]), one row per run:
//!
//! | field             | content                                            |
//! |-------------------|----------------------------------------------------|
//! | `run`             | run index, from 0                                  |
//! | `seed`            | campaign seed                                      |
//! | `status`          | `ok` or `failed`                                   |
//! | `test_rmse`       | RMSE on the never-selected rows (empty if failed)  |
//! | `final_incumbent` | best observed response (empty if failed)           |
//! | `n_selected`      | number of observed rows                            |
//! | `selected_indices`| space-separated row indices in observation order   |
//! | `final_weights`   | space-separated model weights (BMA only)           |
//! | `error`           | failure message (empty if ok)                      |
//!
//! `weights.csv` ([`WEIGHTS_SCHEMA`], BMA only), long format with fields
//! `run,iteration,model,weight`; iteration `n_iterations` is the final fit.
//!
//! `summary.json` ([`SUMMARY_SCHEMA`]): see [`SummaryDoc`].
//!
//! Comparison tables ([`COMPARISON_SCHEMA`]) have fields
//! `label,n_runs,mean_rmse,std_rmse,min,q1,median,q3,max`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::engine::CampaignResult;
use crate::error::{Error, Result};
use crate::eval::{summarize_values, Quartiles, RunSummary};

pub const RESULTS_SCHEMA: &str = "bmabo.results/1";
pub const WEIGHTS_SCHEMA: &str = "bmabo.weights/1";
pub const SUMMARY_SCHEMA: &str = "bmabo.summary/1";
pub const COMPARISON_SCHEMA: &str = "bmabo.comparison/1";

pub const RESULTS_FIELDS: [&str; 9] = [
    "run",
    "seed",
    "status",
    "test_rmse",
    "final_incumbent",
    "n_selected",
    "selected_indices",
    "final_weights",
    "error",
];

pub const COMPARISON_FIELDS: [&str; 9] =
    ["label", "n_runs", "mean_rmse", "std_rmse", "min", "q1", "median", "q3", "max"];

/// One run's outcome as it goes to disk.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub outcome: std::result::Result<CampaignResult, String>,
}

impl RunRecord {
    /// Pairs the output of a repeated campaign with run indices and seeds.
    pub fn collect(outcomes: Vec<Result<CampaignResult>>, seeds: &[u64]) -> Vec<RunRecord> {
        outcomes
            .into_iter()
            .zip(seeds)
            .enumerate()
            .map(|(run, (outcome, &seed))| RunRecord { run, seed, outcome: outcome.map_err(|e| e.to_string()) })
            .collect()
    }

    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(" ")
}

pub fn write_results<W: Write>(writer: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULTS_FIELDS)?;
    for r in records {
        let row = match &r.outcome {
            Ok(c) => [
                r.run.to_string(),
                r.seed.to_string(),
                "ok".into(),
                fmt_f64(c.test_rmse),
                fmt_f64(c.final_incumbent()),
                c.selected_indices.len().to_string(),
                join(&c.selected_indices, usize::to_string),
                c.final_weights.as_deref().map_or_else(String::new, |w| join(w, |v| fmt_f64(*v))),
                String::new(),
            ],
            Err(msg) => [
                r.run.to_string(),
                r.seed.to_string(),
                "failed".into(),
                String::new(),
                String::new(),
                "0".into(),
                String::new(),
                String::new(),
                msg.clone(),
            ],
        };
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A row read back from `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub run: usize,
    pub seed: u64,
    pub ok: bool,
    pub test_rmse: Option<f64>,
    pub final_incumbent: Option<f64>,
    pub selected_indices: Vec<usize>,
    pub final_weights: Vec<f64>,
    pub error: String,
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::BadField { line, field: field.into(), value: value.into() })
}

fn parse_opt(line: usize, field: &str, value: &str) -> Result<Option<f64>> {
    if value.is_empty() {
        Ok(None)
    } else {
        parse_field(line, field, value).map(Some)
    }
}

fn parse_list<T: std::str::FromStr>(line: usize, field: &str, value: &str) -> Result<Vec<T>> {
    value.split_whitespace().map(|v| parse_field(line, field, v)).collect()
}

pub fn read_results<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = r.headers()?.clone();
    let pos: Vec<usize> = RESULTS_FIELDS
        .iter()
        .map(|f| header.iter().position(|h| h == *f).ok_or_else(|| Error::MissingColumn(f.to_string())))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let get = |k: usize| -> Result<&str> {
            rec.get(pos[k]).ok_or_else(|| Error::MissingField { line, field: RESULTS_FIELDS[k].into() })
        };
        let status = get(2)?;
        let ok = match status {
            "ok" => true,
            "failed" => false,
            other => return Err(Error::BadField { line, field: "status".into(), value: other.into() }),
        };
        let row = ResultRow {
            run: parse_field(line, "run", get(0)?)?,
            seed: parse_field(line, "seed", get(1)?)?,
            ok,
            test_rmse: parse_opt(line, "test_rmse", get(3)?)?,
            final_incumbent: parse_opt(line, "final_incumbent", get(4)?)?,
            selected_indices: parse_list(line, "selected_indices", get(6)?)?,
            final_weights: parse_list(line, "final_weights", get(7)?)?,
            error: get(8)?.to_string(),
        };
        let n_selected: usize = parse_field(line, "n_selected", get(5)?)?;
        if n_selected != row.selected_indices.len() {
            return Err(Error::BadField { line, field: "n_selected".into(), value: n_selected.to_string() });
        }
        if row.ok && row.test_rmse.is_none() {
            return Err(Error::MissingField { line, field: "test_rmse".into() });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Summary over the successful rows of a results file.
pub fn summarize_rows(rows: &[ResultRow]) -> Result<RunSummary> {
    let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.ok).collect();
    let rmse: Vec<f64> = ok.iter().filter_map(|r| r.test_rmse).collect();
    let weights: Vec<Vec<f64>> = ok.iter().map(|r| r.final_weights.clone()).collect();
    let has_weights = !weights.is_empty() && weights.iter().all(|w| !w.is_empty());
    summarize_values(&rmse, has_weights.then_some(weights.as_slice()))
}

/// Summary over the successful records.
pub fn summarize_records(records: &[RunRecord]) -> Result<RunSummary> {
    let ok: Vec<&CampaignResult> = records.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let rmse: Vec<f64> = ok.iter().map(|c| c.test_rmse).collect();
    let weights: Option<Vec<Vec<f64>>> = ok.iter().map(|c| c.final_weights.clone()).collect();
    summarize_values(&rmse, weights.as_deref())
}

pub fn write_weight_trajectories<W: Write>(writer: W, records: &[RunRecord], model_names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["run", "iteration", "model", "weight"])?;
    for r in records {
        let Ok(c) = &r.outcome else { continue };
        let Some(traj) = &c.weight_trajectory else { continue };
        for (it, weights) in traj.iter().enumerate() {
            for (name, v) in model_names.iter().zip(weights) {
                w.write_record([r.run.to_string(), it.to_string(), name.clone(), fmt_f64(*v)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelWeight {
    pub model: String,
    pub weight: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub schema: String,
    pub mode: String,
    pub n_runs: usize,
    pub n_failed: usize,
    pub per_run_rmse: Vec<f64>,
    pub mean_rmse: f64,
    pub std_rmse: f64,
    /// False when fewer than two runs succeeded.
    pub std_defined: bool,
    pub quartiles: Quartiles,
    pub mean_weights: Option<Vec<ModelWeight>>,
}

impl SummaryDoc {
    pub fn new(mode: &str, model_names: &[String], records: &[RunRecord]) -> Result<SummaryDoc> {
        let s = summarize_records(records)?;
        Ok(SummaryDoc {
            schema: SUMMARY_SCHEMA.into(),
            mode: mode.into(),
            n_runs: records.len(),
            n_failed: records.iter().filter(|r| !r.is_ok()).count(),
            per_run_rmse: s.per_run_rmse,
            mean_rmse: s.mean_rmse,
            std_rmse: s.std_rmse,
            std_defined: s.std_defined,
            quartiles: s.quartiles,
            mean_weights: s.mean_weights.map(|w| {
                model_names.iter().zip(w).map(|(m, weight)| ModelWeight { model: m.clone(), weight }).collect()
            }),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Side-by-side table of labelled summaries, one row each.
pub fn write_comparison<W: Write>(writer: W, rows: &[(String, RunSummary)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COMPARISON_FIELDS)?;
    for (label, s) in rows {
        let q = s.quartiles;
        w.write_record([
            label.clone(),
            s.per_run_rmse.len().to_string(),
            fmt_f64(s.mean_rmse),
            if s.std_defined { fmt_f64(s.std_rmse) } else { String::new() },
            fmt_f64(q.min),
            fmt_f64(q.q1),
            fmt_f64(q.median),
            fmt_f64(q.q3),
            fmt_f64(q.max),
        ])?;
    }
    w.flush()?;
    Ok(())
}
