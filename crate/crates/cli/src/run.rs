use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use bmabo::dataset::ModelSpec;
use bmabo::engine::{run_repeated, run_repeated_with_workers, CampaignConfig, Mode};
use bmabo::report::{
    write_results, write_weight_trajectories, RunRecord, SummaryDoc, RESULTS_SCHEMA, SUMMARY_SCHEMA, WEIGHTS_SCHEMA,
};
use bmabo::rng::run_seed;
use serde::Serialize;

use crate::args::RunArgs;
use crate::data;

pub const MANIFEST_SCHEMA: &str = "bmabo.manifest/1";

#[derive(Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    tool: &'static str,
    version: &'static str,
    created_at: String,
    data: DataInfo,
    models: &'a [ModelSpec],
    config: ResolvedConfig,
    seeds: Vec<u64>,
    outputs: Vec<OutputInfo>,
}

#[derive(Serialize)]
struct DataInfo {
    path: String,
    sha256: String,
    response: String,
    n_rows: usize,
}

#[derive(Serialize)]
struct ResolvedConfig {
    mode: &'static str,
    specs_path: Option<String>,
    n_init: usize,
    batch: usize,
    iters: usize,
    budget: usize,
    runs: usize,
    base_seed: u64,
    acq_variant: String,
    policy: String,
    batch_strategy: String,
    warm_start: bool,
    workers: Option<usize>,
    gp_restarts: usize,
    gp_max_evals: usize,
    lengthscale_bounds: (f64, f64),
    signal_variance_bounds: (f64, f64),
    noise_variance_bounds: (f64, f64),
}

#[derive(Serialize)]
struct OutputInfo {
    file: &'static str,
    schema: &'static str,
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Bo => "bo",
        Mode::Bma => "bma",
    }
}

fn value_name<T: clap::ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

/// Returns `Ok(true)` when every run succeeded.
pub fn cmd_run(args: &RunArgs) -> Result<bool> {
    let mode = Mode::from(args.mode);
    let input = data::read_data(&args.data.data)?;
    let specs = data::model_specs(args.data.specs.as_deref(), mode)?;
    let table = data::load(&input, &data::schema_for(&specs, &args.data.response))?;

    let mut config = CampaignConfig::new(mode, specs);
    config.n_init = args.n_init;
    config.batch_size = args.batch;
    config.n_iterations = args.iters;
    config.acquisition = args.acq_variant.into();
    config.policy = args.policy.into();
    config.batch_strategy = args.batch_strategy.into();
    config.warm_start = args.warm_start;
    config.gp.n_restarts = args.gp_restarts;
    config.validate(&table)?;

    let seeds: Vec<u64> = (0..args.runs).map(|i| run_seed(args.seed, i)).collect();
    log::info!("{} runs of {} on {} rows", args.runs, mode_name(mode), table.n_rows());
    let outcomes = match args.workers {
        Some(w) => run_repeated_with_workers(&table, &config, args.runs, args.seed, w)?,
        None => run_repeated(&table, &config, args.runs, args.seed)?,
    };
    let records = RunRecord::collect(outcomes, &seeds);
    for r in &records {
        if let Err(e) = &r.outcome {
            log::error!("run {} (seed {}) failed: {e}", r.run, r.seed);
        }
    }

    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let out = args.out_dir.as_path();
    write_results(create(out, "results.csv")?, &records)?;
    let names: Vec<String> = config.specs.iter().map(|s| s.name.clone()).collect();
    let mut outputs = vec![OutputInfo { file: "results.csv", schema: RESULTS_SCHEMA }];
    if mode == Mode::Bma {
        write_weight_trajectories(create(out, "weights.csv")?, &records, &names)?;
        outputs.push(OutputInfo { file: "weights.csv", schema: WEIGHTS_SCHEMA });
    }
    match SummaryDoc::new(mode_name(mode), &names, &records) {
        Ok(doc) => {
            std::fs::write(out.join("summary.json"), doc.to_json())?;
            outputs.push(OutputInfo { file: "summary.json", schema: SUMMARY_SCHEMA });
        }
        Err(e) => log::error!("no summary written: {e}"),
    }

    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        data: DataInfo {
            path: args.data.data.display().to_string(),
            sha256: input.sha256,
            response: args.data.response.clone(),
            n_rows: table.n_rows(),
        },
        models: &config.specs,
        config: ResolvedConfig {
            mode: mode_name(mode),
            specs_path: args.data.specs.as_ref().map(|p| p.display().to_string()),
            n_init: config.n_init,
            batch: config.batch_size,
            iters: config.n_iterations,
            budget: config.budget(),
            runs: args.runs,
            base_seed: args.seed,
            acq_variant: value_name(args.acq_variant),
            policy: value_name(args.policy),
            batch_strategy: value_name(args.batch_strategy),
            warm_start: config.warm_start,
            workers: args.workers,
            gp_restarts: config.gp.n_restarts,
            gp_max_evals: config.gp.max_evals,
            lengthscale_bounds: config.gp.lengthscale_bounds,
            signal_variance_bounds: config.gp.signal_variance_bounds,
            noise_variance_bounds: config.gp.noise_variance_bounds,
        },
        seeds,
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(out.join("manifest.json"), text)?;

    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed == 0 {
        println!("{} runs written to {}", records.len(), out.display());
    } else {
        println!("{failed} of {} runs failed; results written to {}", records.len(), out.display());
    }
    Ok(failed == 0)
}
