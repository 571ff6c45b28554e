//! Pool-based sequential experiment design with Gaussian-process surrogates.
//!
//! Two selection loops are provided over a finite table of recorded
//! experiments:
//!
//! * single-model Bayesian optimization, scoring the pool by Expected
//!   Improvement under one GP;
//! * Bayesian model averaging, where several GPs built on different feature
//!   subsets are weighted by their marginal likelihood and the pool is scored
//!   by the posterior-weighted EI.
//!
//! ```no_run
//! use bmabo::{dataset, engine, eval};
//!
//! let file = std::fs::File::open("fatigue.csv")?;
//! let table = dataset::load_table(file, &dataset::Schema::nims())?;
//! let config = engine::CampaignConfig::bma(dataset::ModelSpec::nims_models());
//! let runs = engine::run_repeated(&table, &config, 20, 42)?;
//! let ok: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;
//! let summary = eval::summarize(&ok)?;
//! println!("mean RMSE {:.3} +/- {:.3}", summary.mean_rmse, summary.std_rmse);
//! # Ok::<(), bmabo::Error>(())
//! ```

pub mod acquisition;
pub mod bma;
pub mod dataset;
pub mod engine;
mod error;
pub mod eval;
pub mod exec;
pub mod gp;
pub mod report;
pub mod rng;

pub use error::{BadRow, Error, Result};
pub use exec::Execution;
