//! Seeded pool-based campaigns: start from a random initial design, then
//! repeatedly fit, score the remaining pool, and reveal the recorded
//! responses of the selected batch until the budget is spent. The final
//! surrogate is scored by RMSE on every row that was never selected.
//!
//! All randomness in a campaign is derived from its seed `s`:
//!
//! | stream                      | seed                                       |
//! |-----------------------------|--------------------------------------------|
//! | initial design              | `derive_seed(s, 0)`                        |
//! | random control policy       | `derive_seed(s, 1)`                        |
//! | GP restarts at iteration t  | `derive_seed(derive_seed(s, 2), t)`        |
//!
//! The final fit uses `t = n_iterations`. Repeated campaigns use
//! `run_seed(base, i)` for run `i`.

use rand::seq::index;

use crate::acquisition::{rank_pool, select_batch, Candidate, Incumbent, ScoredCandidate};
use crate::bma::{fit_ensemble_from, AcquisitionVariant, BmaEnsemble};
use crate::dataset::{partition, ExperimentTable, ModelSpec};
use crate::error::{Error, Result};
use crate::eval::rmse;
use crate::exec::{map_range, with_workers, Execution};
use crate::gp::{GpFitConfig, KernelParams};
use crate::rng::{derive_seed, rng_from_seed, run_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Single-model Bayesian optimization.
    Bo,
    /// Bayesian model averaging over several specs.
    Bma,
}

/// How the batch is picked each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    #[default]
    Ei,
    /// Seeded uniform sampling from the pool; a control baseline.
    Random,
}

/// How the `q` members of a batch are chosen from one fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchStrategy {
    /// Top `q` by acquisition score.
    #[default]
    TopQ,
    /// Pick the best candidate, condition every model on a fantasy
    /// observation equal to the incumbent at fixed hyperparameters, rescore,
    /// and repeat `q` times.
    ConstantLiar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub n_init: usize,
    pub batch_size: usize,
    pub n_iterations: usize,
    pub mode: Mode,
    pub specs: Vec<ModelSpec>,
    pub gp: GpFitConfig,
    pub rng_seed: u64,
    pub policy: Policy,
    pub acquisition: AcquisitionVariant,
    pub batch_strategy: BatchStrategy,
    /// Start each iteration's first restart from the previous fit.
    pub warm_start: bool,
    pub execution: Execution,
}

impl CampaignConfig {
    /// Protocol defaults: 5 initial rows, batches of 3, 40 iterations.
    pub fn new(mode: Mode, specs: Vec<ModelSpec>) -> Self {
        CampaignConfig {
            n_init: 5,
            batch_size: 3,
            n_iterations: 40,
            mode,
            specs,
            gp: GpFitConfig::default(),
            rng_seed: 0,
            policy: Policy::Ei,
            acquisition: AcquisitionVariant::WeightedEi,
            batch_strategy: BatchStrategy::TopQ,
            warm_start: false,
            execution: Execution::default(),
        }
    }

    pub fn bo(spec: ModelSpec) -> Self {
        Self::new(Mode::Bo, vec![spec])
    }

    pub fn bma(specs: Vec<ModelSpec>) -> Self {
        Self::new(Mode::Bma, specs)
    }

    /// Total number of observed experiments at the end of a campaign.
    pub fn budget(&self) -> usize {
        self.n_init + self.batch_size * self.n_iterations
    }

    /// Checks the config on its own and against `table`.
    pub fn validate(&self, table: &ExperimentTable) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::InvalidArgument("no model specs".into()));
        }
        if self.mode == Mode::Bo && self.specs.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "single-model BO needs exactly one spec, got {}",
                self.specs.len()
            )));
        }
        if self.n_init < 2 {
            return Err(Error::InvalidArgument("n_init must be at least 2".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        for s in &self.specs {
            s.check_against(table)?;
        }
        if self.budget() >= table.n_rows() {
            return Err(Error::Budget(format!(
                "budget {} leaves no test rows in a table of {}",
                self.budget(),
                table.n_rows()
            )));
        }
        Ok(())
    }
}

/// Outcome of one seeded campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub run_seed: u64,
    /// Observed rows in order: the initial design, then each batch.
    pub selected_indices: Vec<usize>,
    /// Best observed response after initialization and after each iteration.
    pub incumbent_trajectory: Vec<f64>,
    /// BMA only: weights of the final fit.
    pub final_weights: Option<Vec<f64>>,
    /// BMA only: weights of each iteration's fit followed by the final fit.
    pub weight_trajectory: Option<Vec<Vec<f64>>>,
    pub test_indices: Vec<usize>,
    pub test_rmse: f64,
}

impl CampaignResult {
    pub fn final_incumbent(&self) -> f64 {
        *self.incumbent_trajectory.last().expect("trajectory has the initial entry")
    }
}

fn fit_seed(run_seed: u64, iteration: usize) -> u64 {
    derive_seed(derive_seed(run_seed, 2), iteration as u64)
}

struct Campaign<'a> {
    table: &'a ExperimentTable,
    config: &'a CampaignConfig,
    warm: Option<Vec<KernelParams>>,
}

impl Campaign<'_> {
    fn fit(&mut self, observed: &[usize], iteration: usize) -> Result<BmaEnsemble> {
        let ens = fit_ensemble_from(
            self.table,
            observed,
            &self.config.specs,
            &self.config.gp,
            fit_seed(self.config.rng_seed, iteration),
            self.config.execution,
            self.warm.as_deref(),
        )?;
        if self.config.warm_start {
            self.warm = Some(ens.models().iter().map(|m| *m.params()).collect());
        }
        Ok(ens)
    }

    fn rank(&self, ens: &BmaEnsemble, pool: &[usize], incumbent: &Incumbent) -> Result<Vec<ScoredCandidate>> {
        match self.config.mode {
            Mode::Bo => {
                let cols = &ens.columns()[0];
                let rows: Vec<Vec<f64>> =
                    pool.iter().map(|&i| cols.iter().map(|&c| self.table.row(i)[c]).collect()).collect();
                let candidates: Vec<Candidate> =
                    pool.iter().zip(&rows).map(|(&index, f)| Candidate { index, features: f }).collect();
                rank_pool(&ens.models()[0], &candidates, incumbent, &ens.scalings()[0], self.config.execution)
            }
            Mode::Bma => {
                let candidates: Vec<Candidate> =
                    pool.iter().map(|&index| Candidate { index, features: self.table.row(index) }).collect();
                ens.rank_pool(&candidates, incumbent, self.config.acquisition, self.config.execution)
            }
        }
    }

    fn choose(&self, ens: &BmaEnsemble, pool: &[usize], incumbent: &Incumbent) -> Result<Vec<usize>> {
        let q = self.config.batch_size;
        match self.config.batch_strategy {
            BatchStrategy::TopQ => select_batch(&self.rank(ens, pool, incumbent)?, q),
            BatchStrategy::ConstantLiar => {
                let mut ens = ens.clone();
                let mut remaining = pool.to_vec();
                let mut batch = Vec::with_capacity(q);
                while batch.len() < q && !remaining.is_empty() {
                    let pick = self.rank(&ens, &remaining, incumbent)?[0].pool_index;
                    batch.push(pick);
                    remaining.retain(|&i| i != pick);
                    if batch.len() < q {
                        ens = ens.with_fantasy(self.table.row(pick), incumbent.value)?;
                    }
                }
                Ok(batch)
            }
        }
    }
}

/// Runs one campaign with `config.rng_seed`.
pub fn run_campaign(table: &ExperimentTable, config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate(table)?;
    let seed = config.rng_seed;
    let mut part = partition(table.n_rows(), config.n_init, config.budget(), derive_seed(seed, 0))?;
    let mut policy_rng = rng_from_seed(derive_seed(seed, 1));
    let mut campaign = Campaign { table, config, warm: None };

    let mut observed = part.initial_indices.clone();
    let incumbent_of =
        |observed: &[usize]| Incumbent::from_observed(table, observed).expect("observed set is never empty");
    let mut incumbent_trajectory = vec![incumbent_of(&observed).value];
    let mut weight_trajectory = Vec::with_capacity(config.n_iterations + 1);

    for iteration in 0..config.n_iterations {
        let pool = &mut part.pool_indices;
        if pool.len() < config.batch_size {
            return Err(Error::PoolExhausted { iteration, remaining: pool.len(), needed: config.batch_size });
        }
        let incumbent = incumbent_of(&observed);
        let ens = campaign.fit(&observed, iteration)?;
        weight_trajectory.push(ens.weights().to_vec());

        let batch = match config.policy {
            Policy::Ei => campaign.choose(&ens, pool, &incumbent)?,
            Policy::Random => {
                index::sample(&mut policy_rng, pool.len(), config.batch_size).into_iter().map(|k| pool[k]).collect()
            }
        };
        pool.retain(|i| !batch.contains(i));
        observed.extend(&batch);
        incumbent_trajectory.push(incumbent_of(&observed).value);
    }

    let ens = campaign.fit(&observed, config.n_iterations)?;
    weight_trajectory.push(ens.weights().to_vec());
    part.close();

    let mut predicted = Vec::with_capacity(part.test_indices.len());
    let mut truth = Vec::with_capacity(part.test_indices.len());
    for &i in &part.test_indices {
        predicted.push(ens.mixture_predict(table.row(i))?.mean);
        truth.push(table.response(i));
    }
    let test_rmse = rmse(&truth, &predicted)?;

    let bma = config.mode == Mode::Bma;
    Ok(CampaignResult {
        run_seed: seed,
        selected_indices: observed,
        incumbent_trajectory,
        final_weights: bma.then(|| ens.weights().to_vec()),
        weight_trajectory: bma.then_some(weight_trajectory),
        test_indices: part.test_indices,
        test_rmse,
    })
}

/// Runs `n_runs` campaigns, run `i` seeded with `run_seed(base_seed, i)`.
/// Results are in run order whatever the execution order; a failing run is
/// reported in place as [`Error::Run`] and does not stop the others.
pub fn run_repeated(
    table: &ExperimentTable,
    config: &CampaignConfig,
    n_runs: usize,
    base_seed: u64,
) -> Result<Vec<Result<CampaignResult>>> {
    if n_runs == 0 {
        return Err(Error::InvalidArgument("n_runs must be at least 1".into()));
    }
    config.validate(table)?;
    Ok(map_range(config.execution, n_runs, |i| {
        let mut cfg = config.clone();
        cfg.rng_seed = run_seed(base_seed, i);
        run_campaign(table, &cfg).map_err(|e| Error::Run { run: i, source: Box::new(e) })
    }))
}

/// [`run_repeated`] on a dedicated pool of `workers` threads.
pub fn run_repeated_with_workers(
    table: &ExperimentTable,
    config: &CampaignConfig,
    n_runs: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<Result<CampaignResult>>> {
    with_workers(workers, || run_repeated(table, config, n_runs, base_seed))
}
