use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Split of row indices into the initial design, the candidate pool and the
/// held-out test rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolPartition {
    pub initial_indices: Vec<usize>,
    pub pool_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Draws `n_init` initial rows uniformly without replacement. Every other row
/// goes to the pool; the test set starts empty and is filled by
/// [`PoolPartition::close`] once a campaign has finished selecting.
pub fn partition(n_rows: usize, n_init: usize, budget: usize, rng_seed: u64) -> Result<PoolPartition> {
    if budget > n_rows {
        return Err(Error::Budget(format!("budget {budget} exceeds the {n_rows} available rows")));
    }
    if n_init > budget {
        return Err(Error::Budget(format!("n_init {n_init} exceeds budget {budget}")));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut initial_indices = index::sample(&mut rng, n_rows, n_init).into_vec();
    initial_indices.sort_unstable();
    let mut chosen = vec![false; n_rows];
    for &i in &initial_indices {
        chosen[i] = true;
    }
    let pool_indices = (0..n_rows).filter(|&i| !chosen[i]).collect();
    Ok(PoolPartition { initial_indices, pool_indices, test_indices: Vec::new() })
}

impl PoolPartition {
    pub fn n_rows(&self) -> usize {
        self.initial_indices.len() + self.pool_indices.len() + self.test_indices.len()
    }

    /// Moves every pool row still present to the test set.
    pub fn close(&mut self) {
        self.test_indices.append(&mut self.pool_indices);
        self.test_indices.sort_unstable();
    }
}
