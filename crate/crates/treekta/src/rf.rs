//! Random forest regressor: trees fit on bootstrap resamples, predictions
//! averaged. Each tree owns an RNG stream derived from (master_seed, tree
//! index), so results are identical no matter how fitting is scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::tree::{fit_tree, Tree, TreeConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<Tree>,
    bootstrap_seeds: Vec<u64>,
    config: TreeConfig,
    n_features: usize,
}

impl RandomForest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<RandomForest> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Fits `m_trees` trees, each on a bootstrap resample of size n drawn with
/// replacement from its own seeded stream.
pub fn fit_rf(
    data: &Dataset,
    m_trees: usize,
    config: &TreeConfig,
    master_seed: u64,
) -> Result<RandomForest> {
    if data.n() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: data.n(),
        });
    }
    if m_trees == 0 {
        return Err(Error::InvalidConfig("m_trees must be >= 1".into()));
    }
    config.validate(data.p())?;

    let seeds: Vec<u64> = (0..m_trees)
        .map(|m| derive_seed(master_seed, m as u64))
        .collect();

    let fit_one = |&seed: &u64| -> Result<Tree> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = data.n();
        let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        fit_tree(data, &sample, config, None, &mut rng)
    };

    #[cfg(feature = "parallel")]
    let trees: Result<Vec<Tree>> = seeds.par_iter().map(fit_one).collect();
    #[cfg(not(feature = "parallel"))]
    let trees: Result<Vec<Tree>> = seeds.iter().map(fit_one).collect();

    Ok(RandomForest {
        trees: trees?,
        bootstrap_seeds: seeds,
        config: config.clone(),
        n_features: data.p(),
    })
}

/// Arithmetic mean of the per-tree predictions.
pub fn predict_rf(forest: &RandomForest, x: &[f64]) -> f64 {
    let sum: f64 = forest.trees.iter().map(|t| t.predict(x)).sum();
    sum / forest.trees.len() as f64
}
