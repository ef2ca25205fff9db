//! Gradient boosted trees for squared-error loss with the extreme-gradient
//! regularized objective: L2 leaf-weight penalty `lambda` and per-leaf
//! complexity penalty `gamma`.
//!
//! With squared error the gradients are `pred - y` and all hessians are 1,
//! so node statistics reduce to (gradient sum, row count). Split gain is
//! 0.5*(G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)) - gamma and
//! leaf weights are -G/(H+lambda); stored weights are raw, the learning rate
//! is applied at prediction time.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::derive_seed;
use crate::tree::{grow_tree, SplitObjective, Tree, TreeConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
    pub min_node_size: usize,
    pub reg_lambda: f64,
    pub reg_gamma: f64,
    /// Fraction of rows drawn (without replacement) per round; 1.0 disables.
    pub subsample: f64,
    /// Fraction of features available per node; 1.0 disables.
    pub colsample: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            learning_rate: 0.3,
            max_depth: Some(6),
            min_node_size: 1,
            reg_lambda: 1.0,
            reg_gamma: 0.0,
            subsample: 1.0,
            colsample: 1.0,
        }
    }
}

impl GbtParams {
    fn validate(&self, p: usize) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.reg_lambda >= 0.0) || !(self.reg_gamma >= 0.0) {
            return Err(Error::InvalidConfig(
                "reg_lambda and reg_gamma must be >= 0".into(),
            ));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0)
            || !(self.colsample > 0.0 && self.colsample <= 1.0)
        {
            return Err(Error::InvalidConfig(
                "subsample and colsample must be in (0, 1]".into(),
            ));
        }
        if p == 0 {
            return Err(Error::NoFeatures);
        }
        Ok(())
    }

    fn tree_config(&self, p: usize) -> TreeConfig {
        let mtry = ((self.colsample * p as f64).ceil() as usize).clamp(1, p);
        TreeConfig {
            max_depth: self.max_depth,
            min_node_size: self.min_node_size,
            mtry,
            min_split_gain: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    trees: Vec<Tree>,
    learning_rate: f64,
    base_score: f64,
    reg_lambda: f64,
    reg_gamma: f64,
}

impl GbtModel {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_rounds(&self) -> usize {
        self.trees.len()
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<GbtModel> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Boosts `m_rounds` trees against the residual gradients of the running
/// prediction, starting from base_score = mean(Y).
pub fn fit_gbt(
    data: &Dataset,
    m_rounds: usize,
    params: &GbtParams,
    master_seed: u64,
) -> Result<GbtModel> {
    if data.n() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: data.n(),
        });
    }
    if m_rounds == 0 {
        return Err(Error::InvalidConfig("m_rounds must be >= 1".into()));
    }
    params.validate(data.p())?;

    let n = data.n();
    let base_score = data.y().iter().sum::<f64>() / n as f64;
    let mut preds = vec![base_score; n];
    let mut gradients = vec![0.0; n];
    let config = params.tree_config(data.p());
    let objective = SplitObjective::RegularizedGain {
        lambda: params.reg_lambda,
        gamma: params.reg_gamma,
    };

    let mut trees = Vec::with_capacity(m_rounds);
    for round in 0..m_rounds {
        for i in 0..n {
            gradients[i] = preds[i] - data.y()[i];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, round as u64));
        let rows: Vec<usize> = if params.subsample < 1.0 {
            let take = ((params.subsample * n as f64).round() as usize).clamp(1, n);
            rand::seq::index::sample(&mut rng, n, take).into_vec()
        } else {
            (0..n).collect()
        };
        let tree = grow_tree(data, &rows, &gradients, &config, objective, &mut rng)?;
        for i in 0..n {
            preds[i] += params.learning_rate * tree.predict(data.row(i));
        }
        trees.push(tree);
    }

    Ok(GbtModel {
        trees,
        learning_rate: params.learning_rate,
        base_score,
        reg_lambda: params.reg_lambda,
        reg_gamma: params.reg_gamma,
    })
}

/// base_score plus the learning-rate-scaled sum of leaf weights along each
/// tree's descent path.
pub fn predict_gbt(model: &GbtModel, x: &[f64]) -> f64 {
    let sum: f64 = model.trees.iter().map(|t| t.predict(x)).sum();
    model.base_score + model.learning_rate * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Mat;
    use crate::simgen::{generate, ScenarioFamily, ScenarioSpec};
    use crate::tree::Node;

    fn dataset_1d(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::new(Mat::from_vec(x.len(), 1, x.to_vec()).unwrap(), y.to_vec()).unwrap()
    }

    fn sse(model: &GbtModel, data: &Dataset) -> f64 {
        (0..data.n())
            .map(|i| (predict_gbt(model, data.row(i)) - data.y()[i]).powi(2))
            .sum()
    }

    #[test]
    fn constant_target_gives_zero_weights() {
        let data = dataset_1d(&[1.0, 2.0, 3.0, 4.0], &[5.0, 5.0, 5.0, 5.0]);
        let model = fit_gbt(&data, 5, &GbtParams::default(), 1).unwrap();
        for tree in model.trees() {
            for node in tree.nodes() {
                if let Node::Leaf { value, .. } = node {
                    assert_eq!(*value, 0.0);
                }
            }
        }
        assert_eq!(predict_gbt(&model, &[2.5]), 5.0);
    }

    #[test]
    fn one_round_leaf_weights_match_hand_computation() {
        // base = 0.5, gradients (0.5, 0.5, -0.5, -0.5); split at 2.5 gives
        // G_L = 1, G_R = -1, so with lambda = 0 the weights are -0.5 and 0.5
        // and eta = 1 fits exactly.
        let data = dataset_1d(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 1.0, 1.0]);
        let params = GbtParams {
            learning_rate: 1.0,
            max_depth: Some(1),
            reg_lambda: 0.0,
            ..GbtParams::default()
        };
        let model = fit_gbt(&data, 1, &params, 0).unwrap();
        assert_eq!(model.base_score(), 0.5);
        let tree = &model.trees()[0];
        let mut leaf_values: Vec<f64> = tree
            .nodes()
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { value, .. } => Some(*value),
                _ => None,
            })
            .collect();
        leaf_values.sort_by(f64::total_cmp);
        assert_eq!(leaf_values, vec![-0.5, 0.5]);
        for i in 0..4 {
            assert!((predict_gbt(&model, data.row(i)) - data.y()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_lambda_shrinks_to_base_score() {
        let data = dataset_1d(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 1.0, 1.0]);
        let params = GbtParams {
            reg_lambda: 1e15,
            ..GbtParams::default()
        };
        let model = fit_gbt(&data, 3, &params, 0).unwrap();
        for tree in model.trees() {
            for node in tree.nodes() {
                if let Node::Leaf { value, .. } = node {
                    assert!(value.abs() < 1e-12);
                }
            }
        }
        assert!((predict_gbt(&model, &[1.0]) - model.base_score()).abs() < 1e-10);
    }

    #[test]
    fn training_loss_non_increasing() {
        let spec = ScenarioSpec::new(ScenarioFamily::Friedman, 120, 8, 3);
        let data = generate(&spec).unwrap();
        let params = GbtParams {
            reg_gamma: 0.0,
            ..GbtParams::default()
        };
        let mut last = f64::INFINITY;
        for rounds in [1, 2, 5, 10, 25] {
            let model = fit_gbt(&data, rounds, &params, 42).unwrap();
            let loss = sse(&model, &data);
            assert!(
                loss <= last + 1e-9,
                "loss rose from {} to {} at {} rounds",
                last,
                loss,
                rounds
            );
            last = loss;
        }
    }

    #[test]
    fn interpolates_after_one_round_without_regularization() {
        let spec = ScenarioSpec::new(ScenarioFamily::Meier2, 40, 5, 9);
        let data = generate(&spec).unwrap();
        let params = GbtParams {
            learning_rate: 1.0,
            max_depth: None,
            min_node_size: 1,
            reg_lambda: 0.0,
            reg_gamma: 0.0,
            ..GbtParams::default()
        };
        let model = fit_gbt(&data, 1, &params, 0).unwrap();
        for i in 0..data.n() {
            assert!(
                (predict_gbt(&model, data.row(i)) - data.y()[i]).abs() < 1e-9,
                "row {}",
                i
            );
        }
    }

    #[test]
    fn prediction_is_base_plus_scaled_tree_sum() {
        let spec = ScenarioSpec::new(ScenarioFamily::Friedman, 60, 6, 31);
        let data = generate(&spec).unwrap();
        let model = fit_gbt(&data, 7, &GbtParams::default(), 4).unwrap();
        let x = data.row(11);
        let explicit = model.base_score()
            + model.learning_rate() * model.trees().iter().map(|t| t.predict(x)).sum::<f64>();
        assert!((predict_gbt(&model, x) - explicit).abs() < 1e-12);
    }

    #[test]
    fn single_leaf_round_applies_learning_rate() {
        // one tree with a single leaf weight w predicts base + eta*w
        let data = dataset_1d(&[1.0, 2.0], &[0.0, 1.0]);
        let params = GbtParams {
            learning_rate: 0.3,
            max_depth: Some(0), // no splits allowed
            reg_lambda: 0.0,
            ..GbtParams::default()
        };
        let model = fit_gbt(&data, 1, &params, 0).unwrap();
        let w = match model.trees()[0].nodes() {
            [Node::Leaf { value, .. }] => *value,
            other => panic!("expected single leaf, got {:?}", other),
        };
        assert!((predict_gbt(&model, &[1.0]) - (model.base_score() + 0.3 * w)).abs() < 1e-15);
    }

    #[test]
    fn rejects_insufficient_data() {
        let data = dataset_1d(&[1.0], &[1.0]);
        assert!(matches!(
            fit_gbt(&data, 2, &GbtParams::default(), 0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn determinism_with_subsampling() {
        let spec = ScenarioSpec::new(ScenarioFamily::Friedman, 80, 6, 13);
        let data = generate(&spec).unwrap();
        let params = GbtParams {
            subsample: 0.7,
            colsample: 0.8,
            ..GbtParams::default()
        };
        let a = fit_gbt(&data, 6, &params, 5).unwrap();
        let b = fit_gbt(&data, 6, &params, 5).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
