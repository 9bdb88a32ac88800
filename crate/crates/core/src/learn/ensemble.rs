//! Random forests and gradient-boosted trees.

use alloc::vec::Vec;

use rand::Rng;

use super::tree::{grow, ColumnDraw, GrowParams, TreeData};
use super::{check_dataset, stable_mean, FittedModel, LearnError, ModelConfig, ModelParams, Tree};
use crate::encoding::PairDataset;
use crate::exec::Executor;
use crate::rng::stream;
use crate::stats;

fn grow_member(data: &TreeData<'_>, y: &[f64], config: &ModelConfig, index: usize) -> Tree {
    let seed = config.seed.unwrap_or(0);
    let mut rng = stream(seed, index as u64);
    let n = data.n_rows();
    let rows: Vec<usize> = if config.bootstrap {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let params = GrowParams {
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
    };
    let m = config.feature_subsample.columns(data.n_cols());
    grow(data, y, rows, &params, ColumnDraw::Random { m, rng: &mut rng })
}

/// Tree `index` of the forest `config` describes. Fitting the members one by
/// one and averaging gives the same model as [`fit_forest`].
pub fn fit_forest_member(dataset: &PairDataset, config: &ModelConfig, index: usize) -> Result<Tree, LearnError> {
    check_dataset(dataset, config)?;
    let data = TreeData::new(dataset);
    Ok(grow_member(&data, dataset.target(), config, index))
}

/// Bagged CART trees with per-split column sampling. Tree `i` draws all of
/// its randomness from stream `i` of the seed.
pub fn fit_forest<E: Executor>(dataset: &PairDataset, config: &ModelConfig, exec: &E) -> Result<FittedModel, LearnError> {
    check_dataset(dataset, config)?;
    let data = TreeData::new(dataset);
    let y = dataset.target();
    let trees = exec.map_indexed(config.n_trees, |i| grow_member(&data, y, config, i));
    Ok(FittedModel::new(config.clone(), dataset, ModelParams::Forest(trees)))
}

/// Squared-loss boosting: each stage fits a tree to the current residuals and
/// is added with the learning rate as shrinkage.
pub fn fit_gbm(dataset: &PairDataset, config: &ModelConfig) -> Result<FittedModel, LearnError> {
    check_dataset(dataset, config)?;
    let data = TreeData::new(dataset);
    let y = dataset.target();
    let n = y.len();
    let init = stable_mean(y.iter().copied());
    let mut fitted = alloc::vec![init; n];
    let mut residual = alloc::vec![0.0; n];
    let params = GrowParams {
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
    };
    let mut stages = Vec::with_capacity(config.n_trees);
    let mut stage_rmse = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        for i in 0..n {
            residual[i] = y[i] - fitted[i];
        }
        let tree = grow(&data, &residual, (0..n).collect(), &params, ColumnDraw::All);
        for (i, f) in fitted.iter_mut().enumerate() {
            *f += config.learning_rate * tree.predict_row(dataset.row(i));
        }
        stage_rmse.push(stats::rmse(&fitted, y).unwrap_or(0.0));
        stages.push(tree);
    }
    Ok(FittedModel::new(
        config.clone(),
        dataset,
        ModelParams::Gbm {
            init,
            learning_rate: config.learning_rate,
            stages,
            stage_rmse,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::learn::{fit_tree, FeatureSubsample, ModelKind};
    use alloc::vec;

    fn toy() -> PairDataset {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 3) as f64, i as f64 / 10.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 0.3 * r[0] - 0.5 * r[1] + (r[2] * 1.7) % 1.0).collect();
        PairDataset::from_numeric(&["a", "b", "c"], &rows, y).unwrap()
    }

    #[test]
    fn single_unbagged_full_forest_is_a_tree() {
        let d = toy();
        let mut c = ModelConfig::forest(5);
        c.n_trees = 1;
        c.bootstrap = false;
        c.min_samples_leaf = 1;
        c.feature_subsample = FeatureSubsample::Fraction(1.0);
        let f = fit_forest(&d, &c, &Sequential).unwrap();
        let t = fit_tree(&d, &ModelConfig::tree()).unwrap();
        assert_eq!(f.trees()[0], t.trees()[0]);
    }

    #[test]
    fn forest_is_member_mean_and_reproducible() {
        let d = toy();
        let mut c = ModelConfig::forest(9);
        c.n_trees = 12;
        let f = fit_forest(&d, &c, &Sequential).unwrap();
        assert_eq!(f, fit_forest(&d, &c, &Sequential).unwrap());
        let members: Vec<Tree> = (0..12).map(|i| fit_forest_member(&d, &c, i).unwrap()).collect();
        assert_eq!(f.trees(), &members[..]);
        let row = d.row(3);
        let mean = members.iter().map(|t| t.predict_row(row)).sum::<f64>() / 12.0;
        assert!((f.predict_row(row) - mean).abs() < 1e-12);
        c.seed = Some(10);
        assert_ne!(f, fit_forest(&d, &c, &Sequential).unwrap());
    }

    #[test]
    fn gbm_training_error_never_rises() {
        let d = toy();
        let mut c = ModelConfig::gbm(1);
        c.n_trees = 50;
        let m = fit_gbm(&d, &c).unwrap();
        assert_eq!(m.kind(), ModelKind::Gbm);
        let ModelParams::Gbm { stage_rmse, .. } = &m.params else { panic!() };
        for w in stage_rmse.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!((m.training_rmse - stage_rmse[49]).abs() < 1e-12);
    }
}
