//! Interpretable regressors for transfer accuracy: ridge-damped linear
//! regression, CART regression trees, random forests and squared-loss
//! gradient boosting, with cross-validation and three importance estimators.
//!
//! Everything is deterministic given the inputs, the config and its seed,
//! whatever [`Executor`] runs the independent units.

mod ensemble;
mod eval;
mod importance;
mod linear;
mod tree;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{ColumnSpec, PairDataset};
use crate::exec::Executor;
use crate::stats;

pub use ensemble::{fit_forest, fit_forest_member, fit_gbm};
pub use eval::{assign_folds, cross_validate, cross_validate_with, EvalReport, FoldAssignment, Grouping, SplitConfig};
pub use importance::{
    coefficient_importance, impurity_importance, permutation_importance, ImportanceMethod, ImportanceReport,
    Normalization,
};
pub use linear::fit_linear;
pub use tree::{best_split, fit_tree, Node, SplitCandidate, Tree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("column mismatch: model expects {expected} columns, dataset differs at position {position}")]
    ColumnMismatch { expected: usize, position: usize },
    #[error("operation needs a {expected} model, got {found}")]
    WrongModelKind { expected: &'static str, found: ModelKind },
    #[error("cannot split {rows} rows ({groups} groups) into {folds} folds")]
    TooFewRows { rows: usize, groups: usize, folds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Linear,
    Tree,
    Forest,
    Gbm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Gbm => "gbm",
        }
    }

    pub fn is_tree_based(self) -> bool {
        !matches!(self, ModelKind::Linear)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = LearnError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "tree" | "cart" => Ok(ModelKind::Tree),
            "forest" | "random-forest" | "rf" => Ok(ModelKind::Forest),
            "gbm" | "boosting" | "xgboost" => Ok(ModelKind::Gbm),
            _ => Err(LearnError::InvalidConfig(format!("unknown model kind {s:?}"))),
        }
    }
}

/// Columns examined per split in a forest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureSubsample {
    /// `max(1, p / 3)` columns.
    Third,
    /// `ceil(f * p)` columns, `f` in (0, 1].
    Fraction(f64),
}

impl FeatureSubsample {
    pub fn columns(self, p: usize) -> usize {
        let m = match self {
            FeatureSubsample::Third => p / 3,
            FeatureSubsample::Fraction(f) => libm::ceil(f * p as f64) as usize,
        };
        m.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub n_trees: usize,
    pub feature_subsample: FeatureSubsample,
    pub bootstrap: bool,
    pub learning_rate: f64,
    pub ridge_damping: f64,
    pub seed: Option<u64>,
}

impl ModelConfig {
    pub fn linear() -> Self {
        ModelConfig {
            kind: ModelKind::Linear,
            max_depth: None,
            min_samples_leaf: 1,
            n_trees: 1,
            feature_subsample: FeatureSubsample::Fraction(1.0),
            bootstrap: false,
            learning_rate: 1.0,
            ridge_damping: 1e-8,
            seed: None,
        }
    }

    pub fn tree() -> Self {
        ModelConfig {
            kind: ModelKind::Tree,
            ..Self::linear()
        }
    }

    /// 300 bootstrapped trees, a third of the columns per split, leaves of 2+.
    pub fn forest(seed: u64) -> Self {
        ModelConfig {
            kind: ModelKind::Forest,
            max_depth: None,
            min_samples_leaf: 2,
            n_trees: 300,
            feature_subsample: FeatureSubsample::Third,
            bootstrap: true,
            seed: Some(seed),
            ..Self::linear()
        }
    }

    /// 200 depth-3 stages at rate 0.1.
    pub fn gbm(seed: u64) -> Self {
        ModelConfig {
            kind: ModelKind::Gbm,
            max_depth: Some(3),
            min_samples_leaf: 1,
            n_trees: 200,
            learning_rate: 0.1,
            seed: Some(seed),
            ..Self::linear()
        }
    }

    pub fn default_for(kind: ModelKind, seed: u64) -> Self {
        match kind {
            ModelKind::Linear => Self::linear(),
            ModelKind::Tree => Self::tree(),
            ModelKind::Forest => Self::forest(seed),
            ModelKind::Gbm => Self::gbm(seed),
        }
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |msg: String| Err(LearnError::InvalidConfig(msg));
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be positive".into());
        }
        if matches!(self.kind, ModelKind::Forest | ModelKind::Gbm) {
            if self.n_trees == 0 {
                return bad("n_trees must be positive".into());
            }
            if self.seed.is_none() {
                return bad(format!("{} models need a seed", self.kind));
            }
        }
        if let FeatureSubsample::Fraction(f) = self.feature_subsample {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("feature_subsample {f} not in (0, 1]"));
            }
        }
        if self.kind == ModelKind::Gbm && !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if !(self.ridge_damping >= 0.0 && self.ridge_damping.is_finite()) {
            return bad(format!("ridge_damping {} must be nonnegative", self.ridge_damping));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Linear { intercept: f64, coefficients: Vec<f64> },
    Tree(Tree),
    Forest(Vec<Tree>),
    Gbm {
        init: f64,
        learning_rate: f64,
        stages: Vec<Tree>,
        /// Training RMSE after each stage.
        stage_rmse: Vec<f64>,
    },
}

/// A trained regressor bound to the column layout it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub config: ModelConfig,
    pub columns: Vec<ColumnSpec>,
    pub params: ModelParams,
    /// In-sample RMSE.
    pub training_rmse: f64,
}

impl FittedModel {
    fn new(config: ModelConfig, dataset: &PairDataset, params: ModelParams) -> Self {
        let mut model = FittedModel {
            config,
            columns: dataset.columns().to_vec(),
            params,
            training_rmse: 0.0,
        };
        let preds: Vec<f64> = (0..dataset.n_rows()).map(|r| model.predict_row(dataset.row(r))).collect();
        model.training_rmse = stats::rmse(&preds, dataset.target()).unwrap_or(0.0);
        model
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    /// Raw prediction for one encoded row laid out as [`Self::columns`].
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Linear {
                intercept,
                coefficients,
            } => intercept + coefficients.iter().zip(row).map(|(c, x)| c * x).sum::<f64>(),
            ModelParams::Tree(t) => t.predict_row(row),
            ModelParams::Forest(trees) => stable_mean(trees.iter().map(|t| t.predict_row(row))),
            ModelParams::Gbm {
                init,
                learning_rate,
                stages,
                ..
            } => {
                let mut acc = *init;
                for t in stages {
                    acc += learning_rate * t.predict_row(row);
                }
                acc
            }
        }
    }

    /// Trees of a tree-based model.
    pub fn trees(&self) -> &[Tree] {
        match &self.params {
            ModelParams::Linear { .. } => &[],
            ModelParams::Tree(t) => core::slice::from_ref(t),
            ModelParams::Forest(ts) => ts,
            ModelParams::Gbm { stages, .. } => stages,
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(ColumnSpec::name).collect()
    }

    pub fn check_columns(&self, dataset: &PairDataset) -> Result<(), LearnError> {
        let mismatch = |position| LearnError::ColumnMismatch {
            expected: self.columns.len(),
            position,
        };
        for (i, spec) in self.columns.iter().enumerate() {
            match dataset.columns().get(i) {
                Some(c) if c.name() == spec.name() => {}
                _ => return Err(mismatch(i)),
            }
        }
        if dataset.n_cols() != self.columns.len() {
            return Err(mismatch(self.columns.len()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PredictOptions {
    /// Clamp outputs to [0, 1].
    pub clamp: bool,
}

/// One prediction per row. The dataset must have exactly the model's columns
/// in the model's order.
pub fn predict(model: &FittedModel, dataset: &PairDataset, options: PredictOptions) -> Result<Vec<f64>, LearnError> {
    model.check_columns(dataset)?;
    Ok((0..dataset.n_rows())
        .map(|r| {
            let v = model.predict_row(dataset.row(r));
            if options.clamp {
                v.clamp(0.0, 1.0)
            } else {
                v
            }
        })
        .collect())
}

/// Fits the model `config.kind` describes.
pub fn fit<E: Executor>(dataset: &PairDataset, config: &ModelConfig, exec: &E) -> Result<FittedModel, LearnError> {
    match config.kind {
        ModelKind::Linear => fit_linear(dataset, config),
        ModelKind::Tree => fit_tree(dataset, config),
        ModelKind::Forest => fit_forest(dataset, config, exec),
        ModelKind::Gbm => fit_gbm(dataset, config),
    }
}

/// Mean that is exact for constant inputs.
pub(crate) fn stable_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else { return 0.0 };
    let mut n = 1usize;
    let mut acc = 0.0;
    for v in it {
        acc += v - first;
        n += 1;
    }
    first + acc / n as f64
}

fn check_dataset(dataset: &PairDataset, config: &ModelConfig) -> Result<(), LearnError> {
    config.validate()?;
    if dataset.n_rows() == 0 {
        return Err(LearnError::EmptyDataset);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::vec;

    fn xy() -> PairDataset {
        PairDataset::from_numeric(&["x"], &[vec![0.0], vec![1.0], vec![0.0], vec![1.0]], vec![0.0, 10.0, 0.0, 10.0])
            .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::forest(1).validate().is_ok());
        let mut c = ModelConfig::forest(1);
        c.seed = None;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::gbm(1);
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::tree();
        c.min_samples_leaf = 0;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::forest(1);
        c.feature_subsample = FeatureSubsample::Fraction(1.5);
        assert!(c.validate().is_err());
    }

    #[test]
    fn subsample_counts() {
        assert_eq!(FeatureSubsample::Third.columns(600), 200);
        assert_eq!(FeatureSubsample::Third.columns(2), 1);
        assert_eq!(FeatureSubsample::Fraction(1.0).columns(7), 7);
        assert_eq!(FeatureSubsample::Fraction(0.5).columns(7), 4);
    }

    #[test]
    fn predict_checks_columns_and_clamps() {
        let d = xy();
        let model = fit(&d, &ModelConfig::tree(), &Sequential).unwrap();
        assert_eq!(predict(&model, &d, PredictOptions::default()).unwrap(), d.target());
        let other = PairDataset::from_numeric(&["y"], &[vec![0.0]], vec![0.0]).unwrap();
        assert!(matches!(
            predict(&model, &other, PredictOptions::default()),
            Err(LearnError::ColumnMismatch { .. })
        ));
        let two = PairDataset::from_numeric(&["a", "b"], &[vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let m2 = fit(&two, &ModelConfig::linear(), &Sequential).unwrap();
        let swapped = two.select_columns(&[1, 0]);
        assert!(predict(&m2, &swapped, PredictOptions::default()).is_err());
        let clamped = predict(&model, &d, PredictOptions { clamp: true }).unwrap();
        assert!(clamped.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(clamped[1], 1.0);
    }

    #[test]
    fn stable_mean_is_exact_for_constants() {
        let v = [0.1; 7];
        assert_eq!(stable_mean(v.iter().copied()), 0.1);
    }
}
