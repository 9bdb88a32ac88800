//! K-fold cross-validation.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{fit, FittedModel, LearnError, ModelConfig, ModelKind};
use crate::corpus::LangCode;
use crate::encoding::PairDataset;
use crate::exec::Executor;
use crate::rng::{fnv1a, stream};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Grouping {
    /// Rows are shuffled and dealt into folds.
    Random,
    /// All pairs sharing a target language land in the same fold.
    ByTarget,
}

impl Grouping {
    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::Random => "random",
            Grouping::ByTarget => "by-target",
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Grouping {
    type Err = LearnError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "random" => Ok(Grouping::Random),
            "by-target" | "target" => Ok(Grouping::ByTarget),
            _ => Err(LearnError::InvalidConfig(alloc::format!("unknown grouping {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub folds: usize,
    pub seed: u64,
    pub grouping: Grouping,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            folds: 5,
            seed: 0,
            grouping: Grouping::Random,
        }
    }
}

/// Fold index of every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    folds: usize,
    fold_of_row: Vec<usize>,
}

impl FoldAssignment {
    pub fn new(folds: usize, fold_of_row: Vec<usize>) -> Result<Self, LearnError> {
        let mut seen = alloc::vec![false; folds];
        for &f in &fold_of_row {
            if f >= folds {
                return Err(LearnError::InvalidConfig(alloc::format!("fold {f} out of range")));
            }
            seen[f] = true;
        }
        if folds < 2 || seen.iter().any(|s| !s) {
            return Err(LearnError::TooFewRows {
                rows: fold_of_row.len(),
                groups: fold_of_row.len(),
                folds,
            });
        }
        Ok(FoldAssignment { folds, fold_of_row })
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn fold_of_row(&self) -> &[usize] {
        &self.fold_of_row
    }

    /// Train and test row indices of fold `f`.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (r, &g) in self.fold_of_row.iter().enumerate() {
            if g == f {
                test.push(r)
            } else {
                train.push(r)
            }
        }
        (train, test)
    }

    /// Fingerprint of the assignment. Two evaluations used the same folds
    /// exactly when their hashes agree.
    pub fn hash(&self) -> u64 {
        fnv1a(core::iter::once(self.folds as u64).chain(self.fold_of_row.iter().map(|&f| f as u64)))
    }
}

/// Deals rows (or target-language groups) into folds after a seeded shuffle.
pub fn assign_folds(dataset: &PairDataset, split: &SplitConfig) -> Result<FoldAssignment, LearnError> {
    let n = dataset.n_rows();
    let k = split.folds;
    let mut rng = stream(split.seed, 0);
    let fold_of_row = match split.grouping {
        Grouping::Random => {
            if k < 2 || n < k {
                return Err(LearnError::TooFewRows { rows: n, groups: n, folds: k });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut fold = alloc::vec![0; n];
            for (pos, &r) in order.iter().enumerate() {
                fold[r] = pos % k;
            }
            fold
        }
        Grouping::ByTarget => {
            let mut targets: Vec<&LangCode> = dataset.pairs().iter().map(|p| &p.target).collect();
            targets.sort();
            targets.dedup();
            if k < 2 || targets.len() < k {
                return Err(LearnError::TooFewRows {
                    rows: n,
                    groups: targets.len(),
                    folds: k,
                });
            }
            targets.shuffle(&mut rng);
            let fold_of_target: BTreeMap<&LangCode, usize> =
                targets.iter().enumerate().map(|(i, t)| (*t, i % k)).collect();
            dataset.pairs().iter().map(|p| fold_of_target[&p.target]).collect()
        }
    };
    FoldAssignment::new(k, fold_of_row)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: ModelKind,
    pub folds: usize,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
    /// Sample standard deviation over folds.
    pub std_rmse: f64,
    pub fold_hash: u64,
    /// Out-of-fold prediction for every row.
    pub predictions: Vec<f64>,
}

/// Fits on k-1 folds and scores RMSE on the held-out one, for every fold.
pub fn cross_validate<E: Executor>(
    dataset: &PairDataset,
    config: &ModelConfig,
    split: &SplitConfig,
    exec: &E,
) -> Result<EvalReport, LearnError> {
    let folds = assign_folds(dataset, split)?;
    cross_validate_with(dataset, config, &folds, exec)
}

/// [`cross_validate`] over a given fold assignment.
pub fn cross_validate_with<E: Executor>(
    dataset: &PairDataset,
    config: &ModelConfig,
    folds: &FoldAssignment,
    exec: &E,
) -> Result<EvalReport, LearnError> {
    config.validate()?;
    if folds.fold_of_row.len() != dataset.n_rows() {
        return Err(LearnError::InvalidConfig(alloc::format!(
            "fold assignment covers {} rows, dataset has {}",
            folds.fold_of_row.len(),
            dataset.n_rows()
        )));
    }
    type FoldOutput = Result<(Vec<usize>, Vec<f64>), LearnError>;
    let results: Vec<FoldOutput> = exec.map_indexed(folds.folds, |f| {
        let (train, test) = folds.split(f);
        let model: FittedModel = fit(&dataset.select_rows(&train), config, exec)?;
        Ok((test.clone(), test.iter().map(|&r| model.predict_row(dataset.row(r))).collect()))
    });
    let mut predictions = alloc::vec![0.0; dataset.n_rows()];
    let mut fold_rmse = Vec::with_capacity(folds.folds);
    for res in results {
        let (test, preds) = res?;
        let actual: Vec<f64> = test.iter().map(|&r| dataset.target()[r]).collect();
        fold_rmse.push(stats::rmse(&preds, &actual).map_err(|e| LearnError::NumericalFailure(alloc::format!("{e}")))?);
        for (r, p) in test.into_iter().zip(preds) {
            predictions[r] = p;
        }
    }
    let mean_rmse = stats::mean(&fold_rmse);
    let std_rmse = stats::sample_std(&fold_rmse);
    Ok(EvalReport {
        model: config.kind,
        folds: folds.folds,
        fold_rmse,
        mean_rmse,
        std_rmse,
        fold_hash: folds.hash(),
        predictions,
    })
}
