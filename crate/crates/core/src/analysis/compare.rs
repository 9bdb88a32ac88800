use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::corpus::{FeatureGroup, FeatureMatrix, ScoreTable, Task};
use crate::distance::{Component, PairDistances};
use crate::encoding::{attach_distances, encode, select_group, Encoding, EncodingError, PairDataset};
use crate::exec::Executor;
use crate::learn::{assign_folds, cross_validate_with, EvalReport, ModelConfig, SplitConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model: ModelConfig,
    pub split: SplitConfig,
    pub rows: usize,
    pub feature_columns: usize,
    pub features: EvalReport,
    /// Same learner on the syntactic-distance column alone.
    pub baseline: EvalReport,
    /// Baseline RMSE over feature-model RMSE.
    pub ratio: f64,
}

impl ComparisonReport {
    pub fn feature_rmse(&self) -> f64 {
        self.features.mean_rmse
    }

    pub fn baseline_rmse(&self) -> f64 {
        self.baseline.mean_rmse
    }
}

fn task_table(scores: &ScoreTable, task: Task) -> Result<ScoreTable, AnalysisError> {
    let table = scores.for_task(task);
    if table.is_empty() {
        return Err(AnalysisError::UnknownTask(task));
    }
    Ok(table)
}

/// Cross-validated RMSE of the encoded features against the syntactic
/// distance baseline, over one shared fold assignment.
#[allow(clippy::too_many_arguments)]
pub fn baseline_compare<E: Executor>(
    scores: &ScoreTable,
    matrix: &FeatureMatrix,
    distances: &PairDistances,
    task: Task,
    encoding: Encoding,
    config: &ModelConfig,
    split: &SplitConfig,
    exec: &E,
) -> Result<ComparisonReport, AnalysisError> {
    let dataset = encode(encoding, matrix, &task_table(scores, task)?)?;
    compare_datasets(&dataset, distances, config, split, exec)
}

/// [`baseline_compare`] on an already encoded dataset. Only its feature
/// columns enter the feature arm.
pub fn compare_datasets<E: Executor>(
    dataset: &PairDataset,
    distances: &PairDistances,
    config: &ModelConfig,
    split: &SplitConfig,
    exec: &E,
) -> Result<ComparisonReport, AnalysisError> {
    let features = dataset.select_columns(&dataset.feature_columns());
    let with_distance = attach_distances(&dataset.pairs_only(), distances, &[Component::Syntactic])?;
    let folds = assign_folds(&features, split)?;
    let feature_eval = cross_validate_with(&features, config, &folds, exec)?;
    let baseline_eval = cross_validate_with(&with_distance, config, &folds, exec)?;
    if feature_eval.fold_hash != baseline_eval.fold_hash {
        return Err(AnalysisError::FoldMismatch {
            a: feature_eval.fold_hash,
            b: baseline_eval.fold_hash,
        });
    }
    Ok(ComparisonReport {
        model: config.clone(),
        split: *split,
        rows: features.n_rows(),
        feature_columns: features.n_cols(),
        ratio: baseline_eval.mean_rmse / feature_eval.mean_rmse,
        features: feature_eval,
        baseline: baseline_eval,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub group: FeatureGroup,
    pub columns: usize,
    /// `None` when the group contributes no columns.
    pub rmse: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub model: ModelConfig,
    pub split: SplitConfig,
    pub fold_hash: u64,
    pub full_rmse: f64,
    pub full_std: f64,
    /// Present groups by ascending RMSE, then absent groups.
    pub entries: Vec<AblationEntry>,
    pub winner: Option<FeatureGroup>,
}

/// Cross-validated RMSE of the model trained on each feature group alone.
pub fn group_ablation<E: Executor>(
    scores: &ScoreTable,
    matrix: &FeatureMatrix,
    task: Task,
    encoding: Encoding,
    config: &ModelConfig,
    split: &SplitConfig,
    exec: &E,
) -> Result<AblationReport, AnalysisError> {
    let dataset = encode(encoding, matrix, &task_table(scores, task)?)?;
    ablate_dataset(&dataset, config, split, exec)
}

/// [`group_ablation`] on an already encoded dataset.
pub fn ablate_dataset<E: Executor>(
    dataset: &PairDataset,
    config: &ModelConfig,
    split: &SplitConfig,
    exec: &E,
) -> Result<AblationReport, AnalysisError> {
    let features = dataset.select_columns(&dataset.feature_columns());
    let folds = assign_folds(&features, split)?;
    let full = cross_validate_with(&features, config, &folds, exec)?;
    let results = exec.map_indexed(FeatureGroup::ALL.len(), |g| -> Result<AblationEntry, AnalysisError> {
        let group = FeatureGroup::ALL[g];
        match select_group(&features, group) {
            Err(EncodingError::EmptyGroup(_)) => Ok(AblationEntry {
                group,
                columns: 0,
                rmse: None,
                std: None,
            }),
            Err(e) => Err(e.into()),
            Ok(sub) => {
                let eval = cross_validate_with(&sub, config, &folds, exec)?;
                Ok(AblationEntry {
                    group,
                    columns: sub.n_cols(),
                    rmse: Some(eval.mean_rmse),
                    std: Some(eval.std_rmse),
                })
            }
        }
    });
    let mut entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    entries.sort_by(|a, b| match (a.rmse, b.rmse) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => core::cmp::Ordering::Equal,
    });
    let winner = entries.first().filter(|e| e.rmse.is_some()).map(|e| e.group);
    Ok(AblationReport {
        model: config.clone(),
        split: *split,
        fold_hash: folds.hash(),
        full_rmse: full.mean_rmse,
        full_std: full.std_rmse,
        entries,
        winner,
    })
}

