use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::corpus::{FeatureMatrix, LangCode, ScoreTable, Task};
use crate::distance::PairDistances;
use crate::encoding::{encode_rows, PairDataset, PairKey};
use crate::learn::FittedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankMode {
    /// Observed accuracies.
    Empirical,
    /// Accuracies predicted by a fitted model.
    Predicted,
}

impl fmt::Display for RankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankMode::Empirical => "empirical",
            RankMode::Predicted => "predicted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSource {
    pub source: LangCode,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRanking {
    pub task: Task,
    pub target: LangCode,
    pub mode: RankMode,
    /// Best first, at most `k` entries.
    pub ranked: Vec<RankedSource>,
    /// Candidates considered before truncation.
    pub candidates: usize,
    /// Observed in-language accuracy, never part of the ranking.
    pub supervised: Option<f64>,
}

fn sort_and_cut(mut list: Vec<RankedSource>, k: usize) -> (Vec<RankedSource>, usize) {
    list.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then_with(|| a.source.cmp(&b.source)));
    let n = list.len();
    list.truncate(k);
    (list, n)
}

/// Sources for `target` by observed accuracy, best first, ties by source
/// code.
pub fn rank_empirical(scores: &ScoreTable, task: Task, target: &LangCode, k: usize) -> Result<SourceRanking, AnalysisError> {
    let records: Vec<_> = scores
        .records()
        .iter()
        .filter(|r| r.task == task && &r.target == target)
        .collect();
    if records.is_empty() {
        return Err(AnalysisError::UnknownTarget {
            task,
            target: target.clone(),
        });
    }
    let supervised = records.iter().find(|r| r.is_supervised()).map(|r| r.accuracy);
    let list: Vec<RankedSource> = records
        .iter()
        .filter(|r| !r.is_supervised())
        .map(|r| RankedSource {
            source: r.source.clone(),
            accuracy: r.accuracy,
        })
        .collect();
    if list.is_empty() {
        return Err(AnalysisError::NoCandidates { target: target.clone() });
    }
    let (ranked, candidates) = sort_and_cut(list, k);
    Ok(SourceRanking {
        task,
        target: target.clone(),
        mode: RankMode::Empirical,
        ranked,
        candidates,
        supervised,
    })
}

/// Sources for `target` by model prediction. `candidates` other than the
/// target are encoded against the model's columns and scored; the
/// supervised accuracy is looked up in `scores` when given.
#[allow(clippy::too_many_arguments)]
pub fn rank_predicted(
    model: &FittedModel,
    matrix: &FeatureMatrix,
    distances: Option<&PairDistances>,
    scores: Option<&ScoreTable>,
    task: Task,
    target: &LangCode,
    candidates: &[LangCode],
    k: usize,
) -> Result<SourceRanking, AnalysisError> {
    if matrix.language_index(target).is_none() {
        return Err(AnalysisError::UnknownTarget {
            task,
            target: target.clone(),
        });
    }
    let mut sources: Vec<&LangCode> = candidates.iter().filter(|c| *c != target).collect();
    sources.sort();
    sources.dedup();
    if sources.is_empty() {
        return Err(AnalysisError::NoCandidates { target: target.clone() });
    }
    let pairs: Vec<PairKey> = sources
        .iter()
        .map(|s| PairKey {
            task,
            source: (*s).clone(),
            target: target.clone(),
        })
        .collect();
    let design = encode_rows(matrix, &pairs, &model.columns, distances)?;
    let p = model.columns.len();
    let list: Vec<RankedSource> = pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| RankedSource {
            source: pair.source.clone(),
            accuracy: model.predict_row(&design[i * p..(i + 1) * p]),
        })
        .collect();
    let (ranked, n) = sort_and_cut(list, k);
    Ok(SourceRanking {
        task,
        target: target.clone(),
        mode: RankMode::Predicted,
        ranked,
        candidates: n,
        supervised: scores.and_then(|s| s.get(task, target, target)).map(|r| r.accuracy),
    })
}

/// Rows whose pair does not involve `language` on either side.
pub fn leave_target_out(dataset: &PairDataset, language: &LangCode) -> PairDataset {
    let keep: Vec<usize> = dataset
        .pairs()
        .iter()
        .enumerate()
        .filter(|(_, p)| &p.source != language && &p.target != language)
        .map(|(i, _)| i)
        .collect();
    dataset.select_rows(&keep)
}
