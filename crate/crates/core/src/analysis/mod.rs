//! End-to-end analyses over a corpus: distance and cross-task correlations,
//! Kruskal-Wallis feature screening, group ablation, comparison against the
//! syntactic-distance baseline, source ranking and category rules.

mod compare;
mod correlate;
mod rank;
mod rules;
mod screen;

use alloc::string::String;

use thiserror::Error;

use crate::corpus::{LangCode, Task};
use crate::distance::DistanceError;
use crate::encoding::{EncodingError, Side};
use crate::learn::LearnError;
use crate::stats::StatsError;

pub use compare::{
    baseline_compare, compare_datasets, group_ablation, ablate_dataset, AblationEntry, AblationReport,
    ComparisonReport,
};
pub use correlate::{cross_task_correlation, distance_correlations, DistanceCorrelation, TaskCorrelation};
pub use rank::{leave_target_out, rank_empirical, rank_predicted, RankMode, RankedSource, SourceRanking};
pub use rules::{category_rules, CategoryStat, Direction, RuleReport};
pub use screen::{kw_feature_screen, FeatureScreenEntry, ScreenOptions, ScreenReport, SkippedFeature};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("no scores for task {0}")]
    UnknownTask(Task),
    #[error("need at least two tasks, got {0}")]
    TooFewTasks(usize),
    #[error("tasks {a} and {b} share no (source, target) pairs")]
    NoSharedPairs { a: Task, b: Task },
    #[error("no {task} records with target {target}")]
    UnknownTarget { task: Task, target: LangCode },
    #[error("no candidate sources for target {target}")]
    NoCandidates { target: LangCode },
    #[error("unknown feature {0}")]
    UnknownFeature(String),
    #[error("feature {feature}_{side} has {groups} usable category group(s); at least 2 are needed")]
    NotScreenable { feature: String, side: Side, groups: usize },
    #[error("the two arms used different fold assignments ({a:016x} vs {b:016x})")]
    FoldMismatch { a: u64, b: u64 },
}
