use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::screen::category_groups;
use super::{AnalysisError, ScreenOptions};
use crate::corpus::{FeatureMatrix, LangCode, LanguageRegistry, ScoreTable, Task};
use crate::encoding::Side;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Low,
    High,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Low => "low",
            Direction::High => "high",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStat {
    pub category: u32,
    pub label: String,
    pub mean: f64,
    pub size: usize,
    /// Distinct languages on the inspected side, sorted by code.
    pub members: Vec<LangCode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub task: Task,
    pub feature_id: String,
    pub feature_name: String,
    pub side: Side,
    pub direction: Direction,
    /// Categories in catalog order.
    pub categories: Vec<CategoryStat>,
    /// Index into `categories` of the extreme group.
    pub flagged: usize,
    pub overall_mean: f64,
    pub sentence: String,
}

impl RuleReport {
    pub fn flagged(&self) -> &CategoryStat {
        &self.categories[self.flagged]
    }
}

/// Mean accuracy per category of one feature and the category with the
/// lowest (or highest) mean, rendered as a sentence. Groups follow the same
/// rules as [`super::kw_feature_screen`]; language names come from
/// `registry` when given.
#[allow(clippy::too_many_arguments)]
pub fn category_rules(
    feature_id: &str,
    side: Side,
    task: Task,
    scores: &ScoreTable,
    matrix: &FeatureMatrix,
    direction: Direction,
    options: &ScreenOptions,
    registry: Option<&LanguageRegistry>,
) -> Result<RuleReport, AnalysisError> {
    let fi = matrix
        .feature_index(feature_id)
        .ok_or_else(|| AnalysisError::UnknownFeature(feature_id.into()))?;
    let feature = &matrix.features()[fi];
    let groups = category_groups(scores, matrix, task, fi, side, false);
    let mut categories = Vec::new();
    let mut all = Vec::new();
    for (cat, members) in &groups {
        let Some(cat) = cat else { continue };
        if members.len() < options.min_group_size {
            continue;
        }
        let acc: Vec<f64> = members.iter().map(|(_, a)| *a).collect();
        all.extend_from_slice(&acc);
        let mut langs: Vec<LangCode> = members.iter().map(|(l, _)| (*l).clone()).collect();
        langs.sort();
        langs.dedup();
        categories.push(CategoryStat {
            category: *cat,
            label: feature.label(*cat).map(String::from).unwrap_or_else(|| format!("category {cat}")),
            mean: stats::mean(&acc),
            size: acc.len(),
            members: langs,
        });
    }
    if categories.len() < 2 {
        return Err(AnalysisError::NotScreenable {
            feature: feature_id.into(),
            side,
            groups: categories.len(),
        });
    }
    let mut flagged = 0;
    for (i, c) in categories.iter().enumerate() {
        let better = match direction {
            Direction::Low => c.mean < categories[flagged].mean,
            Direction::High => c.mean > categories[flagged].mean,
        };
        if better {
            flagged = i;
        }
    }
    let overall_mean = stats::mean(&all);
    let f = &categories[flagged];
    let names: Vec<String> = f
        .members
        .iter()
        .map(|code| {
            registry
                .and_then(|r| r.get(code))
                .map(|l| l.name.clone())
                .unwrap_or_else(|| code.as_str().into())
        })
        .collect();
    let role = match side {
        Side::Train => "Source",
        Side::Test => "Target",
    };
    let sentence = format!(
        "{role} languages with {} ({}) = {} ({}) yield {} {} accuracy: mean {:.6} over {} pairs vs {:.6} overall.",
        feature.id,
        feature.name,
        f.label,
        names.join(", "),
        match direction {
            Direction::Low => "lower",
            Direction::High => "higher",
        },
        task,
        f.mean,
        f.size,
        overall_mean,
    );
    Ok(RuleReport {
        task,
        feature_id: feature.id.clone(),
        feature_name: feature.name.clone(),
        side,
        direction,
        categories,
        flagged,
        overall_mean,
        sentence,
    })
}
