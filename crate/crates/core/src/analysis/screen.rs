use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::corpus::{FeatureMatrix, LangCode, ScoreTable, Task};
use crate::encoding::Side;
use crate::exec::Executor;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenOptions {
    /// Category groups smaller than this are dropped before testing.
    pub min_group_size: usize,
    /// Treat a missing value as its own category.
    pub include_missing: bool,
    /// Multiply p by the number of tested features (capped at 1).
    pub bonferroni: bool,
    /// Monte-Carlo resamples for an additional permutation p-value.
    pub permutations: Option<usize>,
    pub seed: u64,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        ScreenOptions {
            min_group_size: 3,
            include_missing: false,
            bonferroni: false,
            permutations: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScreenEntry {
    /// Feature id with side suffix, e.g. `90A_train`.
    pub name: String,
    pub feature_id: String,
    pub h: f64,
    pub df: u32,
    /// Chi-squared p-value, Bonferroni-adjusted when requested.
    pub p: f64,
    pub p_raw: f64,
    pub p_permutation: Option<f64>,
    pub groups: usize,
    pub observations: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFeature {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub task: Task,
    pub side: Side,
    pub options: ScreenOptions,
    pub entries: Vec<FeatureScreenEntry>,
    pub skipped: Vec<SkippedFeature>,
}

/// Accuracies of the task's records grouped by the category that the `side`
/// language has for feature `fi`. Records whose language is not in the
/// matrix count as missing.
pub(crate) fn category_groups<'a>(
    scores: &'a ScoreTable,
    matrix: &FeatureMatrix,
    task: Task,
    fi: usize,
    side: Side,
    include_missing: bool,
) -> BTreeMap<Option<u32>, Vec<(&'a LangCode, f64)>> {
    let mut groups: BTreeMap<Option<u32>, Vec<(&LangCode, f64)>> = BTreeMap::new();
    for rec in scores.records().iter().filter(|r| r.task == task) {
        let lang = match side {
            Side::Train => &rec.source,
            Side::Test => &rec.target,
        };
        let cat = matrix.language_index(lang).and_then(|li| matrix.get(li, fi));
        if cat.is_none() && !include_missing {
            continue;
        }
        groups.entry(cat).or_default().push((lang, rec.accuracy));
    }
    groups
}

enum Outcome {
    Tested(FeatureScreenEntry),
    Skipped(SkippedFeature),
}

/// Kruskal-Wallis test of every feature: do the task's accuracies differ
/// across the categories of the `side` language? Entries are sorted by
/// ascending p, then descending H, then name.
pub fn kw_feature_screen<E: Executor>(
    scores: &ScoreTable,
    matrix: &FeatureMatrix,
    task: Task,
    side: Side,
    options: &ScreenOptions,
    exec: &E,
) -> Result<ScreenReport, AnalysisError> {
    if !scores.records().iter().any(|r| r.task == task) {
        return Err(AnalysisError::UnknownTask(task));
    }
    let outcomes = exec.map_indexed(matrix.features().len(), |fi| {
        let feature = &matrix.features()[fi];
        let name = format!("{}_{}", feature.id, side);
        let groups = category_groups(scores, matrix, task, fi, side, options.include_missing);
        let kept: Vec<Vec<f64>> = groups
            .values()
            .filter(|g| g.len() >= options.min_group_size)
            .map(|g| g.iter().map(|(_, a)| *a).collect())
            .collect();
        if kept.len() < 2 {
            let reason = format!(
                "{} category group(s) with at least {} records",
                kept.len(),
                options.min_group_size
            );
            return Outcome::Skipped(SkippedFeature { name, reason });
        }
        let kw = match stats::kruskal_wallis(&kept) {
            Ok(kw) => kw,
            Err(e) => return Outcome::Skipped(SkippedFeature { name, reason: format!("{e}") }),
        };
        let p_permutation = options.permutations.map(|n| {
            stats::kruskal_wallis_permutation(&kept, n, options.seed ^ crate::rng::fnv1a([fi as u64]))
                .unwrap_or(f64::NAN)
        });
        Outcome::Tested(FeatureScreenEntry {
            name,
            feature_id: feature.id.clone(),
            h: kw.h,
            df: kw.df,
            p: kw.p,
            p_raw: kw.p,
            p_permutation,
            groups: kept.len(),
            observations: kept.iter().map(Vec::len).sum(),
            rank: 0,
        })
    });
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Tested(e) => entries.push(e),
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    if options.bonferroni {
        let m = entries.len() as f64;
        for e in &mut entries {
            e.p = (e.p_raw * m).min(1.0);
        }
    }
    entries.sort_by(|a, b| {
        a.p.total_cmp(&b.p)
            .then_with(|| b.h.total_cmp(&a.h))
            .then_with(|| a.name.cmp(&b.name))
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    Ok(ScreenReport {
        task,
        side,
        options: options.clone(),
        entries,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{FeatureDescriptor, FeatureGroup, TransferRecord};
    use crate::exec::Sequential;
    use alloc::vec;

    #[test]
    fn planted_feature_ranks_first_and_degenerate_is_skipped() {
        let langs: Vec<LangCode> = (0..12)
            .map(|i| LangCode::new(&format!("x{}", (b'a' + i) as char)).unwrap())
            .collect();
        let feats = vec![
            FeatureDescriptor::with_count("1A", "Planted", FeatureGroup::WordOrder, 2, &[]).unwrap(),
            FeatureDescriptor::with_count("2A", "Noise", FeatureGroup::WordOrder, 3, &[]).unwrap(),
            FeatureDescriptor::with_count("3A", "Flat", FeatureGroup::WordOrder, 2, &[]).unwrap(),
        ];
        let mut m = FeatureMatrix::new(langs.clone(), feats).unwrap();
        for (i, l) in langs.iter().enumerate() {
            m.set(l, "1A", if i < 6 { 1 } else { 2 }).unwrap();
            m.set(l, "2A", (i % 3) as u32 + 1).unwrap();
            m.set(l, "3A", 1).unwrap();
        }
        let mut recs = Vec::new();
        for (i, s) in langs.iter().enumerate() {
            for (j, t) in langs.iter().enumerate() {
                if i != j {
                    let base = if i < 6 { 0.3 } else { 0.8 };
                    let jitter = ((i * 7 + j * 3) % 10) as f64 * 0.001;
                    recs.push(TransferRecord::new(Task::Pos, s.clone(), t.clone(), base + jitter).unwrap());
                }
            }
        }
        let scores = ScoreTable::new(recs).unwrap();
        let r = kw_feature_screen(&scores, &m, Task::Pos, Side::Train, &ScreenOptions::default(), &Sequential).unwrap();
        assert_eq!(r.entries[0].name, "1A_train");
        assert_eq!(r.entries[0].rank, 1);
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].name, "3A_train");
        for w in r.entries.windows(2) {
            assert!(w[0].p < w[1].p || (w[0].p == w[1].p && w[0].h >= w[1].h));
        }
        assert!(kw_feature_screen(&scores, &m, Task::Ner, Side::Train, &ScreenOptions::default(), &Sequential).is_err());
    }
}
