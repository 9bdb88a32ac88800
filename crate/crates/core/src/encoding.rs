//! Design matrices for (source, target) pairs.
//!
//! Each transfer record becomes one row holding the typological profile of
//! the training language (`_train` columns) and of the test language (`_test`
//! columns). Column names follow `<feature>_<side>` for ordinal columns and
//! `<feature>_<side>_<category>` for one-hot indicators, where category `0`
//! is the missing-value indicator. Columns are ordered by
//! `(feature id, side, category)` so repeated runs give identical matrices.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{FeatureGroup, FeatureMatrix, LangCode, ScoreTable, Task};
use crate::distance::{Component, PairDistances};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodingError {
    #[error("no score records to encode")]
    EmptyScores,
    #[error("language {0} is not in the feature matrix")]
    UnknownLanguage(LangCode),
    #[error("no {component} distance for ({source_lang}, {target_lang})")]
    MissingPair {
        source_lang: LangCode,
        target_lang: LangCode,
        component: Component,
    },
    #[error("no columns belong to group {0}")]
    EmptyGroup(FeatureGroup),
    #[error("cannot parse column name {0:?}")]
    BadColumnName(String),
    #[error("duplicate column name {0}")]
    DuplicateColumn(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
}

/// Which language of the pair a feature column describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    /// The source (training) language.
    Train,
    /// The target (test) language.
    Test,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Train, Side::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Train => "train",
            Side::Test => "test",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = EncodingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" | "source" => Ok(Side::Train),
            "test" | "target" => Ok(Side::Test),
            _ => Err(EncodingError::BadColumnName(s.to_string())),
        }
    }
}

/// What a feature column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    /// The category number itself, 0 when missing.
    Ordinal,
    /// Indicator for one observed category.
    Category(u32),
    /// Indicator for a missing value.
    Missing,
}

impl Slot {
    fn order_key(self) -> u32 {
        match self {
            Slot::Ordinal | Slot::Missing => 0,
            Slot::Category(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnSpec {
    Feature {
        feature_id: String,
        group: FeatureGroup,
        side: Side,
        slot: Slot,
    },
    Distance(Component),
    /// Free-form numeric column for data that does not come from the encoders.
    Numeric(String),
}

/// The identity recoverable from a column name alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKey {
    Feature { feature_id: String, side: Side, slot: Slot },
    Distance(Component),
}

const DISTANCE_PREFIX: &str = "distance_";

impl ColumnSpec {
    pub fn name(&self) -> String {
        match self {
            ColumnSpec::Feature {
                feature_id, side, slot, ..
            } => match slot {
                Slot::Ordinal => format!("{feature_id}_{side}"),
                Slot::Category(c) => format!("{feature_id}_{side}_{c}"),
                Slot::Missing => format!("{feature_id}_{side}_0"),
            },
            ColumnSpec::Distance(c) => format!("{DISTANCE_PREFIX}{c}"),
            ColumnSpec::Numeric(name) => name.clone(),
        }
    }

    pub fn group(&self) -> Option<FeatureGroup> {
        match self {
            ColumnSpec::Feature { group, .. } => Some(*group),
            _ => None,
        }
    }

    pub fn is_feature(&self) -> bool {
        matches!(self, ColumnSpec::Feature { .. })
    }

    fn sort_key(&self) -> (u8, &str, Option<Side>, u32) {
        match self {
            ColumnSpec::Feature {
                feature_id, side, slot, ..
            } => (0, feature_id.as_str(), Some(*side), slot.order_key()),
            ColumnSpec::Distance(c) => (1, c.as_str(), None, 0),
            ColumnSpec::Numeric(n) => (2, n.as_str(), None, 0),
        }
    }
}

/// Parses a canonical column name back into its identity.
pub fn parse_column_name(name: &str) -> Result<ColumnKey, EncodingError> {
    let bad = || EncodingError::BadColumnName(name.to_string());
    if let Some(rest) = name.strip_prefix(DISTANCE_PREFIX) {
        return rest.parse().map(ColumnKey::Distance).map_err(|_| bad());
    }
    let parts: Vec<&str> = name.split('_').collect();
    let (feature_id, side, slot) = match parts.as_slice() {
        [id, side] => (*id, *side, Slot::Ordinal),
        [id, side, cat] => {
            let c: u32 = cat.parse().map_err(|_| bad())?;
            (*id, *side, if c == 0 { Slot::Missing } else { Slot::Category(c) })
        }
        _ => return Err(bad()),
    };
    if feature_id.is_empty() || !matches!(side, "train" | "test") {
        return Err(bad());
    }
    Ok(ColumnKey::Feature {
        feature_id: feature_id.to_string(),
        side: side.parse()?,
        slot,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairKey {
    pub task: Task,
    pub source: LangCode,
    pub target: LangCode,
}

impl PairKey {
    pub fn language(&self, side: Side) -> &LangCode {
        match side {
            Side::Train => &self.source,
            Side::Test => &self.target,
        }
    }
}

/// Row-major design matrix plus target vector and per-row pair identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    columns: Vec<ColumnSpec>,
    design: Vec<f64>,
    target: Vec<f64>,
    pairs: Vec<PairKey>,
}

impl PairDataset {
    /// Checks shapes, finiteness and column-name uniqueness.
    pub fn new(
        columns: Vec<ColumnSpec>,
        design: Vec<f64>,
        target: Vec<f64>,
        pairs: Vec<PairKey>,
    ) -> Result<Self, EncodingError> {
        let (n, p) = (target.len(), columns.len());
        if design.len() != n * p {
            return Err(EncodingError::Shape(format!(
                "design has {} cells, expected {n} x {p}",
                design.len()
            )));
        }
        if pairs.len() != n {
            return Err(EncodingError::Shape(format!("{} pair keys for {n} rows", pairs.len())));
        }
        if let Some(i) = design.iter().position(|v| !v.is_finite()) {
            return Err(EncodingError::NonFinite { row: i / p, column: i % p });
        }
        if let Some(i) = target.iter().position(|v| !v.is_finite()) {
            return Err(EncodingError::NonFinite { row: i, column: p });
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            let name = c.name();
            if !seen.insert(name.clone()) {
                return Err(EncodingError::DuplicateColumn(name));
            }
        }
        Ok(PairDataset {
            columns,
            design,
            target,
            pairs,
        })
    }

    /// Dataset from plain numeric columns, for data that does not come from a
    /// feature matrix. Pair keys are synthesized per row.
    pub fn from_numeric(names: &[&str], rows: &[Vec<f64>], target: Vec<f64>) -> Result<Self, EncodingError> {
        let columns = names.iter().map(|n| ColumnSpec::Numeric(n.to_string())).collect();
        let mut design = Vec::with_capacity(rows.len() * names.len());
        for r in rows {
            if r.len() != names.len() {
                return Err(EncodingError::Shape(format!("row of {} values for {} columns", r.len(), names.len())));
            }
            design.extend_from_slice(r);
        }
        let pairs = (0..target.len()).map(synthetic_pair).collect();
        Self::new(columns, design, target, pairs)
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(ColumnSpec::name).collect()
    }

    pub fn design(&self) -> &[f64] {
        &self.design
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn pairs(&self) -> &[PairKey] {
        &self.pairs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.design[i * p..(i + 1) * p]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.design[row * self.n_cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    /// Columns holding the same value in every row.
    pub fn zero_variance_columns(&self) -> Vec<usize> {
        (0..self.n_cols())
            .filter(|&c| {
                let first = self.get(0, c);
                (1..self.n_rows()).all(|r| self.get(r, c) == first)
            })
            .collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> PairDataset {
        let mut design = Vec::with_capacity(rows.len() * self.n_cols());
        for &r in rows {
            design.extend_from_slice(self.row(r));
        }
        PairDataset {
            columns: self.columns.clone(),
            design,
            target: rows.iter().map(|&r| self.target[r]).collect(),
            pairs: rows.iter().map(|&r| self.pairs[r].clone()).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> PairDataset {
        let mut design = Vec::with_capacity(self.n_rows() * cols.len());
        for r in 0..self.n_rows() {
            let row = self.row(r);
            design.extend(cols.iter().map(|&c| row[c]));
        }
        PairDataset {
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            design,
            target: self.target.clone(),
            pairs: self.pairs.clone(),
        }
    }

    /// Same rows and target, no columns.
    pub fn pairs_only(&self) -> PairDataset {
        self.select_columns(&[])
    }

    /// Indices of the typological feature columns.
    pub fn feature_columns(&self) -> Vec<usize> {
        (0..self.n_cols()).filter(|&c| self.columns[c].is_feature()).collect()
    }
}

fn synthetic_pair(i: usize) -> PairKey {
    // Two-letter codes cycle through aa..zz; only used as row labels.
    let letter = |k: usize| (b'a' + (k % 26) as u8) as char;
    let mut code = String::new();
    code.push(letter(i / 26));
    code.push(letter(i));
    let c = LangCode::new(&code).expect("generated code is valid");
    PairKey {
        task: Task::Pos,
        source: c.clone(),
        target: c,
    }
}

/// Ordinal or one-hot representation of categorical features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    Ordinal,
    OneHot,
}

impl FromStr for Encoding {
    type Err = EncodingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ordinal" => Ok(Encoding::Ordinal),
            "onehot" => Ok(Encoding::OneHot),
            _ => Err(EncodingError::Shape(format!("unknown encoding {s:?}"))),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Ordinal => "ordinal",
            Encoding::OneHot => "onehot",
        })
    }
}

struct Profiles {
    pairs: Vec<PairKey>,
    target: Vec<f64>,
    /// Matrix row index of the source / target language per record.
    rows: Vec<[usize; 2]>,
}

fn profiles(matrix: &FeatureMatrix, scores: &ScoreTable) -> Result<Profiles, EncodingError> {
    if scores.is_empty() {
        return Err(EncodingError::EmptyScores);
    }
    let mut out = Profiles {
        pairs: Vec::with_capacity(scores.len()),
        target: Vec::with_capacity(scores.len()),
        rows: Vec::with_capacity(scores.len()),
    };
    for r in scores.records() {
        let li = |c: &LangCode| matrix.language_index(c).ok_or_else(|| EncodingError::UnknownLanguage(c.clone()));
        out.rows.push([li(&r.source)?, li(&r.target)?]);
        out.pairs.push(PairKey {
            task: r.task,
            source: r.source.clone(),
            target: r.target.clone(),
        });
        out.target.push(r.accuracy);
    }
    Ok(out)
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Train => 0,
        Side::Test => 1,
    }
}

fn sorted_feature_indices(matrix: &FeatureMatrix) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..matrix.features().len()).collect();
    idx.sort_by(|&a, &b| matrix.features()[a].id.cmp(&matrix.features()[b].id));
    idx
}

/// One column per (feature, side) holding the category number, 0 if missing.
pub fn encode_ordinal(matrix: &FeatureMatrix, scores: &ScoreTable) -> Result<PairDataset, EncodingError> {
    let prof = profiles(matrix, scores)?;
    let feats = sorted_feature_indices(matrix);
    let mut columns = Vec::with_capacity(feats.len() * 2);
    for &fi in &feats {
        let f = &matrix.features()[fi];
        for side in Side::BOTH {
            columns.push(ColumnSpec::Feature {
                feature_id: f.id.clone(),
                group: f.group,
                side,
                slot: Slot::Ordinal,
            });
        }
    }
    let mut design = Vec::with_capacity(prof.pairs.len() * columns.len());
    for langs in &prof.rows {
        for &fi in &feats {
            for side in Side::BOTH {
                let v = matrix.get(langs[side_index(side)], fi).unwrap_or(0);
                design.push(f64::from(v));
            }
        }
    }
    PairDataset::new(columns, design, prof.target, prof.pairs)
}

/// One indicator per (feature, side, observed category), plus a missing
/// indicator for blocks where some row is missing. Exactly one indicator per
/// block is set in every row.
pub fn encode_onehot(matrix: &FeatureMatrix, scores: &ScoreTable) -> Result<PairDataset, EncodingError> {
    let prof = profiles(matrix, scores)?;
    let feats = sorted_feature_indices(matrix);
    let mut columns = Vec::new();
    // per (feature, side): map from cell value (None = missing) to column index
    let mut blocks: Vec<(usize, Side, BTreeMap<Option<u32>, usize>)> = Vec::new();
    for &fi in &feats {
        let f = &matrix.features()[fi];
        for side in Side::BOTH {
            let observed: BTreeSet<Option<u32>> = prof
                .rows
                .iter()
                .map(|langs| matrix.get(langs[side_index(side)], fi))
                .collect();
            let mut index = BTreeMap::new();
            // None sorts first, matching the `_0` name order.
            for value in observed {
                index.insert(value, columns.len());
                columns.push(ColumnSpec::Feature {
                    feature_id: f.id.clone(),
                    group: f.group,
                    side,
                    slot: value.map_or(Slot::Missing, Slot::Category),
                });
            }
            blocks.push((fi, side, index));
        }
    }
    let p = columns.len();
    let mut design = alloc::vec![0.0; prof.pairs.len() * p];
    for (r, langs) in prof.rows.iter().enumerate() {
        for (fi, side, index) in &blocks {
            let v = matrix.get(langs[side_index(*side)], *fi);
            design[r * p + index[&v]] = 1.0;
        }
    }
    PairDataset::new(columns, design, prof.target, prof.pairs)
}

pub fn encode(kind: Encoding, matrix: &FeatureMatrix, scores: &ScoreTable) -> Result<PairDataset, EncodingError> {
    match kind {
        Encoding::Ordinal => encode_ordinal(matrix, scores),
        Encoding::OneHot => encode_onehot(matrix, scores),
    }
}

/// Encodes arbitrary pairs against an existing column layout, e.g. to score
/// candidate pairs with a fitted model. A category the layout has no column
/// for leaves its one-hot block empty.
pub fn encode_rows(
    matrix: &FeatureMatrix,
    pairs: &[PairKey],
    columns: &[ColumnSpec],
    distances: Option<&PairDistances>,
) -> Result<Vec<f64>, EncodingError> {
    let mut design = Vec::with_capacity(pairs.len() * columns.len());
    for pair in pairs {
        for col in columns {
            let v = match col {
                ColumnSpec::Feature {
                    feature_id, side, slot, ..
                } => {
                    let lang = pair.language(*side);
                    let li = matrix
                        .language_index(lang)
                        .ok_or_else(|| EncodingError::UnknownLanguage(lang.clone()))?;
                    let cell = matrix
                        .feature_index(feature_id)
                        .and_then(|fi| matrix.get(li, fi));
                    match slot {
                        Slot::Ordinal => f64::from(cell.unwrap_or(0)),
                        Slot::Missing => f64::from(u8::from(cell.is_none())),
                        Slot::Category(c) => f64::from(u8::from(cell == Some(*c))),
                    }
                }
                ColumnSpec::Distance(component) => distance_value(distances, pair, *component)?,
                ColumnSpec::Numeric(name) => {
                    return Err(EncodingError::Shape(format!("cannot encode free-form column {name}")))
                }
            };
            design.push(v);
        }
    }
    Ok(design)
}

fn distance_value(distances: Option<&PairDistances>, pair: &PairKey, component: Component) -> Result<f64, EncodingError> {
    let missing = || EncodingError::MissingPair {
        source_lang: pair.source.clone(),
        target_lang: pair.target.clone(),
        component,
    };
    distances
        .ok_or_else(missing)?
        .get(&pair.source, &pair.target, component)
        .map_err(|_| missing())
}

/// Appends one column per requested distance component.
pub fn attach_distances(
    dataset: &PairDataset,
    distances: &PairDistances,
    components: &[Component],
) -> Result<PairDataset, EncodingError> {
    let mut wanted: Vec<Component> = Vec::new();
    for &c in components {
        if !wanted.contains(&c) && !dataset.columns.contains(&ColumnSpec::Distance(c)) {
            wanted.push(c);
        }
    }
    if wanted.is_empty() {
        return Ok(dataset.clone());
    }
    let p = dataset.n_cols() + wanted.len();
    let mut design = Vec::with_capacity(dataset.n_rows() * p);
    for (r, pair) in dataset.pairs.iter().enumerate() {
        design.extend_from_slice(dataset.row(r));
        for &c in &wanted {
            design.push(distance_value(Some(distances), pair, c)?);
        }
    }
    let mut columns = dataset.columns.clone();
    columns.extend(wanted.into_iter().map(ColumnSpec::Distance));
    PairDataset::new(columns, design, dataset.target.clone(), dataset.pairs.clone())
}

/// Keeps only the feature columns of one WALS group (distance columns are
/// dropped too).
pub fn select_group(dataset: &PairDataset, group: FeatureGroup) -> Result<PairDataset, EncodingError> {
    let cols: Vec<usize> = (0..dataset.n_cols())
        .filter(|&c| dataset.columns[c].group() == Some(group))
        .collect();
    if cols.is_empty() {
        return Err(EncodingError::EmptyGroup(group));
    }
    Ok(dataset.select_columns(&cols))
}

/// Recovers the categorical profile of one side of a row: feature id to
/// category (`None` for missing). Works for both encodings.
pub fn decode_profile(dataset: &PairDataset, row: usize, side: Side) -> BTreeMap<String, Option<u32>> {
    let mut out: BTreeMap<String, Option<u32>> = BTreeMap::new();
    for (c, spec) in dataset.columns.iter().enumerate() {
        if let ColumnSpec::Feature {
            feature_id,
            side: s,
            slot,
            ..
        } = spec
        {
            if *s != side {
                continue;
            }
            let v = dataset.get(row, c);
            match slot {
                Slot::Ordinal => {
                    out.insert(feature_id.clone(), (v != 0.0).then_some(v as u32));
                }
                Slot::Category(cat) if v == 1.0 => {
                    out.insert(feature_id.clone(), Some(*cat));
                }
                Slot::Missing if v == 1.0 => {
                    out.insert(feature_id.clone(), None);
                }
                _ => {}
            }
        }
    }
    out
}

/// Canonical column ordering used by the encoders.
pub fn column_order(a: &ColumnSpec, b: &ColumnSpec) -> Ordering {
    a.sort_key().cmp(&b.sort_key())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{FeatureDescriptor, TransferRecord};
    use crate::distance::Provenance;
    use alloc::vec;

    fn code(s: &str) -> LangCode {
        LangCode::new(s).unwrap()
    }

    fn fixture() -> (FeatureMatrix, ScoreTable) {
        let feats = vec![
            FeatureDescriptor::with_count("90A", "Rel", FeatureGroup::WordOrder, 7, &[]).unwrap(),
            FeatureDescriptor::with_count("90B", "Rel2", FeatureGroup::WordOrder, 3, &[]).unwrap(),
            FeatureDescriptor::with_count("66A", "Past", FeatureGroup::VerbalCategories, 4, &[]).unwrap(),
        ];
        let mut m = FeatureMatrix::new(vec![code("bg"), code("en"), code("ta")], feats).unwrap();
        m.set(&code("bg"), "90A", 2).unwrap();
        m.set(&code("en"), "90A", 1).unwrap();
        m.set(&code("ta"), "90A", 3).unwrap();
        m.set(&code("bg"), "90B", 1).unwrap();
        m.set(&code("en"), "90B", 1).unwrap();
        m.set(&code("bg"), "66A", 4).unwrap();
        m.set(&code("en"), "66A", 4).unwrap();
        m.set(&code("ta"), "66A", 4).unwrap();
        let rec = |s: &str, t: &str, a: f64| TransferRecord::new(Task::Pos, code(s), code(t), a).unwrap();
        let scores = ScoreTable::new([rec("bg", "en", 0.8), rec("en", "ta", 0.6), rec("ta", "bg", 0.7)]).unwrap();
        (m, scores)
    }

    #[test]
    fn ordinal_encoding() {
        let (m, s) = fixture();
        let d = encode_ordinal(&m, &s).unwrap();
        assert_eq!(
            d.column_names(),
            vec!["66A_train", "66A_test", "90A_train", "90A_test", "90B_train", "90B_test"]
        );
        assert_eq!(d.n_rows(), 3);
        // row 0 is (bg -> en): 90A_train = 2
        assert_eq!(d.pairs()[0].source, code("bg"));
        assert_eq!(d.get(0, 2), 2.0);
        // ta has no 90B value
        let row = d.pairs().iter().position(|p| p.source == code("ta")).unwrap();
        assert_eq!(d.get(row, 4), 0.0);
    }

    #[test]
    fn onehot_encoding() {
        let (m, s) = fixture();
        let d = encode_onehot(&m, &s).unwrap();
        let names = d.column_names();
        assert!(names.contains(&"90B_train_1".to_string()));
        assert!(names.contains(&"90B_train_0".to_string()));
        assert_eq!(names.iter().filter(|n| n.starts_with("90A_train_")).count(), 3);
        // 66A is 4 everywhere: single constant indicator per side
        let zero_var: Vec<String> = d.zero_variance_columns().iter().map(|&c| names[c].clone()).collect();
        assert!(zero_var.contains(&"66A_train_4".to_string()));
        let bg_row = d.pairs().iter().position(|p| p.source == code("bg")).unwrap();
        let c = names.iter().position(|n| n == "90B_train_1").unwrap();
        assert_eq!(d.get(bg_row, c), 1.0);
        assert_eq!(d.get(bg_row, c - 1), 0.0);
        for r in 0..d.n_rows() {
            for side in Side::BOTH {
                let profile = decode_profile(&d, r, side);
                let lang = d.pairs()[r].language(side);
                for f in m.features() {
                    assert_eq!(profile[&f.id], m.value(lang, &f.id));
                }
            }
        }
    }

    #[test]
    fn empty_scores_rejected() {
        let (m, _) = fixture();
        assert_eq!(encode_ordinal(&m, &ScoreTable::default()).unwrap_err(), EncodingError::EmptyScores);
    }

    #[test]
    fn column_names_round_trip() {
        for name in ["90B_train_1", "55A_test", "138A_test_0", "distance_syntactic"] {
            let key = parse_column_name(name).unwrap();
            let spec = match key {
                ColumnKey::Feature { feature_id, side, slot } => ColumnSpec::Feature {
                    feature_id,
                    group: FeatureGroup::Other,
                    side,
                    slot,
                },
                ColumnKey::Distance(c) => ColumnSpec::Distance(c),
            };
            assert_eq!(spec.name(), name);
        }
        assert!(parse_column_name("90A").is_err());
        assert!(parse_column_name("90A_left").is_err());
        assert!(parse_column_name("90A_train_x").is_err());
    }

    #[test]
    fn distances_and_groups() {
        let (m, s) = fixture();
        let d = encode_ordinal(&m, &s).unwrap();
        let mut dist = PairDistances::new();
        for (a, b, v) in [("bg", "en", 0.3), ("en", "ta", 0.6), ("ta", "bg", 0.5)] {
            dist.insert(&code(a), &code(b), Component::Syntactic, v, Provenance::Loaded).unwrap();
        }
        assert_eq!(attach_distances(&d, &dist, &[]).unwrap(), d);
        let base = attach_distances(&d.pairs_only(), &dist, &[Component::Syntactic]).unwrap();
        assert_eq!(base.column_names(), vec!["distance_syntactic"]);
        assert_eq!(base.get(0, 0), 0.3);
        let err = attach_distances(&d, &dist, &[Component::Genetic]).unwrap_err();
        assert!(matches!(err, EncodingError::MissingPair { .. }));

        let wo = select_group(&d, FeatureGroup::WordOrder).unwrap();
        assert_eq!(wo.n_cols(), 4);
        assert_eq!(
            select_group(&d, FeatureGroup::Lexicon).unwrap_err(),
            EncodingError::EmptyGroup(FeatureGroup::Lexicon)
        );
        let with_dist = attach_distances(&d, &dist, &[Component::Syntactic]).unwrap();
        let mut union: Vec<String> = FeatureGroup::ALL
            .iter()
            .filter_map(|&g| select_group(&with_dist, g).ok())
            .flat_map(|x| x.column_names())
            .collect();
        union.sort();
        let mut orig = d.column_names();
        orig.sort();
        assert_eq!(union, orig);
    }

    #[test]
    fn encode_rows_matches_encoder() {
        let (m, s) = fixture();
        let d = encode_onehot(&m, &s).unwrap();
        let design = encode_rows(&m, d.pairs(), d.columns(), None).unwrap();
        assert_eq!(design, d.design());
    }
}
