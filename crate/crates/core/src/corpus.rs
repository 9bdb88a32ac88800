//! Data model for languages, typological features and transfer scores, plus
//! the filtering rules applied before any analysis.
//!
//! Values are validated on construction and immutable afterwards. Missing
//! typological values stay missing here; how they are encoded is decided by
//! [`crate::encoding`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("invalid language code {0:?}: expected 2 or 3 lowercase ASCII letters")]
    InvalidCode(String),
    #[error("duplicate language code {0}")]
    DuplicateCode(LangCode),
    #[error("coordinates out of range for {code}: latitude {latitude}, longitude {longitude}")]
    CoordinateOutOfRange {
        code: LangCode,
        latitude: f64,
        longitude: f64,
    },
    #[error("language {0} has an empty genealogy")]
    EmptyGenealogy(LangCode),
    #[error("unknown language {0}")]
    UnknownLanguage(String),
    #[error("unknown feature id {0}")]
    UnknownFeatureId(String),
    #[error("duplicate feature id {0}")]
    DuplicateFeatureId(String),
    #[error("feature {0} declares no categories")]
    EmptyCategories(String),
    #[error("feature {feature}: category {category} is not in the catalog")]
    CategoryOutOfCatalog { feature: String, category: u32 },
    #[error("duplicate value for ({language}, {feature})")]
    DuplicateValue { language: LangCode, feature: String },
    #[error("unknown feature group {0:?}")]
    UnknownGroup(String),
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("duplicate record for ({task}, {source_lang}, {target_lang})")]
    DuplicatePair {
        task: Task,
        source_lang: LangCode,
        target_lang: LangCode,
    },
    #[error("accuracy {accuracy} for ({task}, {source_lang}, {target_lang}) is outside [0, 1]")]
    AccuracyOutOfRange {
        task: Task,
        source_lang: LangCode,
        target_lang: LangCode,
        accuracy: f64,
    },
}

/// Lowercase 2- or 3-letter language identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LangCode(String);

impl LangCode {
    pub fn new(code: &str) -> Result<Self, CorpusError> {
        let valid = (2..=3).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_lowercase());
        if valid {
            Ok(LangCode(code.to_string()))
        } else {
            Err(CorpusError::InvalidCode(code.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LangCode {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LangCode::new(s)
    }
}

impl TryFrom<String> for LangCode {
    type Error = CorpusError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        LangCode::new(&s)
    }
}

impl From<LangCode> for String {
    fn from(c: LangCode) -> String {
        c.0
    }
}

impl PartialEq<str> for LangCode {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for LangCode {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// Downstream task a transfer score was measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Task {
    Pos,
    Ner,
    Nli,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Pos, Task::Ner, Task::Nli];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Pos => "POS",
            Task::Ner => "NER",
            Task::Nli => "NLI",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "POS" | "UDPOS" => Ok(Task::Pos),
            "NER" | "PANX" => Ok(Task::Ner),
            "NLI" | "XNLI" => Ok(Task::Nli),
            _ => Err(CorpusError::UnknownTask(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub latitude: f64,
    pub longitude: f64,
}

impl Coordinates {
    /// Latitude in [-90, 90], longitude in (-180, 180].
    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude)
            && self.longitude > -180.0
            && self.longitude <= 180.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Language {
    pub code: LangCode,
    pub name: String,
    pub coordinates: Option<Coordinates>,
    /// Family chain from root to leaf; an isolate names only itself.
    pub genealogy: Vec<String>,
}

impl Language {
    pub fn new(
        code: LangCode,
        name: impl Into<String>,
        coordinates: Option<Coordinates>,
        genealogy: Vec<String>,
    ) -> Result<Self, CorpusError> {
        if let Some(c) = coordinates {
            if !c.is_valid() {
                return Err(CorpusError::CoordinateOutOfRange {
                    code,
                    latitude: c.latitude,
                    longitude: c.longitude,
                });
            }
        }
        if genealogy.is_empty() || genealogy.iter().any(|g| g.is_empty()) {
            return Err(CorpusError::EmptyGenealogy(code));
        }
        Ok(Language {
            code,
            name: name.into(),
            coordinates,
            genealogy,
        })
    }
}

/// Languages indexed by code. Iteration follows insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LanguageRegistry {
    languages: Vec<Language>,
    index: BTreeMap<LangCode, usize>,
}

impl LanguageRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_languages(languages: impl IntoIterator<Item = Language>) -> Result<Self, CorpusError> {
        let mut reg = Self::new();
        for l in languages {
            reg.insert(l)?;
        }
        Ok(reg)
    }

    pub fn insert(&mut self, language: Language) -> Result<(), CorpusError> {
        if self.index.contains_key(&language.code) {
            return Err(CorpusError::DuplicateCode(language.code));
        }
        self.index.insert(language.code.clone(), self.languages.len());
        self.languages.push(language);
        Ok(())
    }

    pub fn get(&self, code: &LangCode) -> Option<&Language> {
        self.index.get(code).map(|&i| &self.languages[i])
    }

    pub fn get_str(&self, code: &str) -> Option<&Language> {
        LangCode::new(code).ok().and_then(|c| self.get(&c))
    }

    pub fn require(&self, code: &LangCode) -> Result<&Language, CorpusError> {
        self.get(code)
            .ok_or_else(|| CorpusError::UnknownLanguage(code.to_string()))
    }

    pub fn contains(&self, code: &LangCode) -> bool {
        self.index.contains_key(code)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Language> {
        self.languages.iter()
    }

    pub fn codes(&self) -> impl Iterator<Item = &LangCode> {
        self.languages.iter().map(|l| &l.code)
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    /// Same languages ordered by code.
    pub fn normalized(&self) -> Self {
        let mut langs = self.languages.clone();
        langs.sort_by(|a, b| a.code.cmp(&b.code));
        Self::from_languages(langs).expect("codes already unique")
    }
}

/// WALS chapter a feature belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureGroup {
    Morphology,
    NominalCategories,
    NominalSyntax,
    VerbalCategories,
    WordOrder,
    SimpleClauses,
    ComplexSentences,
    Lexicon,
    Other,
    Phonology,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 10] = [
        FeatureGroup::Morphology,
        FeatureGroup::NominalCategories,
        FeatureGroup::NominalSyntax,
        FeatureGroup::VerbalCategories,
        FeatureGroup::WordOrder,
        FeatureGroup::SimpleClauses,
        FeatureGroup::ComplexSentences,
        FeatureGroup::Lexicon,
        FeatureGroup::Other,
        FeatureGroup::Phonology,
    ];

    /// Groups treated as syntax when building aggregated syntactic vectors.
    pub const SYNTACTIC: [FeatureGroup; 4] = [
        FeatureGroup::WordOrder,
        FeatureGroup::SimpleClauses,
        FeatureGroup::ComplexSentences,
        FeatureGroup::NominalSyntax,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FeatureGroup::Morphology => "Morphology",
            FeatureGroup::NominalCategories => "Nominal Categories",
            FeatureGroup::NominalSyntax => "Nominal Syntax",
            FeatureGroup::VerbalCategories => "Verbal Categories",
            FeatureGroup::WordOrder => "Word Order",
            FeatureGroup::SimpleClauses => "Simple Clauses",
            FeatureGroup::ComplexSentences => "Complex Sentences",
            FeatureGroup::Lexicon => "Lexicon",
            FeatureGroup::Other => "Other",
            FeatureGroup::Phonology => "Phonology",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FeatureGroup {
    type Err = CorpusError;

    /// Accepts the display label in any case, with spaces, underscores or
    /// hyphens ("Word Order", "word_order", "word-order").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        let g = match key.as_str() {
            "morphology" => FeatureGroup::Morphology,
            "nominalcategories" => FeatureGroup::NominalCategories,
            "nominalsyntax" => FeatureGroup::NominalSyntax,
            "verbalcategories" => FeatureGroup::VerbalCategories,
            "wordorder" => FeatureGroup::WordOrder,
            "simpleclauses" => FeatureGroup::SimpleClauses,
            "complexsentences" => FeatureGroup::ComplexSentences,
            "lexicon" => FeatureGroup::Lexicon,
            "other" | "others" | "signlanguages" => FeatureGroup::Other,
            "phonology" => FeatureGroup::Phonology,
            _ => return Err(CorpusError::UnknownGroup(s.to_string())),
        };
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub id: String,
    pub name: String,
    pub group: FeatureGroup,
    /// Category value (>= 1) to label.
    pub categories: BTreeMap<u32, String>,
}

impl FeatureDescriptor {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        group: FeatureGroup,
        categories: BTreeMap<u32, String>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        if categories.is_empty() {
            return Err(CorpusError::EmptyCategories(id));
        }
        if categories.contains_key(&0) {
            return Err(CorpusError::CategoryOutOfCatalog {
                feature: id,
                category: 0,
            });
        }
        Ok(FeatureDescriptor {
            id,
            name: name.into(),
            group,
            categories,
        })
    }

    /// Categories `1..=count` with labels taken from `labels` where given.
    pub fn with_count(
        id: impl Into<String>,
        name: impl Into<String>,
        group: FeatureGroup,
        count: u32,
        labels: &[&str],
    ) -> Result<Self, CorpusError> {
        let categories = (1..=count)
            .map(|c| {
                let label = labels
                    .get(c as usize - 1)
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| alloc::format!("category {c}"));
                (c, label)
            })
            .collect();
        Self::new(id, name, group, categories)
    }

    pub fn label(&self, category: u32) -> Option<&str> {
        self.categories.get(&category).map(String::as_str)
    }
}

/// Languages x features, each cell a catalogued category or missing (`None`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    languages: Vec<LangCode>,
    features: Vec<FeatureDescriptor>,
    cells: Vec<Option<u32>>,
    language_index: BTreeMap<LangCode, usize>,
    feature_index: BTreeMap<String, usize>,
}

impl FeatureMatrix {
    /// All cells start missing.
    pub fn new(languages: Vec<LangCode>, features: Vec<FeatureDescriptor>) -> Result<Self, CorpusError> {
        let mut language_index = BTreeMap::new();
        for (i, l) in languages.iter().enumerate() {
            if language_index.insert(l.clone(), i).is_some() {
                return Err(CorpusError::DuplicateCode(l.clone()));
            }
        }
        let mut feature_index = BTreeMap::new();
        for (i, f) in features.iter().enumerate() {
            if feature_index.insert(f.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateFeatureId(f.id.clone()));
            }
        }
        let cells = alloc::vec![None; languages.len() * features.len()];
        Ok(FeatureMatrix {
            languages,
            features,
            cells,
            language_index,
            feature_index,
        })
    }

    /// Sets a cell. Rejects unknown coordinates, uncatalogued categories and
    /// a second value for an already filled cell.
    pub fn set(&mut self, language: &LangCode, feature_id: &str, category: u32) -> Result<(), CorpusError> {
        let li = self
            .language_index(language)
            .ok_or_else(|| CorpusError::UnknownLanguage(language.to_string()))?;
        let fi = self
            .feature_index(feature_id)
            .ok_or_else(|| CorpusError::UnknownFeatureId(feature_id.to_string()))?;
        if !self.features[fi].categories.contains_key(&category) {
            return Err(CorpusError::CategoryOutOfCatalog {
                feature: feature_id.to_string(),
                category,
            });
        }
        let cell = &mut self.cells[li * self.features.len() + fi];
        if cell.is_some() {
            return Err(CorpusError::DuplicateValue {
                language: language.clone(),
                feature: feature_id.to_string(),
            });
        }
        *cell = Some(category);
        Ok(())
    }

    pub fn languages(&self) -> &[LangCode] {
        &self.languages
    }

    pub fn features(&self) -> &[FeatureDescriptor] {
        &self.features
    }

    pub fn language_index(&self, code: &LangCode) -> Option<usize> {
        self.language_index.get(code).copied()
    }

    pub fn feature_index(&self, id: &str) -> Option<usize> {
        self.feature_index.get(id).copied()
    }

    pub fn feature(&self, id: &str) -> Option<&FeatureDescriptor> {
        self.feature_index(id).map(|i| &self.features[i])
    }

    /// Cell by positional indices.
    pub fn get(&self, language: usize, feature: usize) -> Option<u32> {
        self.cells[language * self.features.len() + feature]
    }

    /// Cell by code and feature id; `None` when missing or either key is unknown.
    pub fn value(&self, language: &LangCode, feature_id: &str) -> Option<u32> {
        let li = self.language_index(language)?;
        let fi = self.feature_index(feature_id)?;
        self.get(li, fi)
    }

    /// Number of languages with a known value for feature `fi`.
    pub fn known_count(&self, fi: usize) -> usize {
        (0..self.languages.len()).filter(|&li| self.get(li, fi).is_some()).count()
    }

    /// Sub-matrix keeping the features for which `keep` holds, in order.
    pub fn retain_features(&self, mut keep: impl FnMut(usize, &FeatureDescriptor) -> bool) -> Self {
        let kept: Vec<usize> = (0..self.features.len())
            .filter(|&fi| keep(fi, &self.features[fi]))
            .collect();
        let features: Vec<FeatureDescriptor> = kept.iter().map(|&fi| self.features[fi].clone()).collect();
        let mut out = FeatureMatrix::new(self.languages.clone(), features).expect("ids already unique");
        let width = kept.len();
        for li in 0..self.languages.len() {
            for (new_fi, &fi) in kept.iter().enumerate() {
                out.cells[li * width + new_fi] = self.get(li, fi);
            }
        }
        out
    }

    /// Languages sorted by code and features sorted by id.
    pub fn normalized(&self) -> Self {
        let mut langs = self.languages.clone();
        langs.sort();
        let mut feats = self.features.clone();
        feats.sort_by(|a, b| a.id.cmp(&b.id));
        let mut out = FeatureMatrix::new(langs, feats).expect("keys already unique");
        for (li, lang) in self.languages.iter().enumerate() {
            for (fi, feat) in self.features.iter().enumerate() {
                if let Some(c) = self.get(li, fi) {
                    out.set(lang, &feat.id, c).expect("same catalog");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub task: Task,
    /// Training language.
    pub source: LangCode,
    /// Test language.
    pub target: LangCode,
    pub accuracy: f64,
}

impl TransferRecord {
    pub fn new(task: Task, source: LangCode, target: LangCode, accuracy: f64) -> Result<Self, CorpusError> {
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(CorpusError::AccuracyOutOfRange {
                task,
                source_lang: source,
                target_lang: target,
                accuracy,
            });
        }
        Ok(TransferRecord {
            task,
            source,
            target,
            accuracy,
        })
    }

    /// Trained and tested on the same language.
    pub fn is_supervised(&self) -> bool {
        self.source == self.target
    }
}

/// Transfer records with at most one entry per (task, source, target), kept
/// sorted by that key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    records: Vec<TransferRecord>,
}

impl ScoreTable {
    pub fn new(records: impl IntoIterator<Item = TransferRecord>) -> Result<Self, CorpusError> {
        let mut records: Vec<TransferRecord> = records.into_iter().collect();
        for r in &records {
            if !(0.0..=1.0).contains(&r.accuracy) {
                return Err(CorpusError::AccuracyOutOfRange {
                    task: r.task,
                    source_lang: r.source.clone(),
                    target_lang: r.target.clone(),
                    accuracy: r.accuracy,
                });
            }
        }
        records.sort_by(|a, b| key(a).cmp(&key(b)));
        if let Some(w) = records.windows(2).find(|w| key(&w[0]) == key(&w[1])) {
            return Err(CorpusError::DuplicatePair {
                task: w[0].task,
                source_lang: w[0].source.clone(),
                target_lang: w[0].target.clone(),
            });
        }
        Ok(ScoreTable { records })
    }

    pub fn records(&self) -> &[TransferRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn tasks(&self) -> BTreeSet<Task> {
        self.records.iter().map(|r| r.task).collect()
    }

    pub fn supervised(&self) -> impl Iterator<Item = &TransferRecord> {
        self.records.iter().filter(|r| r.is_supervised())
    }

    pub fn for_task(&self, task: Task) -> ScoreTable {
        ScoreTable {
            records: self.records.iter().filter(|r| r.task == task).cloned().collect(),
        }
    }

    pub fn get(&self, task: Task, source: &LangCode, target: &LangCode) -> Option<&TransferRecord> {
        self.records
            .binary_search_by(|r| key(r).cmp(&(task, source, target)))
            .ok()
            .map(|i| &self.records[i])
    }

    /// Every language mentioned on either side.
    pub fn languages(&self) -> BTreeSet<LangCode> {
        self.records
            .iter()
            .flat_map(|r| [r.source.clone(), r.target.clone()])
            .collect()
    }

    fn retain(&self, mut keep: impl FnMut(&TransferRecord) -> bool) -> ScoreTable {
        ScoreTable {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }
}

fn key(r: &TransferRecord) -> (Task, &LangCode, &LangCode) {
    (r.task, &r.source, &r.target)
}

/// Which transfer records to exclude before modelling.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterPolicy {
    pub drop_supervised: bool,
    /// Excluded on either side.
    pub excluded_languages: BTreeSet<LangCode>,
    /// Excluded as target only.
    pub excluded_targets: BTreeSet<LangCode>,
    /// Excluded (source, target) pairs.
    pub excluded_pairs: BTreeSet<(LangCode, LangCode)>,
}

impl FilterPolicy {
    /// Keeps everything.
    pub fn none() -> Self {
        Self::default()
    }

    /// Zero-shot only, no Japanese or Chinese, no French target, no de->en.
    pub fn standard() -> Self {
        let code = |s: &str| LangCode::new(s).expect("static code");
        FilterPolicy {
            drop_supervised: true,
            excluded_languages: [code("ja"), code("zh")].into_iter().collect(),
            excluded_targets: [code("fr")].into_iter().collect(),
            excluded_pairs: [(code("de"), code("en"))].into_iter().collect(),
        }
    }

    pub fn keeps(&self, r: &TransferRecord) -> bool {
        !(self.drop_supervised && r.is_supervised()
            || self.excluded_languages.contains(&r.source)
            || self.excluded_languages.contains(&r.target)
            || self.excluded_targets.contains(&r.target)
            || self
                .excluded_pairs
                .contains(&(r.source.clone(), r.target.clone())))
    }
}

pub fn filter_pairs(table: &ScoreTable, policy: &FilterPolicy) -> ScoreTable {
    table.retain(|r| policy.keeps(r))
}

/// Which features to discard before modelling.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeaturePolicy {
    pub dropped_groups: BTreeSet<FeatureGroup>,
    /// Drop features with no known value for any language in the matrix.
    pub drop_all_missing: bool,
}

impl FeaturePolicy {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn standard() -> Self {
        FeaturePolicy {
            dropped_groups: [FeatureGroup::Phonology].into_iter().collect(),
            drop_all_missing: true,
        }
    }
}

pub fn drop_features(matrix: &FeatureMatrix, policy: &FeaturePolicy) -> FeatureMatrix {
    matrix.retain_features(|fi, f| {
        !(policy.dropped_groups.contains(&f.group) || policy.drop_all_missing && matrix.known_count(fi) == 0)
    })
}
