//! Run configuration: a TOML file, overridden by flags, resolved into typed
//! settings.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use xfer_core::analysis::{Direction, RankMode, ScreenOptions};
use xfer_core::corpus::{FeatureGroup, FeaturePolicy, FilterPolicy, LangCode, Task};
use xfer_core::distance::DistanceConfig;
use xfer_core::encoding::{Encoding, Side};
use xfer_core::learn::{FeatureSubsample, Grouping, ModelConfig, ModelKind, SplitConfig};

use crate::error::{Error, Result};

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "XFER_CONFIG";

pub const DEFAULT_OUTPUT: &str = "xfer-out";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core. Never affects results.
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub task: Option<String>,
    pub encoding: Option<String>,
    pub inputs: Inputs,
    pub filter: FilterSection,
    pub features: FeatureSection,
    pub model: ModelSection,
    pub split: SplitSection,
    pub screen: ScreenSection,
    pub importance: ImportanceSection,
    pub rank: RankSection,
    pub rules: RulesSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub languages: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub values: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub distances: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub drop_supervised: Option<bool>,
    pub excluded_languages: Option<Vec<String>>,
    pub excluded_targets: Option<Vec<String>>,
    pub excluded_pairs: Option<Vec<[String; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    pub dropped_groups: Option<Vec<String>>,
    pub drop_all_missing: Option<bool>,
    pub syntactic_groups: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Depth {
    Levels(usize),
    /// Only `"unlimited"` is accepted.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subsample {
    Fraction(f64),
    /// Only `"third"` is accepted.
    Named(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Option<String>,
    pub max_depth: Option<Depth>,
    pub min_samples_leaf: Option<usize>,
    pub n_trees: Option<usize>,
    pub feature_subsample: Option<Subsample>,
    pub bootstrap: Option<bool>,
    pub learning_rate: Option<f64>,
    pub ridge_damping: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub folds: Option<usize>,
    pub grouping: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreenSection {
    pub side: Option<String>,
    pub min_group_size: Option<usize>,
    pub include_missing: Option<bool>,
    pub bonferroni: Option<bool>,
    /// 0 disables the permutation p-value.
    pub permutations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceSection {
    pub repeats: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankSection {
    pub target: Option<String>,
    pub mode: Option<String>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RulesSection {
    pub feature: Option<String>,
    pub side: Option<String>,
    pub direction: Option<String>,
}

impl RunConfig {
    /// Parses TOML text; relative input paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        if let Some(base) = base {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, Some(&base))
            .map_err(|e| Error::config(format!("{}: {}", path.display(), e.to_string().trim_start_matches("config error: "))))
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.inputs.languages);
        fix(&mut self.inputs.features);
        fix(&mut self.inputs.values);
        fix(&mut self.inputs.scores);
        fix(&mut self.inputs.distances);
        fix(&mut self.output);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPaths {
    pub languages: PathBuf,
    pub features: PathBuf,
    pub values: PathBuf,
    pub scores: PathBuf,
    pub distances: Option<PathBuf>,
}

impl InputPaths {
    /// `(name, path)` for every present input, in a fixed order.
    pub fn named(&self) -> Vec<(&'static str, &Path)> {
        let mut v = vec![
            ("languages", self.languages.as_path()),
            ("features", self.features.as_path()),
            ("values", self.values.as_path()),
            ("scores", self.scores.as_path()),
        ];
        if let Some(d) = &self.distances {
            v.push(("distances", d.as_path()));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSettings {
    pub target: Option<LangCode>,
    pub mode: RankMode,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSettings {
    pub feature: Option<String>,
    pub side: Side,
    pub direction: Direction,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub threads: usize,
    pub output: PathBuf,
    pub task: Option<Task>,
    pub inputs: InputPaths,
    pub filter: FilterPolicy,
    pub features: FeaturePolicy,
    pub distance: DistanceConfig,
    pub encoding: Encoding,
    pub model: ModelConfig,
    pub split: SplitConfig,
    pub screen_side: Side,
    pub screen: ScreenOptions,
    pub importance_repeats: usize,
    pub rank: RankSettings,
    pub rules: RuleSettings,
}

fn parse<T: FromStr>(what: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| Error::config(format!("{what}: {e}")))
}

fn codes(what: &str, list: &[String]) -> Result<BTreeSet<LangCode>> {
    list.iter().map(|c| parse::<LangCode>(what, c)).collect()
}

fn groups(what: &str, list: &[String]) -> Result<Vec<FeatureGroup>> {
    list.iter().map(|g| parse::<FeatureGroup>(what, g)).collect()
}

fn input(name: &str, path: &Option<PathBuf>) -> Result<PathBuf> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::config(format!("no {name} file given (set inputs.{name} or --{name})")))?;
    existing(name, path)
}

fn existing(name: &str, path: &Path) -> Result<PathBuf> {
    if !path.is_file() {
        return Err(Error::config(format!("{name} file {} does not exist", path.display())));
    }
    std::path::absolute(path).map_err(|e| Error::config(format!("{name} file {}: {e}", path.display())))
}

pub fn parse_side(raw: &str) -> Result<Side> {
    parse("side", raw)
}

pub fn parse_direction(raw: &str) -> Result<Direction> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "low" | "lower" => Ok(Direction::Low),
        "high" | "higher" => Ok(Direction::High),
        _ => Err(Error::config(format!("direction: expected low or high, got {raw:?}"))),
    }
}

pub fn parse_rank_mode(raw: &str) -> Result<RankMode> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "empirical" => Ok(RankMode::Empirical),
        "predicted" => Ok(RankMode::Predicted),
        _ => Err(Error::config(format!("rank mode: expected empirical or predicted, got {raw:?}"))),
    }
}

fn model_config(section: &ModelSection, seed: u64) -> Result<ModelConfig> {
    let kind: ModelKind = match &section.kind {
        Some(k) => parse("model kind", k)?,
        None => ModelKind::Forest,
    };
    let mut m = ModelConfig::default_for(kind, seed);
    m.seed = Some(seed);
    match &section.max_depth {
        Some(Depth::Levels(d)) => m.max_depth = Some(*d),
        Some(Depth::Named(s)) if s == "unlimited" => m.max_depth = None,
        Some(Depth::Named(s)) => {
            return Err(Error::config(format!("max_depth: expected a number or \"unlimited\", got {s:?}")))
        }
        None => {}
    }
    if let Some(v) = section.min_samples_leaf {
        m.min_samples_leaf = v;
    }
    if let Some(v) = section.n_trees {
        m.n_trees = v;
    }
    match &section.feature_subsample {
        Some(Subsample::Fraction(f)) => m.feature_subsample = FeatureSubsample::Fraction(*f),
        Some(Subsample::Named(s)) if s == "third" => m.feature_subsample = FeatureSubsample::Third,
        Some(Subsample::Named(s)) => {
            return Err(Error::config(format!("feature_subsample: expected a fraction or \"third\", got {s:?}")))
        }
        None => {}
    }
    if let Some(v) = section.bootstrap {
        m.bootstrap = v;
    }
    if let Some(v) = section.learning_rate {
        m.learning_rate = v;
    }
    if let Some(v) = section.ridge_damping {
        m.ridge_damping = v;
    }
    m.validate().map_err(|e| Error::config(e.to_string()))?;
    Ok(m)
}

impl Settings {
    pub fn resolve(cfg: &RunConfig) -> Result<Self> {
        let seed = cfg.seed.unwrap_or(0);
        if seed > i64::MAX as u64 {
            return Err(Error::config(format!("seed {seed} exceeds {}", i64::MAX)));
        }
        let task = cfg.task.as_deref().map(|t| parse::<Task>("task", t)).transpose()?;
        let inputs = InputPaths {
            languages: input("languages", &cfg.inputs.languages)?,
            features: input("features", &cfg.inputs.features)?,
            values: input("values", &cfg.inputs.values)?,
            scores: input("scores", &cfg.inputs.scores)?,
            distances: cfg.inputs.distances.as_deref().map(|p| existing("distances", p)).transpose()?,
        };
        let base = FilterPolicy::standard();
        let f = &cfg.filter;
        let filter = FilterPolicy {
            drop_supervised: f.drop_supervised.unwrap_or(base.drop_supervised),
            excluded_languages: match &f.excluded_languages {
                Some(l) => codes("filter.excluded_languages", l)?,
                None => base.excluded_languages,
            },
            excluded_targets: match &f.excluded_targets {
                Some(l) => codes("filter.excluded_targets", l)?,
                None => base.excluded_targets,
            },
            excluded_pairs: match &f.excluded_pairs {
                Some(pairs) => pairs
                    .iter()
                    .map(|[a, b]| Ok((parse("filter.excluded_pairs", a)?, parse("filter.excluded_pairs", b)?)))
                    .collect::<Result<_>>()?,
                None => base.excluded_pairs,
            },
        };
        let fp = FeaturePolicy::standard();
        let features = FeaturePolicy {
            dropped_groups: match &cfg.features.dropped_groups {
                Some(g) => groups("features.dropped_groups", g)?.into_iter().collect(),
                None => fp.dropped_groups,
            },
            drop_all_missing: cfg.features.drop_all_missing.unwrap_or(fp.drop_all_missing),
        };
        let distance = match &cfg.features.syntactic_groups {
            Some(g) => DistanceConfig {
                syntactic_groups: groups("features.syntactic_groups", g)?,
            },
            None => DistanceConfig::default(),
        };
        let encoding = match &cfg.encoding {
            Some(e) => parse("encoding", e)?,
            None => Encoding::OneHot,
        };
        let split = SplitConfig {
            folds: cfg.split.folds.unwrap_or(5),
            seed,
            grouping: match &cfg.split.grouping {
                Some(g) => parse("split.grouping", g)?,
                None => Grouping::Random,
            },
        };
        if split.folds < 2 {
            return Err(Error::config(format!("split.folds must be at least 2, got {}", split.folds)));
        }
        let s = &cfg.screen;
        let screen = ScreenOptions {
            min_group_size: s.min_group_size.unwrap_or(3),
            include_missing: s.include_missing.unwrap_or(false),
            bonferroni: s.bonferroni.unwrap_or(false),
            permutations: s.permutations.filter(|&n| n > 0),
            seed,
        };
        if screen.min_group_size == 0 {
            return Err(Error::config("screen.min_group_size must be positive"));
        }
        let importance_repeats = cfg.importance.repeats.unwrap_or(10);
        if importance_repeats == 0 {
            return Err(Error::config("importance.repeats must be positive"));
        }
        let rank = RankSettings {
            target: cfg.rank.target.as_deref().map(|t| parse("rank.target", t)).transpose()?,
            mode: cfg.rank.mode.as_deref().map_or(Ok(RankMode::Empirical), parse_rank_mode)?,
            k: cfg.rank.k.unwrap_or(3),
        };
        if rank.k == 0 {
            return Err(Error::config("rank.k must be positive"));
        }
        let rules = RuleSettings {
            feature: cfg.rules.feature.clone(),
            side: cfg.rules.side.as_deref().map_or(Ok(Side::Train), parse_side)?,
            direction: cfg.rules.direction.as_deref().map_or(Ok(Direction::Low), parse_direction)?,
        };
        Ok(Settings {
            seed,
            threads: cfg.threads.unwrap_or(0),
            output: cfg.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
            task,
            inputs,
            filter,
            features,
            distance,
            encoding,
            model: model_config(&cfg.model, seed)?,
            split,
            screen_side: cfg.screen.side.as_deref().map_or(Ok(Side::Train), parse_side)?,
            screen,
            importance_repeats,
            rank,
            rules,
        })
    }

    pub fn require_task(&self) -> Result<Task> {
        self.task.ok_or_else(|| Error::config("this command needs a task (--task or task = \"...\")"))
    }

    /// Every resolved setting except threads and output location, which
    /// never change results. Resolving this again yields the same settings.
    pub fn effective(&self) -> RunConfig {
        let m = &self.model;
        let strs = |set: &BTreeSet<LangCode>| Some(set.iter().map(|c| c.as_str().to_string()).collect());
        let labels = |g: &mut dyn Iterator<Item = &FeatureGroup>| Some(g.map(|g| g.label().to_string()).collect());
        RunConfig {
            seed: Some(self.seed),
            threads: None,
            output: None,
            task: self.task.map(|t| t.as_str().to_string()),
            encoding: Some(self.encoding.to_string()),
            inputs: Inputs {
                languages: Some(self.inputs.languages.clone()),
                features: Some(self.inputs.features.clone()),
                values: Some(self.inputs.values.clone()),
                scores: Some(self.inputs.scores.clone()),
                distances: self.inputs.distances.clone(),
            },
            filter: FilterSection {
                drop_supervised: Some(self.filter.drop_supervised),
                excluded_languages: strs(&self.filter.excluded_languages),
                excluded_targets: strs(&self.filter.excluded_targets),
                excluded_pairs: Some(
                    self.filter
                        .excluded_pairs
                        .iter()
                        .map(|(a, b)| [a.as_str().to_string(), b.as_str().to_string()])
                        .collect(),
                ),
            },
            features: FeatureSection {
                dropped_groups: labels(&mut self.features.dropped_groups.iter()),
                drop_all_missing: Some(self.features.drop_all_missing),
                syntactic_groups: labels(&mut self.distance.syntactic_groups.iter()),
            },
            model: ModelSection {
                kind: Some(m.kind.as_str().to_string()),
                max_depth: Some(match m.max_depth {
                    Some(d) => Depth::Levels(d),
                    None => Depth::Named("unlimited".into()),
                }),
                min_samples_leaf: Some(m.min_samples_leaf),
                n_trees: Some(m.n_trees),
                feature_subsample: Some(match m.feature_subsample {
                    FeatureSubsample::Third => Subsample::Named("third".into()),
                    FeatureSubsample::Fraction(f) => Subsample::Fraction(f),
                }),
                bootstrap: Some(m.bootstrap),
                learning_rate: Some(m.learning_rate),
                ridge_damping: Some(m.ridge_damping),
            },
            split: SplitSection {
                folds: Some(self.split.folds),
                grouping: Some(self.split.grouping.as_str().to_string()),
            },
            screen: ScreenSection {
                side: Some(self.screen_side.as_str().to_string()),
                min_group_size: Some(self.screen.min_group_size),
                include_missing: Some(self.screen.include_missing),
                bonferroni: Some(self.screen.bonferroni),
                permutations: Some(self.screen.permutations.unwrap_or(0)),
            },
            importance: ImportanceSection {
                repeats: Some(self.importance_repeats),
            },
            rank: RankSection {
                target: self.rank.target.as_ref().map(|t| t.as_str().to_string()),
                mode: Some(self.rank.mode.to_string()),
                k: Some(self.rank.k),
            },
            rules: RulesSection {
                feature: self.rules.feature.clone(),
                side: Some(self.rules.side.as_str().to_string()),
                direction: Some(self.rules.direction.to_string()),
            },
        }
    }
}
