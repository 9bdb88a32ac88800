//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Command, Outcome};
use crate::config::{RunConfig, Settings, Subsample, CONFIG_ENV};
use crate::error::{Error, Result};
use crate::report::Provenance;

/// Predict and explain cross-lingual transfer from typological features.
///
/// Settings come from a TOML config file (--config, or the file named by the
/// XFER_CONFIG environment variable), overridden by flags. Artifacts are
/// written to the output directory as CSV and aligned text.
#[derive(Debug, Parser)]
#[command(name = "xfer", version, max_term_width = 100)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
#[command(next_help_heading = "Global options")]
pub struct Global {
    /// TOML config file [default: $XFER_CONFIG]
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core; results do not depend on it
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output directory for artifacts
    #[arg(short, long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Languages CSV (code,name,latitude,longitude,genealogy)
    #[arg(long, global = true, value_name = "PATH")]
    pub languages: Option<PathBuf>,
    /// Feature catalog CSV (feature_id,name,group,category_count[,category_labels])
    #[arg(long, global = true, value_name = "PATH")]
    pub features: Option<PathBuf>,
    /// Feature values CSV (language,feature_id,category)
    #[arg(long, global = true, value_name = "PATH")]
    pub values: Option<PathBuf>,
    /// Transfer scores CSV (task,source,target,accuracy)
    #[arg(long, global = true, value_name = "PATH")]
    pub scores: Option<PathBuf>,
    /// Precomputed distances CSV (source,target,syntactic,geographic,genetic)
    #[arg(long, global = true, value_name = "PATH")]
    pub distances: Option<PathBuf>,
    /// Keep every score record (no pair filter)
    #[arg(long, global = true)]
    pub no_filter: bool,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Load every input and report diagnostics
    Validate,
    /// Write the syntactic, geographic and genetic distance table
    Distances,
    /// Correlate accuracy with distances and tasks with each other
    Correlate,
    /// Kruskal-Wallis screen of every feature against accuracy
    Screen(ScreenArgs),
    /// Fit a model on all pairs of a task and save it
    Train(TrainArgs),
    /// Cross-validated RMSE of a model
    Evaluate(EvalArgs),
    /// Impurity, permutation and coefficient importance of every column
    Importance(ImportanceArgs),
    /// Cross-validated RMSE of a model trained on each feature group alone
    Ablate(EvalArgs),
    /// Feature model against the syntactic-distance baseline
    Compare(EvalArgs),
    /// Rank source languages for a target language
    Rank(RankArgs),
    /// Category means of one feature and the extreme category
    Rules(RulesArgs),
    /// Re-run the command recorded in an artifact and compare the result
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct TaskArg {
    /// Task to analyse: pos, ner or nli
    #[arg(long, value_name = "TASK")]
    pub task: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Feature encoding: onehot or ordinal
    #[arg(long, value_name = "KIND")]
    pub encoding: Option<String>,
    /// Learner: linear, tree, forest or gbm
    #[arg(long, value_name = "KIND")]
    pub model: Option<String>,
    /// Trees in a forest, or boosting stages
    #[arg(long, value_name = "N")]
    pub trees: Option<usize>,
    /// Maximum tree depth
    #[arg(long, value_name = "N")]
    pub max_depth: Option<usize>,
    /// Minimum rows per leaf
    #[arg(long, value_name = "N")]
    pub min_leaf: Option<usize>,
    /// Columns tried per split: a fraction in (0, 1] or "third"
    #[arg(long, value_name = "F")]
    pub subsample: Option<String>,
    /// Boosting learning rate
    #[arg(long, value_name = "F")]
    pub learning_rate: Option<f64>,
    /// Ridge damping of the linear model
    #[arg(long, value_name = "F")]
    pub ridge: Option<f64>,
    /// Grow forest trees on all rows instead of bootstrap samples
    #[arg(long)]
    pub no_bootstrap: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Cross-validation folds
    #[arg(long, value_name = "N")]
    pub folds: Option<usize>,
    /// Fold grouping: random or by-target
    #[arg(long, value_name = "KIND")]
    pub grouping: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub task: TaskArg,
    /// Which language's features to test: train (source) or test (target)
    #[arg(long, value_name = "SIDE")]
    pub side: Option<String>,
    /// Drop category groups with fewer records
    #[arg(long, value_name = "N")]
    pub min_group_size: Option<usize>,
    /// Treat a missing value as its own category
    #[arg(long)]
    pub include_missing: bool,
    /// Bonferroni-adjust p-values
    #[arg(long)]
    pub bonferroni: bool,
    /// Resamples for a permutation p-value, 0 for none
    #[arg(long, value_name = "N")]
    pub permutations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub task: TaskArg,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub task: TaskArg,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub task: TaskArg,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Shuffles per column for permutation importance
    #[arg(long, value_name = "N")]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub task: TaskArg,
    /// Target language code
    #[arg(long, value_name = "CODE")]
    pub target: Option<String>,
    /// empirical (observed accuracy) or predicted (model trained without the target)
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,
    /// Number of sources to list
    #[arg(short, value_name = "K")]
    pub k: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct RulesArgs {
    #[command(flatten)]
    pub task: TaskArg,
    /// Feature id, e.g. 89A
    #[arg(long, value_name = "ID")]
    pub feature: Option<String>,
    /// train (source) or test (target)
    #[arg(long, value_name = "SIDE")]
    pub side: Option<String>,
    /// Flag the category with the low or high mean
    #[arg(long, value_name = "DIR")]
    pub direction: Option<String>,
    /// Ignore categories with fewer records
    #[arg(long, value_name = "N")]
    pub min_group_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A CSV or text artifact written by an earlier run
    #[arg(value_name = "ARTIFACT")]
    pub artifact: PathBuf,
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn apply_global(cfg: &mut RunConfig, g: &Global) {
    set(&mut cfg.seed, g.seed);
    set(&mut cfg.threads, g.threads);
    set(&mut cfg.output, g.output.as_deref().map(absolute));
    set(&mut cfg.inputs.languages, g.languages.as_deref().map(absolute));
    set(&mut cfg.inputs.features, g.features.as_deref().map(absolute));
    set(&mut cfg.inputs.values, g.values.as_deref().map(absolute));
    set(&mut cfg.inputs.scores, g.scores.as_deref().map(absolute));
    set(&mut cfg.inputs.distances, g.distances.as_deref().map(absolute));
    if g.no_filter {
        cfg.filter.drop_supervised = Some(false);
        cfg.filter.excluded_languages = Some(Vec::new());
        cfg.filter.excluded_targets = Some(Vec::new());
        cfg.filter.excluded_pairs = Some(Vec::new());
    }
}

fn apply_model(cfg: &mut RunConfig, m: &ModelArgs) {
    set(&mut cfg.encoding, m.encoding.clone());
    let s = &mut cfg.model;
    set(&mut s.kind, m.model.clone());
    set(&mut s.n_trees, m.trees);
    set(&mut s.max_depth, m.max_depth.map(crate::config::Depth::Levels));
    set(&mut s.min_samples_leaf, m.min_leaf);
    set(
        &mut s.feature_subsample,
        m.subsample.as_ref().map(|v| match v.parse::<f64>() {
            Ok(f) => Subsample::Fraction(f),
            Err(_) => Subsample::Named(v.clone()),
        }),
    );
    set(&mut s.learning_rate, m.learning_rate);
    set(&mut s.ridge_damping, m.ridge);
    if m.no_bootstrap {
        s.bootstrap = Some(false);
    }
}

fn apply_split(cfg: &mut RunConfig, s: &SplitArgs) {
    set(&mut cfg.split.folds, s.folds);
    set(&mut cfg.split.grouping, s.grouping.clone());
}

fn apply_task(cfg: &mut RunConfig, t: &TaskArg) {
    set(&mut cfg.task, t.task.clone());
}

/// Folds command-specific flags into the config and names the command.
fn apply_command(cfg: &mut RunConfig, sub: &Sub) -> Option<Command> {
    let cmd = match sub {
        Sub::Validate => Command::Validate,
        Sub::Distances => Command::Distances,
        Sub::Correlate => Command::Correlate,
        Sub::Screen(a) => {
            apply_task(cfg, &a.task);
            set(&mut cfg.screen.side, a.side.clone());
            set(&mut cfg.screen.min_group_size, a.min_group_size);
            set(&mut cfg.screen.permutations, a.permutations);
            if a.include_missing {
                cfg.screen.include_missing = Some(true);
            }
            if a.bonferroni {
                cfg.screen.bonferroni = Some(true);
            }
            Command::Screen
        }
        Sub::Train(a) => {
            apply_task(cfg, &a.task);
            apply_model(cfg, &a.model);
            Command::Train
        }
        Sub::Evaluate(a) | Sub::Ablate(a) | Sub::Compare(a) => {
            apply_task(cfg, &a.task);
            apply_model(cfg, &a.model);
            apply_split(cfg, &a.split);
            match sub {
                Sub::Evaluate(_) => Command::Evaluate,
                Sub::Ablate(_) => Command::Ablate,
                _ => Command::Compare,
            }
        }
        Sub::Importance(a) => {
            apply_task(cfg, &a.task);
            apply_model(cfg, &a.model);
            set(&mut cfg.importance.repeats, a.repeats);
            Command::Importance
        }
        Sub::Rank(a) => {
            apply_task(cfg, &a.task);
            apply_model(cfg, &a.model);
            set(&mut cfg.rank.target, a.target.clone());
            set(&mut cfg.rank.mode, a.mode.clone());
            set(&mut cfg.rank.k, a.k);
            Command::Rank
        }
        Sub::Rules(a) => {
            apply_task(cfg, &a.task);
            set(&mut cfg.rules.feature, a.feature.clone());
            set(&mut cfg.rules.side, a.side.clone());
            set(&mut cfg.rules.direction, a.direction.clone());
            set(&mut cfg.screen.min_group_size, a.min_group_size);
            Command::Rules
        }
        Sub::Replay(_) => return None,
    };
    Some(cmd)
}

fn base_config(g: &Global) -> Result<RunConfig> {
    let path = g
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    match path {
        Some(p) => RunConfig::load(&p),
        None => Ok(RunConfig::default()),
    }
}

/// Re-runs the command embedded in `artifact` into the output directory and
/// checks that the artifact of the same name comes out byte-identical.
fn replay(artifact: &Path, g: &Global) -> Result<Outcome> {
    let original = std::fs::read_to_string(artifact).map_err(|e| Error::io(artifact, e))?;
    let (command, config) = Provenance::parse_header(&original)
        .ok_or_else(|| Error::config(format!("{} carries no provenance header", artifact.display())))?;
    let command: Command = command.parse()?;
    let mut cfg = RunConfig::from_toml(&config, None)?;
    set(&mut cfg.threads, g.threads);
    cfg.output = Some(absolute(g.output.as_deref().unwrap_or(Path::new(crate::config::DEFAULT_OUTPUT))));
    let settings = Settings::resolve(&cfg)?;
    let name = artifact
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::config(format!("bad artifact path {}", artifact.display())))?
        .to_string();
    let outcome = commands::run(command, &settings)?;
    let again = outcome
        .artifacts
        .iter()
        .find(|a| a.name == name)
        .ok_or_else(|| Error::Mismatch(format!("re-run of {command} produced no {name}")))?;
    if again.contents != original {
        return Err(Error::Mismatch(format!(
            "{name} differs from the re-run written to {}",
            settings.output.display()
        )));
    }
    Ok(Outcome {
        summary: format!("{name}: re-run of {command} is byte-identical"),
        artifacts: outcome.artifacts,
    })
}

fn dispatch(cli: Cli) -> Result<(Outcome, PathBuf)> {
    if let Sub::Replay(a) = &cli.command {
        let out = absolute(cli.global.output.as_deref().unwrap_or(Path::new(crate::config::DEFAULT_OUTPUT)));
        return Ok((replay(&a.artifact, &cli.global)?, out));
    }
    let mut cfg = base_config(&cli.global)?;
    apply_global(&mut cfg, &cli.global);
    let command = apply_command(&mut cfg, &cli.command).expect("replay handled above");
    let settings = Settings::resolve(&cfg)?;
    let outcome = commands::run(command, &settings)?;
    Ok((outcome, settings.output))
}

/// Parses `args`, runs, reports, and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok((outcome, dir)) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", outcome.summary);
            for a in &outcome.artifacts {
                let _ = writeln!(out, "wrote {}", dir.join(&a.name).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config_values() {
        let mut cfg = RunConfig::from_toml("seed = 3\n[model]\nkind = \"linear\"\nn_trees = 9\n", None).unwrap();
        let cli = Cli::try_parse_from(["xfer", "evaluate", "--task", "ner", "--model", "gbm", "--seed", "5"]).unwrap();
        apply_global(&mut cfg, &cli.global);
        assert_eq!(apply_command(&mut cfg, &cli.command), Some(Command::Evaluate));
        assert_eq!(cfg.seed, Some(5));
        assert_eq!(cfg.model.kind.as_deref(), Some("gbm"));
        assert_eq!(cfg.model.n_trees, Some(9));
        assert_eq!(cfg.task.as_deref(), Some("ner"));
    }
}
