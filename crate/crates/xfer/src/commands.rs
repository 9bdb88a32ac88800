//! Pipeline stages behind each subcommand. Every command builds its artifacts
//! in memory; [`run`] writes them under the output lock.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use xfer_core::analysis::{
    baseline_compare, category_rules, cross_task_correlation, distance_correlations, group_ablation,
    kw_feature_screen, leave_target_out, rank_empirical, rank_predicted, RankMode, SourceRanking,
};
use xfer_core::corpus::{
    drop_features, filter_pairs, FeatureMatrix, LangCode, LanguageRegistry, ScoreTable, Task,
};
use xfer_core::distance::{distance_table_for, syntactic_distance, Component, PairDistances, Provenance as Origin};
use xfer_core::encoding::{encode, PairDataset};
use xfer_core::learn::{
    assign_folds, coefficient_importance, cross_validate_with, fit, impurity_importance, permutation_importance,
    ImportanceReport, ModelConfig,
};
use xfer_core::Executor;

use crate::config::Settings;
use crate::error::{Error, Location, Result};
use crate::exec::Threads;
use crate::io;
use crate::lock::OutputLock;
use crate::model_io::ModelFile;
use crate::report::{self, num, opt, pval, Provenance, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Distances,
    Correlate,
    Screen,
    Train,
    Evaluate,
    Importance,
    Ablate,
    Compare,
    Rank,
    Rules,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Validate,
        Command::Distances,
        Command::Correlate,
        Command::Screen,
        Command::Train,
        Command::Evaluate,
        Command::Importance,
        Command::Ablate,
        Command::Compare,
        Command::Rank,
        Command::Rules,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Distances => "distances",
            Command::Correlate => "correlate",
            Command::Screen => "screen",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Importance => "importance",
            Command::Ablate => "ablate",
            Command::Compare => "compare",
            Command::Rank => "rank",
            Command::Rules => "rules",
        }
    }

    fn needs_task(self) -> bool {
        !matches!(self, Command::Validate | Command::Distances | Command::Correlate)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Short human summary for the terminal.
    pub summary: String,
}

/// Loaded inputs, raw and after the configured policies.
pub struct Corpus {
    pub registry: LanguageRegistry,
    pub raw_matrix: FeatureMatrix,
    pub matrix: FeatureMatrix,
    pub raw_scores: ScoreTable,
    pub scores: ScoreTable,
    pub loaded: Option<PairDistances>,
    pub digests: Vec<(String, String)>,
}

impl Corpus {
    pub fn load(settings: &Settings) -> Result<Self> {
        let inputs = &settings.inputs;
        let registry = io::read_languages(&inputs.languages)?;
        let raw_matrix = io::read_feature_matrix(&inputs.features, &inputs.values, &registry)?;
        let raw_scores = io::read_scores(&inputs.scores, Some(&registry))?;
        let loaded = inputs
            .distances
            .as_deref()
            .map(|p| io::read_distances(p, Some(&registry)))
            .transpose()?;
        let digests = inputs
            .named()
            .into_iter()
            .map(|(name, path)| Ok((name.to_string(), report::file_digest(path)?)))
            .collect::<Result<_>>()?;
        let scores = filter_pairs(&raw_scores, &settings.filter);
        if scores.is_empty() {
            return Err(Error::data(
                Location::file(&inputs.scores),
                "no records left after the pair filter",
            ));
        }
        Ok(Corpus {
            matrix: drop_features(&raw_matrix, &settings.features),
            registry,
            raw_matrix,
            raw_scores,
            scores,
            loaded,
            digests,
        })
    }

    fn task_scores(&self, task: Task, path: &Path) -> Result<ScoreTable> {
        let t = self.scores.for_task(task);
        if t.is_empty() {
            return Err(Error::data(Location::file(path), format!("no {task} records after the pair filter")));
        }
        Ok(t)
    }

    fn dataset(&self, settings: &Settings, task: Task) -> Result<PairDataset> {
        let table = self.task_scores(task, &settings.inputs.scores)?;
        Ok(encode(settings.encoding, &self.matrix, &table)?)
    }

    /// Syntactic distance for every pair in `table`, loaded where present.
    fn syntactic_for(&self, table: &ScoreTable, settings: &Settings) -> Result<PairDistances> {
        let mut out = PairDistances::new();
        for r in table.records() {
            let loaded = self
                .loaded
                .as_ref()
                .and_then(|d| d.measured(&r.source, &r.target, Component::Syntactic));
            let (value, origin) = match loaded {
                Some(m) => (m.value, m.provenance),
                None => (
                    syntactic_distance(&r.source, &r.target, &self.matrix, &settings.distance.syntactic_groups)?,
                    Origin::Computed,
                ),
            };
            out.insert(&r.source, &r.target, Component::Syntactic, value, origin)?;
        }
        Ok(out)
    }
}

struct Ctx<'a, E> {
    command: Command,
    settings: &'a Settings,
    corpus: &'a Corpus,
    exec: &'a E,
    config: String,
}

impl<E: Executor> Ctx<'_, E> {
    fn provenance(&self, fold_hashes: Vec<u64>) -> Provenance {
        Provenance {
            command: self.command.as_str().to_string(),
            seed: self.settings.seed,
            config: self.config.clone(),
            inputs: self.corpus.digests.clone(),
            fold_hashes,
        }
    }

    fn stem(&self) -> String {
        match self.settings.task {
            Some(t) if self.command.needs_task() => format!("{}-{}", self.command, t.as_str().to_ascii_lowercase()),
            _ => self.command.to_string(),
        }
    }

    fn table(&self, out: &mut Vec<Artifact>, suffix: &str, table: &Table, prov: &Provenance) {
        let stem = if suffix.is_empty() {
            self.stem()
        } else {
            format!("{}-{suffix}", self.stem())
        };
        out.push(Artifact {
            name: format!("{stem}.csv"),
            contents: table.to_csv(prov),
        });
        out.push(Artifact {
            name: format!("{stem}.txt"),
            contents: table.to_text(prov),
        });
    }
}

/// Runs `command` without touching the file system beyond reading inputs.
pub fn execute<E: Executor>(command: Command, settings: &Settings, exec: &E) -> Result<Outcome> {
    let task = if command.needs_task() {
        Some(settings.require_task()?)
    } else {
        None
    };
    let corpus = Corpus::load(settings)?;
    let ctx = Ctx {
        command,
        settings,
        corpus: &corpus,
        exec,
        config: settings.effective().to_toml(),
    };
    match (command, task) {
        (Command::Validate, _) => validate(&ctx),
        (Command::Distances, _) => distances(&ctx),
        (Command::Correlate, _) => correlate(&ctx),
        (Command::Screen, Some(t)) => screen(&ctx, t),
        (Command::Train, Some(t)) => train(&ctx, t),
        (Command::Evaluate, Some(t)) => evaluate(&ctx, t),
        (Command::Importance, Some(t)) => importance(&ctx, t),
        (Command::Ablate, Some(t)) => ablate(&ctx, t),
        (Command::Compare, Some(t)) => compare(&ctx, t),
        (Command::Rank, Some(t)) => rank(&ctx, t),
        (Command::Rules, Some(t)) => rules(&ctx, t),
        _ => unreachable!("task presence checked above"),
    }
}

/// Runs `command` and writes its artifacts into the output directory.
pub fn run(command: Command, settings: &Settings) -> Result<Outcome> {
    let exec = Threads::new(settings.threads);
    let outcome = execute(command, settings, &exec)?;
    let _lock = OutputLock::acquire(&settings.output)?;
    for a in &outcome.artifacts {
        report::write_file(&settings.output, &a.name, &a.contents)?;
    }
    Ok(outcome)
}

fn validate<E: Executor>(ctx: &Ctx<E>) -> Result<Outcome> {
    let c = ctx.corpus;
    let mut t = Table::new("Input diagnostics", &["check", "value"]);
    let mut row = |k: &str, v: String| t.push(vec![k.to_string(), v]);
    row("languages", c.registry.len().to_string());
    row(
        "languages without coordinates",
        c.registry.iter().filter(|l| l.coordinates.is_none()).count().to_string(),
    );
    row("features in catalog", c.raw_matrix.features().len().to_string());
    row("features after policy", c.matrix.features().len().to_string());
    let known: usize = (0..c.raw_matrix.features().len()).map(|f| c.raw_matrix.known_count(f)).sum();
    row("feature values", known.to_string());
    row("score records", c.raw_scores.len().to_string());
    row("supervised records", c.raw_scores.supervised().count().to_string());
    row("records after filter", c.scores.len().to_string());
    for task in c.raw_scores.tasks() {
        let langs = c.raw_scores.for_task(task).languages().len();
        row(&format!("{task} records"), c.raw_scores.for_task(task).len().to_string());
        row(&format!("{task} records after filter"), c.scores.for_task(task).len().to_string());
        row(&format!("{task} languages"), langs.to_string());
    }
    let bare: Vec<String> = c
        .raw_scores
        .languages()
        .into_iter()
        .filter(|l| {
            let li = c.matrix.language_index(l);
            li.is_none_or(|li| (0..c.matrix.features().len()).all(|f| c.matrix.get(li, f).is_none()))
        })
        .map(|l| l.as_str().to_string())
        .collect();
    row("scored languages without feature values", bare.len().to_string());
    if let Some(d) = &c.loaded {
        row("loaded distance pairs", d.len().to_string());
    }
    if !bare.is_empty() {
        t.note(format!("without feature values: {}", bare.join(" ")));
    }
    let mut artifacts = Vec::new();
    ctx.table(&mut artifacts, "", &t, &ctx.provenance(Vec::new()));
    Ok(Outcome {
        artifacts,
        summary: format!(
            "ok: {} languages, {} features, {} score records ({} after filter)",
            c.registry.len(),
            c.raw_matrix.features().len(),
            c.raw_scores.len(),
            c.scores.len()
        ),
    })
}

fn scored_languages(scores: &ScoreTable) -> Vec<LangCode> {
    scores.languages().into_iter().collect()
}

fn distances<E: Executor>(ctx: &Ctx<E>) -> Result<Outcome> {
    let c = ctx.corpus;
    let codes = scored_languages(&c.raw_scores);
    let table = distance_table_for(&codes, &c.registry, &c.matrix, c.loaded.as_ref(), &ctx.settings.distance)?;
    let prov = ctx.provenance(Vec::new());
    let mut summary = Table::new("Distance table", &["component", "computed", "loaded"]);
    for (component, (computed, loaded)) in io::distance_provenance(&table) {
        summary.push(vec![component.to_string(), computed.to_string(), loaded.to_string()]);
    }
    summary.note(format!("{} languages, {} unordered pairs", codes.len(), table.len()));
    let mut pairs = Table::new("Pairs", &["source", "target", "syntactic", "geographic", "genetic"]);
    for (a, b, d) in table.pairs() {
        let mut row = vec![a.to_string(), b.to_string()];
        row.extend(Component::ALL.iter().map(|&k| opt(d.get(k).map(|m| m.value), num)));
        pairs.push(row);
    }
    let text = format!("{}\n{}\n{}", prov.header(), summary.body(), pairs.body());
    let csv = format!("{}{}", prov.header(), io::distances_csv(&table));
    Ok(Outcome {
        artifacts: vec![
            Artifact { name: "distances.csv".into(), contents: csv },
            Artifact { name: "distances.txt".into(), contents: text },
        ],
        summary: format!("{} pairs over {} languages", table.len(), codes.len()),
    })
}

fn correlate<E: Executor>(ctx: &Ctx<E>) -> Result<Outcome> {
    let c = ctx.corpus;
    let codes = scored_languages(&c.scores);
    let table = distance_table_for(&codes, &c.registry, &c.matrix, c.loaded.as_ref(), &ctx.settings.distance)?;
    let prov = ctx.provenance(Vec::new());
    let mut artifacts = Vec::new();
    let corr = distance_correlations(&c.scores, &table, &Component::ALL)?;
    let mut t = Table::new(
        "Pearson r between accuracy and distance",
        &["task", "syntactic", "geographic", "genetic", "pairs"],
    );
    for task in c.scores.tasks() {
        let get = |k: Component| corr.iter().find(|x| x.task == task && x.component == k);
        let pairs = get(Component::Syntactic).map_or(0, |x| x.pairs);
        let mut row = vec![task.to_string()];
        row.extend(Component::ALL.iter().map(|&k| opt(get(k).map(|x| x.r), num)));
        row.push(pairs.to_string());
        t.push(row);
    }
    ctx.table(&mut artifacts, "distances", &t, &prov);
    let mut summary = format!("{} task(s) correlated with distances", c.scores.tasks().len());
    if c.scores.tasks().len() >= 2 {
        let m = cross_task_correlation(&c.scores)?;
        let mut cols = vec!["task".to_string()];
        cols.extend(m.tasks.iter().map(|t| t.to_string()));
        let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut t = Table::new("Pearson r between tasks over shared pairs", &refs);
        for (i, task) in m.tasks.iter().enumerate() {
            let mut row = vec![task.to_string()];
            row.extend(m.matrix[i].iter().map(|&r| num(r)));
            t.push(row);
        }
        for i in 0..m.tasks.len() {
            for j in i + 1..m.tasks.len() {
                t.note(format!("{} x {}: {} shared pairs", m.tasks[i], m.tasks[j], m.shared[i][j]));
            }
        }
        ctx.table(&mut artifacts, "tasks", &t, &prov);
        summary.push_str("; cross-task matrix written");
    }
    Ok(Outcome { artifacts, summary })
}

fn screen<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let c = ctx.corpus;
    let s = ctx.settings;
    let rep = kw_feature_screen(&c.scores, &c.matrix, task, s.screen_side, &s.screen, ctx.exec)?;
    let mut t = Table::new(
        format!("Kruskal-Wallis screen, {task}, {} side", s.screen_side),
        &["rank", "feature", "name", "h", "df", "p", "p_raw", "p_permutation", "groups", "observations"],
    );
    for e in &rep.entries {
        let name = c.matrix.feature(&e.feature_id).map_or("", |f| f.name.as_str());
        t.push(vec![
            e.rank.to_string(),
            e.name.clone(),
            name.to_string(),
            num(e.h),
            e.df.to_string(),
            pval(e.p),
            pval(e.p_raw),
            opt(e.p_permutation, pval),
            e.groups.to_string(),
            e.observations.to_string(),
        ]);
    }
    t.note("Ordered by ascending p, then descending H.");
    for sk in &rep.skipped {
        t.note(format!("skipped {}: {}", sk.name, sk.reason));
    }
    let mut artifacts = Vec::new();
    ctx.table(&mut artifacts, "", &t, &ctx.provenance(Vec::new()));
    let summary = match rep.entries.first() {
        Some(top) => format!("{} features tested; top {} (p = {})", rep.entries.len(), top.name, pval(top.p)),
        None => format!("no feature testable; {} skipped", rep.skipped.len()),
    };
    Ok(Outcome { artifacts, summary })
}

fn model_row(t: &mut Table, m: &ModelConfig) {
    let depth = m.max_depth.map_or_else(|| "unlimited".to_string(), |d| d.to_string());
    t.note(format!(
        "model {}: max_depth {depth}, min_samples_leaf {}, n_trees {}, bootstrap {}, learning_rate {}, ridge {}",
        m.kind, m.min_samples_leaf, m.n_trees, m.bootstrap, m.learning_rate, m.ridge_damping
    ));
}

fn train<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let s = ctx.settings;
    let dataset = ctx.corpus.dataset(s, task)?;
    let model = fit(&dataset, &s.model, ctx.exec)?;
    let prov = ctx.provenance(Vec::new());
    let file = ModelFile::new(task, s.seed, prov.config_digest(), model.clone());
    let mut t = Table::new(format!("Trained {} model, {task}", model.kind()), &["item", "value"]);
    t.push(vec!["rows".into(), dataset.n_rows().to_string()]);
    t.push(vec!["columns".into(), dataset.n_cols().to_string()]);
    t.push(vec!["training_rmse".into(), num(model.training_rmse)]);
    t.push(vec!["trees".into(), model.trees().len().to_string()]);
    model_row(&mut t, &s.model);
    let mut artifacts = Vec::new();
    ctx.table(&mut artifacts, "", &t, &prov);
    let name = format!("model-{}.json", task.as_str().to_ascii_lowercase());
    artifacts.push(Artifact { name: name.clone(), contents: file.to_json() });
    Ok(Outcome {
        artifacts,
        summary: format!(
            "{} model on {} rows x {} columns, training RMSE {}; wrote {name}",
            model.kind(),
            dataset.n_rows(),
            dataset.n_cols(),
            num(model.training_rmse)
        ),
    })
}

fn evaluate<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let s = ctx.settings;
    let dataset = ctx.corpus.dataset(s, task)?;
    let folds = assign_folds(&dataset, &s.split)?;
    let rep = cross_validate_with(&dataset, &s.model, &folds, ctx.exec)?;
    let prov = ctx.provenance(vec![rep.fold_hash]);
    let mut t = Table::new(
        format!("{}-fold cross-validation, {task}, {} model", rep.folds, rep.model),
        &["fold", "rows", "rmse"],
    );
    for (f, rmse) in rep.fold_rmse.iter().enumerate() {
        let rows = folds.fold_of_row().iter().filter(|&&x| x == f).count();
        t.push(vec![f.to_string(), rows.to_string(), num(*rmse)]);
    }
    t.note(format!("mean RMSE {} (std {})", num(rep.mean_rmse), num(rep.std_rmse)));
    t.note(format!("grouping {}, {} rows, {} columns", s.split.grouping.as_str(), dataset.n_rows(), dataset.n_cols()));
    model_row(&mut t, &s.model);
    let mut p = Table::new("Out-of-fold predictions", &["source", "target", "fold", "accuracy", "predicted"]);
    for (r, pair) in dataset.pairs().iter().enumerate() {
        p.push(vec![
            pair.source.to_string(),
            pair.target.to_string(),
            folds.fold_of_row()[r].to_string(),
            num(dataset.target()[r]),
            num(rep.predictions[r]),
        ]);
    }
    let mut artifacts = Vec::new();
    ctx.table(&mut artifacts, "", &t, &prov);
    ctx.table(&mut artifacts, "predictions", &p, &prov);
    Ok(Outcome {
        artifacts,
        summary: format!("{task} {} CV RMSE {} (std {})", rep.model, num(rep.mean_rmse), num(rep.std_rmse)),
    })
}

const TEXT_TOP: usize = 20;

fn importance<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let s = ctx.settings;
    let dataset = ctx.corpus.dataset(s, task)?;
    let model = fit(&dataset, &s.model, ctx.exec)?;
    let tree_model = if model.kind().is_tree_based() {
        model.clone()
    } else {
        fit(&dataset, &ModelConfig::forest(s.seed), ctx.exec)?
    };
    let linear_model = if model.kind() == xfer_core::ModelKind::Linear {
        model.clone()
    } else {
        fit(&dataset, &ModelConfig::linear(), ctx.exec)?
    };
    let reports: Vec<(ImportanceReport, &'static str)> = vec![
        (impurity_importance(&tree_model)?, tree_model.kind().as_str()),
        (
            permutation_importance(&model, &dataset, s.seed, s.importance_repeats, ctx.exec)?,
            model.kind().as_str(),
        ),
        (coefficient_importance(&linear_model)?, "linear"),
    ];
    let mut full = Table::new(
        format!("Column importance, {task}"),
        &["method", "model", "rank", "column", "score", "normalized"],
    );
    let mut top = full.clone();
    top.title = format!("Column importance, {task} (top {TEXT_TOP} per method)");
    for (rep, kind) in &reports {
        let normalized = rep.normalized();
        for (i, (name, score)) in rep.ranked().into_iter().enumerate() {
            let row = vec![
                rep.method.as_str().to_string(),
                kind.to_string(),
                (i + 1).to_string(),
                name.clone(),
                num(score),
                num(normalized.score(&name).unwrap_or(0.0)),
            ];
            if i < TEXT_TOP {
                top.push(row.clone());
            }
            full.push(row);
        }
    }
    for t in [&mut full, &mut top] {
        t.note(format!(
            "permutation: mean RMSE increase over {} shuffles on the training rows",
            s.importance_repeats
        ));
        t.note("coefficient: absolute coefficient of the ridge fit; impurity: summed split gain, normalized");
    }
    let prov = ctx.provenance(Vec::new());
    let stem = ctx.stem();
    let winners: Vec<String> = reports
        .iter()
        .map(|(r, _)| format!("{} {}", r.method.as_str(), r.ranked().first().map_or("-", |x| x.0.as_str())))
        .collect();
    Ok(Outcome {
        artifacts: vec![
            Artifact { name: format!("{stem}.csv"), contents: full.to_csv(&prov) },
            Artifact { name: format!("{stem}.txt"), contents: top.to_text(&prov) },
        ],
        summary: format!("top columns: {}", winners.join(", ")),
    })
}

fn ablate<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let s = ctx.settings;
    let c = ctx.corpus;
    let table = c.task_scores(task, &s.inputs.scores)?;
    let rep = group_ablation(&table, &c.matrix, task, s.encoding, &s.model, &s.split, ctx.exec)?;
    let mut t = Table::new(
        format!("Feature-group ablation, {task}, {} model", s.model.kind),
        &["group", "columns", "rmse", "std"],
    );
    for e in &rep.entries {
        t.push(vec![e.group.label().to_string(), e.columns.to_string(), opt(e.rmse, num), opt(e.std, num)]);
    }
    t.note(format!("all groups: RMSE {} (std {})", num(rep.full_rmse), num(rep.full_std)));
    if let Some(w) = rep.winner {
        t.note(format!("best single group: {}", w.label()));
    }
    model_row(&mut t, &s.model);
    let mut artifacts = Vec::new();
    ctx.table(&mut artifacts, "", &t, &ctx.provenance(vec![rep.fold_hash]));
    Ok(Outcome {
        artifacts,
        summary: format!(
            "best group {}; all groups RMSE {}",
            rep.winner.map_or("-", |g| g.label()),
            num(rep.full_rmse)
        ),
    })
}

fn compare<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let s = ctx.settings;
    let c = ctx.corpus;
    let table = c.task_scores(task, &s.inputs.scores)?;
    let distances = c.syntactic_for(&table, s)?;
    let rep = baseline_compare(&table, &c.matrix, &distances, task, s.encoding, &s.model, &s.split, ctx.exec)?;
    let mut t = Table::new(
        format!("Features against syntactic distance, {task}, {} model", s.model.kind),
        &["arm", "columns", "rmse", "std"],
    );
    t.push(vec![
        "features".into(),
        rep.feature_columns.to_string(),
        num(rep.feature_rmse()),
        num(rep.features.std_rmse),
    ]);
    t.push(vec!["syntactic distance".into(), "1".into(), num(rep.baseline_rmse()), num(rep.baseline.std_rmse)]);
    t.note(format!("ratio (baseline / features): {}", num(rep.ratio)));
    t.note(format!("{} rows, {}-fold {} split shared by both arms", rep.rows, rep.split.folds, rep.split.grouping.as_str()));
    model_row(&mut t, &s.model);
    let mut artifacts = Vec::new();
    ctx.table(&mut artifacts, "", &t, &ctx.provenance(vec![rep.features.fold_hash]));
    Ok(Outcome {
        artifacts,
        summary: format!(
            "{task}: features RMSE {}, syntactic baseline RMSE {}, ratio {}",
            num(rep.feature_rmse()),
            num(rep.baseline_rmse()),
            num(rep.ratio)
        ),
    })
}

fn rank<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let s = ctx.settings;
    let c = ctx.corpus;
    let target = s
        .rank
        .target
        .clone()
        .ok_or_else(|| Error::config("rank needs a target language (--target or rank.target)"))?;
    let ranking: SourceRanking = match s.rank.mode {
        RankMode::Empirical => rank_empirical(&c.raw_scores, task, &target, s.rank.k)?,
        RankMode::Predicted => {
            let dataset = leave_target_out(&c.dataset(s, task)?, &target);
            if dataset.n_rows() == 0 {
                return Err(Error::Analysis(format!("no {task} training rows without {target}")));
            }
            let model = fit(&dataset, &s.model, ctx.exec)?;
            let candidates: Vec<LangCode> = c
                .raw_scores
                .for_task(task)
                .records()
                .iter()
                .map(|r| r.source.clone())
                .filter(|l| !s.filter.excluded_languages.contains(l))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            rank_predicted(&model, &c.matrix, None, Some(&c.raw_scores), task, &target, &candidates, s.rank.k)?
        }
    };
    let name_of = |l: &LangCode| c.registry.get(l).map_or_else(String::new, |x| x.name.clone());
    let mut t = Table::new(
        format!("Top {} sources for {task} target {target} ({})", s.rank.k, ranking.mode),
        &["test", "rank", "train", "name", "accuracy"],
    );
    if let Some(sup) = ranking.supervised {
        t.push(vec![target.to_string(), "sup".into(), target.to_string(), name_of(&target), num(sup)]);
    }
    for (i, r) in ranking.ranked.iter().enumerate() {
        t.push(vec![
            target.to_string(),
            (i + 1).to_string(),
            r.source.to_string(),
            name_of(&r.source),
            num(r.accuracy),
        ]);
    }
    t.note(format!("{} candidate sources", ranking.candidates));
    if s.rank.mode == RankMode::Predicted {
        t.note("model trained without any pair involving the target");
        model_row(&mut t, &s.model);
    }
    let mut artifacts = Vec::new();
    let stem = format!("{}-{}", ctx.stem(), target);
    let prov = ctx.provenance(Vec::new());
    artifacts.push(Artifact { name: format!("{stem}.csv"), contents: t.to_csv(&prov) });
    artifacts.push(Artifact { name: format!("{stem}.txt"), contents: t.to_text(&prov) });
    let list: Vec<String> = ranking
        .ranked
        .iter()
        .map(|r| format!("{} {}", r.source, num(r.accuracy)))
        .collect();
    Ok(Outcome { artifacts, summary: list.join(", ") })
}

fn rules<E: Executor>(ctx: &Ctx<E>, task: Task) -> Result<Outcome> {
    let s = ctx.settings;
    let c = ctx.corpus;
    let feature = s
        .rules
        .feature
        .as_deref()
        .ok_or_else(|| Error::config("rules needs a feature id (--feature or rules.feature)"))?;
    let rep = category_rules(
        feature,
        s.rules.side,
        task,
        &c.scores,
        &c.matrix,
        s.rules.direction,
        &s.screen,
        Some(&c.registry),
    )?;
    let mut t = Table::new(
        format!("{} ({}) by category, {task}, {} side", rep.feature_id, rep.feature_name, rep.side),
        &["category", "label", "mean", "pairs", "languages", "flagged"],
    );
    for (i, cat) in rep.categories.iter().enumerate() {
        let members: Vec<&str> = cat.members.iter().map(LangCode::as_str).collect();
        t.push(vec![
            cat.category.to_string(),
            cat.label.clone(),
            num(cat.mean),
            cat.size.to_string(),
            members.join(" "),
            if i == rep.flagged { "yes".into() } else { String::new() },
        ]);
    }
    t.note(format!("overall mean {}", num(rep.overall_mean)));
    t.note(rep.sentence.clone());
    let mut artifacts = Vec::new();
    let stem = format!("{}-{}", ctx.stem(), rep.feature_id);
    let prov = ctx.provenance(Vec::new());
    artifacts.push(Artifact { name: format!("{stem}.csv"), contents: t.to_csv(&prov) });
    artifacts.push(Artifact { name: format!("{stem}.txt"), contents: t.to_text(&prov) });
    Ok(Outcome { artifacts, summary: rep.sentence })
}
