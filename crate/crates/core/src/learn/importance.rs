//! Column importance estimators.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{FittedModel, LearnError, ModelParams};
use crate::encoding::PairDataset;
use crate::exec::Executor;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImportanceMethod {
    /// Squared-error reduction credited to each split column.
    Impurity,
    /// Absolute linear coefficients.
    Coefficient,
    /// RMSE increase after shuffling a column.
    Permutation,
}

impl ImportanceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ImportanceMethod::Impurity => "impurity",
            ImportanceMethod::Coefficient => "coefficient",
            ImportanceMethod::Permutation => "permutation",
        }
    }
}

impl fmt::Display for ImportanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Scores as computed.
    Raw,
    /// Negative scores floored at zero, then scaled to sum to one.
    SumToOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub method: ImportanceMethod,
    pub normalization: Normalization,
    /// One score per model column, in column order.
    pub scores: Vec<(String, f64)>,
}

impl ImportanceReport {
    /// Copy scaled to sum to one. All-zero reports stay all zero.
    pub fn normalized(&self) -> ImportanceReport {
        let floored: Vec<f64> = self.scores.iter().map(|(_, s)| s.max(0.0)).collect();
        let total: f64 = floored.iter().sum();
        ImportanceReport {
            method: self.method,
            normalization: Normalization::SumToOne,
            scores: self
                .scores
                .iter()
                .zip(floored)
                .map(|((name, _), s)| (name.clone(), if total > 0.0 { s / total } else { 0.0 }))
                .collect(),
        }
    }

    /// Scores sorted descending, ties by column name.
    pub fn ranked(&self) -> Vec<(String, f64)> {
        let mut out = self.scores.clone();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    pub fn score(&self, column: &str) -> Option<f64> {
        self.scores.iter().find(|(n, _)| n == column).map(|(_, s)| *s)
    }
}

fn named(model: &FittedModel, values: Vec<f64>, method: ImportanceMethod, normalization: Normalization) -> ImportanceReport {
    ImportanceReport {
        method,
        normalization,
        scores: model.column_names().into_iter().zip(values).collect(),
    }
}

/// Split-gain importance summed over the model's trees and scaled to sum to
/// one. A model with no splits scores zero everywhere.
pub fn impurity_importance(model: &FittedModel) -> Result<ImportanceReport, LearnError> {
    if !model.kind().is_tree_based() {
        return Err(LearnError::WrongModelKind {
            expected: "tree-based",
            found: model.kind(),
        });
    }
    let mut acc = alloc::vec![0.0; model.columns.len()];
    for tree in model.trees() {
        tree.accumulate_importance(&mut acc);
    }
    let raw = named(model, acc, ImportanceMethod::Impurity, Normalization::Raw);
    Ok(raw.normalized())
}

/// `|β_j|` of a linear model, unscaled.
pub fn coefficient_importance(model: &FittedModel) -> Result<ImportanceReport, LearnError> {
    match &model.params {
        ModelParams::Linear { coefficients, .. } => Ok(named(
            model,
            coefficients.iter().map(|c| c.abs()).collect(),
            ImportanceMethod::Coefficient,
            Normalization::Raw,
        )),
        _ => Err(LearnError::WrongModelKind {
            expected: "linear",
            found: model.kind(),
        }),
    }
}

/// Mean RMSE increase over `repeats` shuffles of each column, against the
/// unshuffled RMSE on `dataset`. Scores may be negative. Shuffle `r` of column
/// `j` uses its own random stream, so the result does not depend on the
/// executor.
pub fn permutation_importance<E: Executor>(
    model: &FittedModel,
    dataset: &PairDataset,
    seed: u64,
    repeats: usize,
    exec: &E,
) -> Result<ImportanceReport, LearnError> {
    model.check_columns(dataset)?;
    if dataset.n_rows() == 0 {
        return Err(LearnError::EmptyDataset);
    }
    if repeats == 0 {
        return Err(LearnError::InvalidConfig("repeats must be positive".into()));
    }
    let n = dataset.n_rows();
    let p = dataset.n_cols();
    let y = dataset.target();
    let rmse_of = |pred: &dyn Fn(usize) -> f64| {
        let sse: f64 = (0..n).map(|r| (pred(r) - y[r]) * (pred(r) - y[r])).sum();
        libm::sqrt(sse / n as f64)
    };
    let baseline = rmse_of(&|r| model.predict_row(dataset.row(r)));
    let scores = exec.map_indexed(p, |j| {
        let mut buf = alloc::vec![0.0; p];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = 0.0;
        for rep in 0..repeats {
            let mut rng = stream(seed, (j * repeats + rep) as u64);
            perm.sort_unstable();
            perm.shuffle(&mut rng);
            let mut sse = 0.0;
            for r in 0..n {
                buf.copy_from_slice(dataset.row(r));
                buf[j] = dataset.get(perm[r], j);
                let e = model.predict_row(&buf) - y[r];
                sse += e * e;
            }
            total += libm::sqrt(sse / n as f64) - baseline;
        }
        total / repeats as f64
    });
    Ok(named(model, scores, ImportanceMethod::Permutation, Normalization::Raw))
}
