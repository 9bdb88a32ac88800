use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::corpus::{ScoreTable, Task};
use crate::distance::{Component, PairDistances};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCorrelation {
    pub task: Task,
    pub component: Component,
    pub r: f64,
    pub pairs: usize,
}

/// Pearson r between accuracy and each distance component, per task.
pub fn distance_correlations(
    scores: &ScoreTable,
    distances: &PairDistances,
    components: &[Component],
) -> Result<Vec<DistanceCorrelation>, AnalysisError> {
    let mut out = Vec::new();
    for task in scores.tasks() {
        let table = scores.for_task(task);
        let acc: Vec<f64> = table.records().iter().map(|r| r.accuracy).collect();
        for &component in components {
            let dist = table
                .records()
                .iter()
                .map(|r| distances.get(&r.source, &r.target, component))
                .collect::<Result<Vec<f64>, _>>()?;
            out.push(DistanceCorrelation {
                task,
                component,
                r: stats::pearson(&acc, &dist)?,
                pairs: acc.len(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskCorrelation {
    pub tasks: Vec<Task>,
    /// `matrix[i][j]` is Pearson r over the pairs both tasks score.
    pub matrix: Vec<Vec<f64>>,
    pub shared: Vec<Vec<usize>>,
}

/// Task-by-task Pearson correlation of accuracies over shared (source, target)
/// pairs.
pub fn cross_task_correlation(scores: &ScoreTable) -> Result<TaskCorrelation, AnalysisError> {
    let tasks: Vec<Task> = scores.tasks().into_iter().collect();
    if tasks.len() < 2 {
        return Err(AnalysisError::TooFewTasks(tasks.len()));
    }
    let t = tasks.len();
    let mut matrix = alloc::vec![alloc::vec![1.0; t]; t];
    let mut shared = alloc::vec![alloc::vec![0; t]; t];
    for i in 0..t {
        shared[i][i] = scores.for_task(tasks[i]).len();
        for j in i + 1..t {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for rec in scores.for_task(tasks[i]).records() {
                if let Some(other) = scores.get(tasks[j], &rec.source, &rec.target) {
                    a.push(rec.accuracy);
                    b.push(other.accuracy);
                }
            }
            if a.is_empty() {
                return Err(AnalysisError::NoSharedPairs { a: tasks[i], b: tasks[j] });
            }
            let r = stats::pearson(&a, &b)?;
            matrix[i][j] = r;
            matrix[j][i] = r;
            shared[i][j] = a.len();
            shared[j][i] = a.len();
        }
    }
    Ok(TaskCorrelation { tasks, matrix, shared })
}
