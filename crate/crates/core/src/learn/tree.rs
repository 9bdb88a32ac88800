//! CART regression trees with squared-error splits.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_dataset, stable_mean, FittedModel, LearnError, ModelConfig, ModelParams};
use crate::encoding::PairDataset;
use crate::rng::StreamRng;

/// Columns with at most this many distinct values are split from histograms
/// instead of sorting.
const MAX_BINS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    /// Rows with `x[column] <= threshold` go left.
    Split {
        column: usize,
        threshold: f64,
        left: usize,
        right: usize,
        samples: usize,
        /// Drop in summed squared error achieved by the split.
        gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    /// Rows (with bootstrap repeats) the tree was grown on.
    samples: usize,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    column,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*column] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Adds each split's squared-error drop, scaled by the tree's sample
    /// count, to its column's slot.
    pub fn accumulate_importance(&self, out: &mut [f64]) {
        let n = self.samples.max(1) as f64;
        for node in &self.nodes {
            if let Node::Split { column, gain, .. } = node {
                out[*column] += gain.max(0.0) / n;
            }
        }
    }
}

/// Best split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub column: usize,
    pub threshold: f64,
    pub gain: f64,
}

impl SplitCandidate {
    /// Higher gain wins; gains within `tol` tie, and ties go to the lower
    /// column, then the lower threshold.
    fn beats(&self, other: &SplitCandidate, tol: f64) -> bool {
        self.gain > other.gain + tol
            || ((self.gain - other.gain).abs() <= tol
                && (self.column < other.column || (self.column == other.column && self.threshold < other.threshold)))
    }
}

struct Bins {
    /// Sorted distinct values of the column.
    values: Vec<f64>,
    /// Bin of every row.
    codes: Vec<u8>,
}

/// Design matrix prepared for repeated tree growing.
pub(crate) struct TreeData<'a> {
    x: &'a [f64],
    n_rows: usize,
    n_cols: usize,
    bins: Vec<Option<Bins>>,
}

impl<'a> TreeData<'a> {
    pub(crate) fn new(dataset: &'a PairDataset) -> Self {
        let n_rows = dataset.n_rows();
        let n_cols = dataset.n_cols();
        let x = dataset.design();
        let bins = (0..n_cols)
            .map(|c| {
                let mut values: Vec<f64> = (0..n_rows).map(|r| x[r * n_cols + c]).collect();
                values.sort_by(f64::total_cmp);
                values.dedup();
                if values.len() > MAX_BINS {
                    return None;
                }
                let codes = (0..n_rows)
                    .map(|r| {
                        let v = x[r * n_cols + c];
                        values.partition_point(|&u| u < v) as u8
                    })
                    .collect();
                Some(Bins { values, codes })
            })
            .collect();
        TreeData {
            x,
            n_rows,
            n_cols,
            bins,
        }
    }

    pub(crate) fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub(crate) fn n_cols(&self) -> usize {
        self.n_cols
    }

    fn value(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.n_cols + col]
    }
}

/// Which columns a node may split on.
pub(crate) enum ColumnDraw<'r> {
    All,
    /// Visit columns in random order and stop after `m` non-constant ones.
    Random { m: usize, rng: &'r mut StreamRng },
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

struct Scratch {
    count: Vec<usize>,
    sum: Vec<f64>,
    pairs: Vec<(f64, f64)>,
    order: Vec<usize>,
    tmp: Vec<usize>,
}

struct Grower<'a, 'r> {
    data: &'a TreeData<'a>,
    y: &'a [f64],
    params: &'a GrowParams,
    draw: ColumnDraw<'r>,
    scratch: Scratch,
    nodes: Vec<Node>,
}

/// Grows one tree on `rows` (which may repeat) against targets `y`.
pub(crate) fn grow(data: &TreeData<'_>, y: &[f64], mut rows: Vec<usize>, params: &GrowParams, draw: ColumnDraw<'_>) -> Tree {
    let samples = rows.len();
    let mut grower = Grower {
        data,
        y,
        params,
        draw,
        scratch: Scratch {
            count: vec![0; MAX_BINS],
            sum: vec![0.0; MAX_BINS],
            pairs: Vec::new(),
            order: (0..data.n_cols).collect(),
            tmp: Vec::new(),
        },
        nodes: Vec::new(),
    };
    if samples > 0 {
        grower.build(&mut rows, 0);
    } else {
        grower.nodes.push(Node::Leaf { value: 0.0, samples: 0 });
    }
    Tree {
        nodes: grower.nodes,
        samples,
    }
}

impl Grower<'_, '_> {
    fn build(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let n = rows.len();
        let y = self.y;
        let mean = stable_mean(rows.iter().map(|&r| y[r]));
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean, samples: n });

        let pure = rows.iter().all(|&r| y[r] == y[rows[0]]);
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || n < 2 * self.params.min_samples_leaf {
            return id;
        }
        let Some(split) = self.find_split(rows, mean) else {
            return id;
        };

        let tmp = &mut self.scratch.tmp;
        tmp.clear();
        let data = self.data;
        let mut n_left = 0;
        for i in 0..rows.len() {
            let r = rows[i];
            if data.value(r, split.column) <= split.threshold {
                rows[n_left] = r;
                n_left += 1;
            } else {
                tmp.push(r);
            }
        }
        rows[n_left..].copy_from_slice(tmp);
        let (l, r) = rows.split_at_mut(n_left);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            column: split.column,
            threshold: split.threshold,
            left,
            right,
            samples: n,
            gain: split.gain,
        };
        id
    }

    fn find_split(&mut self, rows: &[usize], mean: f64) -> Option<SplitCandidate> {
        let p = self.data.n_cols;
        let tol = gain_tolerance(self.y, rows, mean);
        let mut best: Option<SplitCandidate> = None;
        let consider = |cand: Option<SplitCandidate>, best: &mut Option<SplitCandidate>| {
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.beats(b, tol)) {
                    *best = Some(c);
                }
            }
        };
        match &mut self.draw {
            ColumnDraw::All => {
                for col in 0..p {
                    let (_, cand) =
                        column_split(self.data, self.y, rows, mean, tol, col, self.params.min_samples_leaf, &mut self.scratch);
                    consider(cand, &mut best);
                }
            }
            ColumnDraw::Random { m, rng } => {
                let mut evaluated = 0;
                for k in 0..p {
                    if evaluated >= *m {
                        break;
                    }
                    let j = rng.gen_range(k..p);
                    self.scratch.order.swap(k, j);
                    let col = self.scratch.order[k];
                    let (varies, cand) =
                        column_split(self.data, self.y, rows, mean, tol, col, self.params.min_samples_leaf, &mut self.scratch);
                    if varies {
                        evaluated += 1;
                    }
                    consider(cand, &mut best);
                }
            }
        }
        best
    }
}

/// Rounding slack for comparing split gains at a node.
fn gain_tolerance(y: &[f64], rows: &[usize], mean: f64) -> f64 {
    let sse: f64 = rows.iter().map(|&r| (y[r] - mean) * (y[r] - mean)).sum();
    1e-12 * sse
}

/// Best threshold on one column. The flag says whether the column varies
/// within the node.
#[allow(clippy::too_many_arguments)]
fn column_split(
    data: &TreeData<'_>,
    y: &[f64],
    rows: &[usize],
    mean: f64,
    tol: f64,
    col: usize,
    min_leaf: usize,
    scratch: &mut Scratch,
) -> (bool, Option<SplitCandidate>) {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| y[r] - mean).sum();
    let base = total * total / n as f64;
    let mut best: Option<SplitCandidate> = None;
    let mut offer = |gain: f64, lo: f64, hi: f64| {
        let mut threshold = lo + (hi - lo) / 2.0;
        if threshold >= hi {
            threshold = lo;
        }
        if best.as_ref().is_none_or(|b| gain > b.gain + tol) {
            best = Some(SplitCandidate {
                column: col,
                threshold,
                gain,
            });
        }
    };

    if let Some(bins) = &data.bins[col] {
        let k = bins.values.len();
        let count = &mut scratch.count[..k];
        let sum = &mut scratch.sum[..k];
        count.fill(0);
        sum.fill(0.0);
        for &r in rows {
            let b = bins.codes[r] as usize;
            count[b] += 1;
            sum[b] += y[r] - mean;
        }
        let present = count.iter().filter(|&&c| c > 0).count();
        if present < 2 {
            return (false, None);
        }
        let mut nl = 0usize;
        let mut sl = 0.0;
        let mut prev: Option<usize> = None;
        for b in 0..k {
            if count[b] == 0 {
                continue;
            }
            if let Some(pb) = prev {
                let nr = n - nl;
                if nl >= min_leaf && nr >= min_leaf {
                    let sr = total - sl;
                    let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - base;
                    offer(gain, bins.values[pb], bins.values[b]);
                }
            }
            nl += count[b];
            sl += sum[b];
            prev = Some(b);
            if n - nl < min_leaf {
                break;
            }
        }
        return (true, best);
    }

    let pairs = &mut scratch.pairs;
    pairs.clear();
    pairs.extend(rows.iter().map(|&r| (data.value(r, col), y[r] - mean)));
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pairs[0].0 == pairs[n - 1].0 {
        return (false, None);
    }
    let mut sl = 0.0;
    for i in 0..n - 1 {
        sl += pairs[i].1;
        let nl = i + 1;
        let nr = n - nl;
        if nr < min_leaf {
            break;
        }
        if nl < min_leaf || pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        let sr = total - sl;
        let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - base;
        offer(gain, pairs[i].0, pairs[i + 1].0);
    }
    (true, best)
}

/// Best split over all columns for the given rows, as the tree grower would
/// choose it at a node holding exactly those rows.
pub fn best_split(dataset: &PairDataset, rows: &[usize], min_samples_leaf: usize) -> Option<SplitCandidate> {
    if rows.len() < 2 * min_samples_leaf.max(1) {
        return None;
    }
    let data = TreeData::new(dataset);
    let y = dataset.target();
    let mean = stable_mean(rows.iter().map(|&r| y[r]));
    let mut scratch = Scratch {
        count: vec![0; MAX_BINS],
        sum: vec![0.0; MAX_BINS],
        pairs: Vec::new(),
        order: Vec::new(),
        tmp: Vec::new(),
    };
    let tol = gain_tolerance(y, rows, mean);
    let mut best: Option<SplitCandidate> = None;
    for col in 0..data.n_cols {
        if let (_, Some(c)) = column_split(&data, y, rows, mean, tol, col, min_samples_leaf.max(1), &mut scratch) {
            if best.as_ref().is_none_or(|b| c.beats(b, tol)) {
                best = Some(c);
            }
        }
    }
    best
}

/// Single CART tree on all rows and columns.
pub fn fit_tree(dataset: &PairDataset, config: &ModelConfig) -> Result<FittedModel, LearnError> {
    check_dataset(dataset, config)?;
    let data = TreeData::new(dataset);
    let params = GrowParams {
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
    };
    let tree = grow(&data, dataset.target(), (0..dataset.n_rows()).collect(), &params, ColumnDraw::All);
    Ok(FittedModel::new(config.clone(), dataset, ModelParams::Tree(tree)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn data(rows: &[Vec<f64>], y: &[f64]) -> PairDataset {
        let names: Vec<alloc::string::String> = (0..rows[0].len()).map(|i| alloc::format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        PairDataset::from_numeric(&refs, rows, y.to_vec()).unwrap()
    }

    #[test]
    fn splits_at_midpoint() {
        let d = data(&[vec![1.0], vec![2.0], vec![4.0], vec![5.0]], &[0.0, 0.0, 1.0, 1.0]);
        let s = best_split(&d, &[0, 1, 2, 3], 1).unwrap();
        assert_eq!(s.column, 0);
        assert_eq!(s.threshold, 3.0);
        assert!((s.gain - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_lower_column() {
        let d = data(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[0.0, 1.0]);
        assert_eq!(best_split(&d, &[0, 1], 1).unwrap().column, 0);
    }

    #[test]
    fn respects_min_leaf_and_depth() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let d = data(&rows, &y);
        let mut c = ModelConfig::tree();
        c.min_samples_leaf = 3;
        let m = fit_tree(&d, &c).unwrap();
        for node in m.trees()[0].nodes() {
            if let Node::Leaf { samples, .. } = node {
                assert!(*samples >= 3);
            }
        }
        c.min_samples_leaf = 1;
        c.max_depth = Some(2);
        let m = fit_tree(&d, &c).unwrap();
        assert!(m.trees()[0].depth() <= 2);
        assert_eq!(m.trees()[0].leaf_count(), 4);
    }

    #[test]
    fn memorizes_unique_rows() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [0.0, 1.0, 1.0, 0.0];
        let d = data(&rows, &y);
        let m = fit_tree(&d, &ModelConfig::tree()).unwrap();
        for (r, t) in y.iter().enumerate() {
            assert_eq!(m.predict_row(d.row(r)), *t);
        }
    }

    #[test]
    fn binned_and_sorted_paths_agree() {
        let rows: Vec<Vec<f64>> = (0..200).map(|i| vec![(i % 97) as f64 * 0.5, (i % 5) as f64]).collect();
        let y: Vec<f64> = (0..200).map(|i| ((i * 37) % 11) as f64).collect();
        let d = data(&rows, &y);
        let all: Vec<usize> = (0..200).collect();
        let s = best_split(&d, &all, 1).unwrap();
        let mut brute = SplitCandidate {
            column: 0,
            threshold: 0.0,
            gain: f64::NEG_INFINITY,
        };
        for c in 0..2 {
            let mut vals: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let sse = |idx: &[usize]| {
                    let m = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
                    idx.iter().map(|&i| (y[i] - m) * (y[i] - m)).sum::<f64>()
                };
                let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| rows[i][c] <= t);
                let gain = sse(&all) - sse(&l) - sse(&r);
                if gain > brute.gain + 1e-9 {
                    brute = SplitCandidate { column: c, threshold: t, gain };
                }
            }
        }
        assert_eq!((s.column, s.threshold), (brute.column, brute.threshold));
        assert!((s.gain - brute.gain).abs() < 1e-8);
    }
}
