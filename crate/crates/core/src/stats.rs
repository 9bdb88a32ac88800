//! Rank statistics, Kruskal-Wallis H, chi-squared tails and error metrics.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("input is constant")]
    ConstantInput,
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("all pooled observations are identical")]
    DegenerateData,
}

/// 1-based average ranks; tied values share the mean of their positions.
pub fn rank_with_ties(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    Ok(ranks)
}

/// Sizes of the runs of equal values, for tie correction.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        if end - start > 1 {
            out.push(end - start);
        }
        start = end;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwResult {
    pub h: f64,
    pub df: u32,
    pub p: f64,
    pub group_sizes: Vec<usize>,
    /// `1 - sum(t^3 - t) / (N^3 - N)`; 1 when there are no ties.
    pub tie_correction: f64,
}

fn check_groups<G: AsRef<[f64]>>(groups: &[G]) -> Result<usize, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    let mut n = 0;
    for (i, g) in groups.iter().enumerate() {
        let g = g.as_ref();
        if g.is_empty() {
            return Err(StatsError::EmptyGroup(i));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        n += g.len();
    }
    if n < 3 {
        return Err(StatsError::TooShort { needed: 3, got: n });
    }
    Ok(n)
}

/// Uncorrected H from pooled ranks laid out group after group.
fn h_statistic(ranks: &[f64], sizes: &[usize]) -> f64 {
    let n = ranks.len() as f64;
    let center = (n + 1.0) / 2.0;
    let mut offset = 0;
    let mut between = 0.0;
    for &size in sizes {
        let mean_rank = ranks[offset..offset + size].iter().sum::<f64>() / size as f64;
        between += size as f64 * (mean_rank - center) * (mean_rank - center);
        offset += size;
    }
    12.0 / (n * (n + 1.0)) * between
}

/// Kruskal-Wallis H test with tie correction; p from the chi-squared tail with
/// `groups - 1` degrees of freedom.
pub fn kruskal_wallis<G: AsRef<[f64]>>(groups: &[G]) -> Result<KwResult, StatsError> {
    let n = check_groups(groups)?;
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    let sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();
    let ranks = rank_with_ties(&pooled)?;

    let nf = n as f64;
    let ties: f64 = tie_sizes(&pooled)
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let correction = 1.0 - ties / (nf * nf * nf - nf);
    if correction <= 0.0 {
        return Err(StatsError::DegenerateData);
    }
    let h = (h_statistic(&ranks, &sizes) / correction).max(0.0);
    let df = (groups.len() - 1) as u32;
    Ok(KwResult {
        h,
        df,
        p: chi_squared_sf(h, df),
        group_sizes: sizes,
        tie_correction: correction,
    })
}

/// Monte Carlo permutation p-value for the Kruskal-Wallis statistic:
/// `(1 + #{H* >= H}) / (1 + resamples)` over random relabellings of the
/// pooled observations.
pub fn kruskal_wallis_permutation<G: AsRef<[f64]>>(
    groups: &[G],
    resamples: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    let observed = kruskal_wallis(groups)?;
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    let ranks = rank_with_ties(&pooled)?;
    let sizes = observed.group_sizes.clone();
    let observed_raw = h_statistic(&ranks, &sizes);
    let tolerance = 1e-12 * observed_raw.max(1.0);
    let mut shuffled = ranks.clone();
    let mut rng = rng::stream(seed, 0);
    let mut hits = 0usize;
    for _ in 0..resamples {
        shuffled.shuffle(&mut rng);
        if h_statistic(&shuffled, &sizes) >= observed_raw - tolerance {
            hits += 1;
        }
    }
    Ok((hits + 1) as f64 / (resamples + 1) as f64)
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::sin(pi * x).abs()) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (x + 0.5) * libm::log(t) - t + libm::log(acc)
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Upper regularized incomplete gamma `Q(a, x)`.
///
/// Series for the lower function when `x < a + 1`, Lentz continued fraction
/// for the upper one otherwise.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let log_prefactor = -x + a * libm::log(x) - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..GAMMA_MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * GAMMA_EPS {
                break;
            }
        }
        (1.0 - sum * libm::exp(log_prefactor)).clamp(0.0, 1.0)
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut frac = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            frac *= delta;
            if (delta - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        (libm::exp(log_prefactor) * frac).clamp(0.0, 1.0)
    }
}

/// Upper tail `P(X >= x)` of a chi-squared variable with `df` degrees of freedom.
pub fn chi_squared_sf(x: f64, df: u32) -> f64 {
    assert!(df >= 1, "chi-squared needs df >= 1");
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(f64::from(df) / 2.0, x / 2.0)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    libm::sqrt(ss / (values.len() - 1) as f64)
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: x.len() });
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64, StatsError> {
    if pred.len() != actual.len() {
        return Err(StatsError::LengthMismatch(pred.len(), actual.len()));
    }
    if pred.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let sse: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok(libm::sqrt(sse / pred.len() as f64))
}
