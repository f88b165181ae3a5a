//! Tail-exponent estimation for per-developer contribution totals.
//!
//! For contributions with `P(X > x) ~ x^-mu`, total production of `n`
//! developers grows like `n^(1/mu)` when `mu < 1`, so the per-member output
//! grows like `n^(1/mu - 1)`. Two estimators are provided: Hill on the `k`
//! largest order statistics, and a continuous Pareto MLE whose lower cutoff
//! minimizes the Kolmogorov-Smirnov distance.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ProjectHistory;
use crate::metrics::{self, MetricsConfig, ProductionMeasure};
use crate::rng::{stream_rng, DEFAULT_SEED};
use crate::stats;

pub const MIN_TAIL_POINTS: usize = 10;
pub const DEFAULT_RESAMPLES: usize = 200;
pub const MIN_MLE_SAMPLE: usize = 50;
pub const DEFAULT_MAX_CANDIDATES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ContributionDistribution {
    values: Vec<f64>,
    pub measure: ProductionMeasure,
}

impl ContributionDistribution {
    pub fn new(values: Vec<f64>, measure: ProductionMeasure) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("empty contribution sample".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Domain(format!(
                "contributions must be finite and positive, got {bad}"
            )));
        }
        Ok(ContributionDistribution { values, measure })
    }

    /// Per-author totals under `measure`. Authors whose total is zero (or
    /// whose commits are all unmeasurable) are left out.
    pub fn from_history(history: &ProjectHistory, measure: ProductionMeasure) -> Result<Self> {
        let cfg = MetricsConfig::default();
        let mut totals: BTreeMap<&str, f64> = BTreeMap::new();
        for c in history.commits() {
            if let Ok(p) = metrics::commit_production_with(c, measure, &cfg) {
                *totals.entry(c.author.as_str()).or_insert(0.0) += p;
            }
        }
        let values = totals.into_values().filter(|v| *v > 0.0).collect();
        Self::new(values, measure)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Empirical `P(X > x)` at each distinct value, ascending in `x`.
pub fn ccdf(d: &ContributionDistribution) -> Vec<(f64, f64)> {
    let mut sorted = d.values.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        while i < sorted.len() && sorted[i] == x {
            i += 1;
        }
        out.push((x, (sorted.len() - i) as f64 / n));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    Hill,
    ParetoMle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub method: TailMethod,
    pub mu: f64,
    pub xmin: f64,
    pub k: usize,
    /// 95% bootstrap percentile interval `[lo, hi]`.
    pub ci: [f64; 2],
}

impl TailFit {
    pub fn ci_low(&self) -> f64 {
        self.ci[0]
    }

    pub fn ci_high(&self) -> f64 {
        self.ci[1]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TailConfig {
    pub min_tail: usize,
    pub resamples: usize,
    pub seed: u64,
    /// Cap on the number of cutoffs the MLE scan evaluates; candidates are
    /// thinned evenly in rank when exceeded. `None` scans every distinct value.
    pub max_candidates: Option<usize>,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig {
            min_tail: MIN_TAIL_POINTS,
            resamples: DEFAULT_RESAMPLES,
            seed: DEFAULT_SEED,
            max_candidates: Some(DEFAULT_MAX_CANDIDATES),
        }
    }
}

fn desc(a: &f64, b: &f64) -> Ordering {
    b.total_cmp(a)
}

/// Hill estimate from values sorted descending: `k / Σ ln(x_i / x_k)`.
fn hill_from_sorted_desc(sorted: &[f64], k: usize) -> Option<f64> {
    let threshold = sorted[k];
    let sum: f64 = sorted[..k].iter().map(|&x| (x / threshold).ln()).sum();
    (sum > 0.0).then(|| k as f64 / sum)
}

pub fn hill_estimator(d: &ContributionDistribution, k: usize, cfg: &TailConfig) -> Result<TailFit> {
    let n = d.len();
    if k < cfg.min_tail {
        return Err(Error::InsufficientTail {
            need: cfg.min_tail,
            got: k,
        });
    }
    if k >= n {
        return Err(Error::Domain(format!(
            "k = {k} must be smaller than the sample size {n}"
        )));
    }
    let mut sorted = d.values.clone();
    sorted.sort_by(desc);
    let mu = hill_from_sorted_desc(&sorted, k).ok_or_else(|| {
        Error::DegenerateTail(format!("the {k} largest values all equal the threshold"))
    })?;

    let mut replicates: Vec<f64> = (0..cfg.resamples)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = stream_rng(cfg.seed, r as u64);
            let mut sample: Vec<f64> = (0..n).map(|_| d.values[rng.random_range(0..n)]).collect();
            // Only the top k+1 order statistics matter.
            sample.select_nth_unstable_by(k, desc);
            let (top, rest) = sample.split_at_mut(k);
            let threshold = rest[0];
            let sum: f64 = top.iter().map(|&x| (x / threshold).ln()).sum();
            (sum > 0.0).then(|| k as f64 / sum)
        })
        .collect();
    let ci = bootstrap_ci(&mut replicates, mu);
    Ok(TailFit {
        method: TailMethod::Hill,
        mu,
        xmin: sorted[k],
        k,
        ci,
    })
}

fn bootstrap_ci(replicates: &mut [f64], point: f64) -> [f64; 2] {
    if replicates.is_empty() {
        return [point, point];
    }
    let (lo, hi) = stats::percentile_interval(replicates, 0.95);
    [lo, hi]
}

/// Continuous Pareto MLE above `xmin`, and its KS distance to the tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffScore {
    pub xmin: f64,
    pub k: usize,
    pub mu: f64,
    pub ks: f64,
}

/// KS distance between the empirical CDF of a tail and the Pareto CDF
/// `1 - (x/xmin)^-mu`. `tail` is sorted ascending with every value `>= xmin`
/// and `ln_tail` holds its logarithms. Ties are handled by comparing both
/// one-sided limits at each distinct value.
fn ks_distance(tail: &[f64], ln_tail: &[f64], xmin: f64, mu: f64) -> f64 {
    let k = tail.len() as f64;
    let ln_xmin = xmin.ln();
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < tail.len() {
        let x = tail[i];
        let fitted = 1.0 - (-mu * (ln_tail[i] - ln_xmin)).exp();
        let below = i as f64 / k;
        while i < tail.len() && tail[i] == x {
            i += 1;
        }
        let at = i as f64 / k;
        d = d.max((at - fitted).abs()).max((below - fitted).abs());
    }
    d
}

fn score_cutoff(sorted: &[f64], ln_sorted: &[f64], suffix_log: &[f64], start: usize) -> Option<CutoffScore> {
    let xmin = sorted[start];
    let k = sorted.len() - start;
    let denom = suffix_log[start] - k as f64 * xmin.ln();
    if denom <= 0.0 {
        return None;
    }
    let mu = k as f64 / denom;
    Some(CutoffScore {
        xmin,
        k,
        mu,
        ks: ks_distance(&sorted[start..], &ln_sorted[start..], xmin, mu),
    })
}

/// Scores every admissible cutoff (subject to `cfg.max_candidates`), in
/// ascending `xmin` order.
pub fn scan_cutoffs(d: &ContributionDistribution, cfg: &TailConfig) -> Vec<CutoffScore> {
    let mut sorted = d.values.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();

    let ln_sorted: Vec<f64> = sorted.iter().map(|x| x.ln()).collect();
    let mut suffix_log = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix_log[i] = suffix_log[i + 1] + ln_sorted[i];
    }

    // First index of every distinct value that leaves enough tail points.
    let mut starts: Vec<usize> = Vec::new();
    for i in 0..n {
        if (i == 0 || sorted[i] != sorted[i - 1]) && n - i >= cfg.min_tail {
            starts.push(i);
        }
    }
    if let Some(max) = cfg.max_candidates {
        if max >= 1 && starts.len() > max {
            let m = starts.len();
            let mut thinned: Vec<usize> = (0..max)
                .map(|j| starts[if max == 1 { 0 } else { j * (m - 1) / (max - 1) }])
                .collect();
            thinned.dedup();
            starts = thinned;
        }
    }

    starts
        .par_iter()
        .filter_map(|&s| score_cutoff(&sorted, &ln_sorted, &suffix_log, s))
        .collect()
}

pub fn pareto_mle_fit(d: &ContributionDistribution, cfg: &TailConfig) -> Result<TailFit> {
    if d.len() < MIN_MLE_SAMPLE {
        return Err(Error::InsufficientData(format!(
            "Pareto MLE needs at least {MIN_MLE_SAMPLE} values, got {}",
            d.len()
        )));
    }
    let scores = scan_cutoffs(d, cfg);
    // Strict `<` keeps the smallest cutoff on ties.
    let best = scores
        .iter()
        .fold(None::<&CutoffScore>, |acc, s| match acc {
            Some(b) if b.ks <= s.ks => Some(b),
            _ => Some(s),
        })
        .copied()
        .ok_or_else(|| {
            let min = min_value(d);
            Error::InsufficientTail {
                need: cfg.min_tail,
                got: d.values.iter().filter(|v| **v > min).count(),
            }
        })?;

    let tail: Vec<f64> = d.values.iter().copied().filter(|&x| x >= best.xmin).collect();
    let k = tail.len();
    let ln_xmin = best.xmin.ln();
    let mut replicates: Vec<f64> = (0..cfg.resamples)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = stream_rng(cfg.seed, r as u64);
            let s: f64 = (0..k)
                .map(|_| tail[rng.random_range(0..k)].ln() - ln_xmin)
                .sum();
            (s > 0.0).then(|| k as f64 / s)
        })
        .collect();
    let ci = bootstrap_ci(&mut replicates, best.mu);
    Ok(TailFit {
        method: TailMethod::ParetoMle,
        mu: best.mu,
        xmin: best.xmin,
        k: best.k,
        ci,
    })
}

fn min_value(d: &ContributionDistribution) -> f64 {
    d.values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Exponent of per-member productivity growth, `n^(1/mu - 1)` below one and
/// flat above.
pub fn productivity_exponent(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(if mu < 1.0 { 1.0 / mu - 1.0 } else { 0.0 })
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("tail exponent must be positive, got {mu}")))
    }
}

/// Ordered from the heaviest tail to the lightest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `mu < 0.5`: output per member grows with team size.
    SuperlinearProductivity,
    /// `0.5 <= mu < 1`: total output grows faster than team size.
    SuperlinearProduction,
    /// `mu >= 1`: constant output per member.
    LinearProduction,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SuperlinearProductivity => "superlinear_productivity",
            Regime::SuperlinearProduction => "superlinear_production",
            Regime::LinearProduction => "linear_production",
        })
    }
}

pub fn classify_regime(mu: f64) -> Result<Regime> {
    check_mu(mu)?;
    Ok(if mu < 0.5 {
        Regime::SuperlinearProductivity
    } else if mu < 1.0 {
        Regime::SuperlinearProduction
    } else {
        Regime::LinearProduction
    })
}

/// Default Hill tail size for a sample of `n`: `max(10, floor(sqrt(n)))`.
pub fn default_hill_k(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(MIN_TAIL_POINTS)
}
