//! Production measures and per-window (n, P) observations.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CommitRecord, ProjectHistory};
use crate::windows::{self, ActivityWindow, TeamDefinition};

/// Default per-side input cap for edit distances (1 MiB).
pub const DEFAULT_SIZE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductionMeasure {
    Commits,
    LocAdded,
    LocDeleted,
    LocTotal,
    LevenshteinDiff,
}

impl ProductionMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            ProductionMeasure::Commits => "commits",
            ProductionMeasure::LocAdded => "loc_added",
            ProductionMeasure::LocDeleted => "loc_deleted",
            ProductionMeasure::LocTotal => "loc_total",
            ProductionMeasure::LevenshteinDiff => "levenshtein_diff",
        }
    }
}

impl fmt::Display for ProductionMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProductionMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "commits" => ProductionMeasure::Commits,
            "loc" | "loc_total" => ProductionMeasure::LocTotal,
            "loc_added" => ProductionMeasure::LocAdded,
            "loc_deleted" => ProductionMeasure::LocDeleted,
            "lev" | "levenshtein" | "levenshtein_diff" => ProductionMeasure::LevenshteinDiff,
            other => return Err(Error::Config(format!("unknown measure `{other}`"))),
        })
    }
}

/// Unit-cost insert/delete/substitute edit distance over UTF-8 bytes.
pub fn levenshtein_distance(a: &str, b: &str) -> usize {
    levenshtein_bytes(a.as_bytes(), b.as_bytes())
}

/// As [`levenshtein_distance`], refusing inputs longer than `cap` bytes.
pub fn levenshtein_capped(a: &str, b: &str, cap: usize) -> Result<usize> {
    let longest = a.len().max(b.len());
    if longest > cap {
        return Err(Error::MeasureUnavailable {
            commit: String::new(),
            reason: format!("diff side of {longest} bytes exceeds cap of {cap} bytes"),
        });
    }
    Ok(levenshtein_distance(a, b))
}

fn levenshtein_bytes(a: &[u8], b: &[u8]) -> usize {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);

    // Rows run over the shorter input.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut cur = vec![0usize; short.len() + 1];
    for (i, &lc) in long.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let substitute = prev[j] + usize::from(lc != sc);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

#[derive(Debug, Clone, Copy)]
pub struct MetricsConfig {
    pub size_cap: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

pub fn commit_production(c: &CommitRecord, m: ProductionMeasure) -> Result<f64> {
    commit_production_with(c, m, &MetricsConfig::default())
}

pub fn commit_production_with(
    c: &CommitRecord,
    m: ProductionMeasure,
    cfg: &MetricsConfig,
) -> Result<f64> {
    Ok(match m {
        ProductionMeasure::Commits => 1.0,
        ProductionMeasure::LocAdded => c.lines_added as f64,
        ProductionMeasure::LocDeleted => c.lines_deleted as f64,
        ProductionMeasure::LocTotal => (c.lines_added + c.lines_deleted) as f64,
        ProductionMeasure::LevenshteinDiff => {
            let files = c.diff_payload.as_ref().ok_or_else(|| Error::MeasureUnavailable {
                commit: c.id.clone(),
                reason: "no diff payload".into(),
            })?;
            let mut total = 0usize;
            for f in files {
                total += levenshtein_capped(&f.old, &f.new, cfg.size_cap).map_err(|e| match e {
                    Error::MeasureUnavailable { reason, .. } => Error::MeasureUnavailable {
                        commit: c.id.clone(),
                        reason,
                    },
                    other => other,
                })?;
            }
            total as f64
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowObservation {
    pub start_ts: i64,
    pub end_ts: i64,
    pub n: usize,
    pub production: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub measure: ProductionMeasure,
    pub window_length: i64,
    /// One entry per non-empty window.
    pub observations: Vec<WindowObservation>,
    pub total_windows: usize,
    pub empty_windows: usize,
    pub counted_commits: usize,
    /// Commits for which the measure could not be computed.
    pub unavailable_commits: usize,
}

impl ObservationSet {
    /// Share of commits whose production could be measured.
    pub fn coverage(&self) -> f64 {
        let total = self.counted_commits + self.unavailable_commits;
        if total == 0 {
            1.0
        } else {
            self.counted_commits as f64 / total as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("start_ts,end_ts,n,measure,production\n");
        for o in &self.observations {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                o.start_ts, o.end_ts, o.n, self.measure, o.production
            );
        }
        out
    }
}

pub fn window_observations(
    history: &ProjectHistory,
    def: TeamDefinition,
    m: ProductionMeasure,
) -> Result<ObservationSet> {
    let series = windows::active_team_series(history, def)?;
    let length = series.first().map(|w| w.end_ts - w.start_ts).unwrap_or(0);
    Ok(observations_from_windows(
        history,
        &series,
        length,
        m,
        &MetricsConfig::default(),
    ))
}

/// Sums per-commit production inside each non-empty window.
pub fn observations_from_windows(
    history: &ProjectHistory,
    series: &[ActivityWindow],
    window_length: i64,
    m: ProductionMeasure,
    cfg: &MetricsConfig,
) -> ObservationSet {
    let per_commit: Vec<Option<f64>> = if m == ProductionMeasure::LevenshteinDiff {
        history
            .commits()
            .par_iter()
            .map(|c| commit_production_with(c, m, cfg).ok())
            .collect()
    } else {
        history
            .commits()
            .iter()
            .map(|c| commit_production_with(c, m, cfg).ok())
            .collect()
    };

    let mut observations = Vec::new();
    let mut empty_windows = 0;
    for w in series {
        if w.n() == 0 {
            empty_windows += 1;
            continue;
        }
        let production = per_commit[w.commit_range.clone()]
            .iter()
            .flatten()
            .sum::<f64>();
        observations.push(WindowObservation {
            start_ts: w.start_ts,
            end_ts: w.end_ts,
            n: w.n(),
            production,
        });
    }
    let unavailable_commits = per_commit.iter().filter(|p| p.is_none()).count();
    ObservationSet {
        measure: m,
        window_length,
        observations,
        total_windows: series.len(),
        empty_windows,
        counted_commits: per_commit.len() - unavailable_commits,
        unavailable_commits,
    }
}
