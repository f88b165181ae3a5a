//! Active-team time series under fixed-length and quantile-derived windows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AuthorId, ProjectHistory};
use crate::stats;

pub const DAY: i64 = 86_400;
pub const DEFAULT_WINDOW: i64 = 5 * DAY;
pub const DEFAULT_QUANTILE: f64 = 0.9;

/// Upper bound on the number of tumbling windows one series may contain.
pub const MAX_WINDOWS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TeamDefinition {
    /// Tumbling windows of a fixed length in seconds.
    FixedWindow { length: i64 },
    /// Window length taken from the `q`-quantile of pooled per-author
    /// inter-commit gaps.
    QuantileWindow { q: f64 },
}

impl TeamDefinition {
    pub fn fixed(length: i64) -> Result<Self> {
        if length <= 0 {
            return Err(Error::Domain(format!(
                "window length must be positive, got {length}"
            )));
        }
        Ok(TeamDefinition::FixedWindow { length })
    }

    pub fn quantile(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile must lie in (0,1), got {q}")));
        }
        Ok(TeamDefinition::QuantileWindow { q })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TeamDefinition::FixedWindow { length } => Self::fixed(length).map(drop),
            TeamDefinition::QuantileWindow { q } => Self::quantile(q).map(drop),
        }
    }
}

impl Default for TeamDefinition {
    fn default() -> Self {
        TeamDefinition::FixedWindow {
            length: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityWindow {
    pub start_ts: i64,
    pub end_ts: i64,
    pub active_authors: BTreeSet<AuthorId>,
    /// Indices into `ProjectHistory::commits` of the commits in this window.
    pub commit_range: Range<usize>,
}

impl ActivityWindow {
    pub fn n(&self) -> usize {
        self.active_authors.len()
    }

    pub fn commit_count(&self) -> usize {
        self.commit_range.len()
    }
}

fn pooled_gaps(history: &ProjectHistory) -> Vec<i64> {
    let mut last_seen: BTreeMap<&AuthorId, i64> = BTreeMap::new();
    let mut gaps = Vec::new();
    for c in history.commits() {
        if let Some(prev) = last_seen.insert(&c.author, c.timestamp) {
            gaps.push(c.timestamp - prev);
        }
    }
    gaps
}

/// Nearest-rank `q`-quantile of the gaps between consecutive commits by the
/// same author, pooled over all authors.
pub fn inter_commit_quantile(history: &ProjectHistory, q: f64) -> Result<i64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("quantile must lie in [0,1], got {q}")));
    }
    let mut gaps = pooled_gaps(history);
    if gaps.is_empty() {
        return Err(Error::InsufficientData(
            "no author has two or more commits".into(),
        ));
    }
    gaps.sort_unstable();
    Ok(stats::nearest_rank(&gaps, q))
}

/// Window length in seconds for `def`. A zero quantile gap resolves to one
/// second, the timestamp resolution.
pub fn resolve_window_length(history: &ProjectHistory, def: TeamDefinition) -> Result<i64> {
    def.validate()?;
    match def {
        TeamDefinition::FixedWindow { length } => Ok(length),
        TeamDefinition::QuantileWindow { q } => Ok(inter_commit_quantile(history, q)?.max(1)),
    }
}

/// Tumbling windows anchored at the first commit and covering the whole
/// history. Empty windows are kept.
pub fn active_team_series(
    history: &ProjectHistory,
    def: TeamDefinition,
) -> Result<Vec<ActivityWindow>> {
    history.require_non_empty()?;
    let length = resolve_window_length(history, def)?;
    tumbling_windows(history, length)
}

pub(crate) fn tumbling_windows(
    history: &ProjectHistory,
    length: i64,
) -> Result<Vec<ActivityWindow>> {
    history.require_non_empty()?;
    let first = history.first_ts().unwrap_or_default();
    let count = (history.span() / length) as usize + 1;
    if count > MAX_WINDOWS {
        return Err(Error::Config(format!(
            "window length {length}s would produce {count} windows over a {}s span",
            history.span()
        )));
    }
    let mut windows: Vec<ActivityWindow> = (0..count as i64)
        .map(|k| {
            let start_ts = first + k * length;
            ActivityWindow {
                start_ts,
                end_ts: start_ts + length,
                active_authors: BTreeSet::new(),
                commit_range: 0..0,
            }
        })
        .collect();

    let commits = history.commits();
    let mut i = 0;
    for w in &mut windows {
        let begin = i;
        while i < commits.len() && commits[i].timestamp < w.end_ts {
            w.active_authors.insert(commits[i].author.clone());
            i += 1;
        }
        w.commit_range = begin..i;
    }
    debug_assert_eq!(i, commits.len());
    Ok(windows)
}

/// Fraction of all commits made by authors who committed exactly once.
pub fn single_commit_share(history: &ProjectHistory) -> Result<f64> {
    history.require_non_empty()?;
    let singles = history
        .commits_per_author()
        .values()
        .filter(|&&c| c == 1)
        .count();
    Ok(singles as f64 / history.len() as f64)
}

/// CSV with header `start_ts,end_ts,n,commits`.
pub fn windows_csv(windows: &[ActivityWindow]) -> String {
    let mut out = String::from("start_ts,end_ts,n,commits\n");
    for w in windows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            w.start_ts,
            w.end_ts,
            w.n(),
            w.commit_count()
        );
    }
    out
}
