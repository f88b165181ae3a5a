//! Gap-threshold declustering of commit streams.
//!
//! A cascade is a maximal run of commits (by any authors) in which each gap
//! to the previous commit is at most `tau`. Treating each cascade as one
//! exogenous event plus its triggered followers gives the branching-ratio
//! estimate `eta = 1 - cascades / events`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ProjectHistory;
use crate::stats;

pub const DEFAULT_TAU_QUANTILE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cascade {
    pub events: Vec<String>,
    pub start_ts: i64,
    /// Seconds from the first to the last event.
    pub duration: i64,
}

impl Cascade {
    pub fn size(&self) -> usize {
        self.events.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeStats {
    pub tau: i64,
    pub cascades: usize,
    pub events: usize,
    pub eta_hat: f64,
    /// cascade size -> number of cascades of that size
    pub sizes: BTreeMap<usize, usize>,
}

fn check(history: &ProjectHistory, tau: i64) -> Result<()> {
    if tau <= 0 {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    history.require_non_empty()
}

pub fn detect_cascades(history: &ProjectHistory, tau: i64) -> Result<Vec<Cascade>> {
    check(history, tau)?;
    let mut out: Vec<Cascade> = Vec::new();
    let mut prev: Option<i64> = None;
    for c in history.commits() {
        match (prev, out.last_mut()) {
            (Some(p), Some(cur)) if c.timestamp - p <= tau => {
                cur.events.push(c.id.clone());
                cur.duration = c.timestamp - cur.start_ts;
            }
            _ => out.push(Cascade {
                events: vec![c.id.clone()],
                start_ts: c.timestamp,
                duration: 0,
            }),
        }
        prev = Some(c.timestamp);
    }
    Ok(out)
}

pub fn branching_ratio(history: &ProjectHistory, tau: i64) -> Result<CascadeStats> {
    let cascades = detect_cascades(history, tau)?;
    let mut sizes = BTreeMap::new();
    for c in &cascades {
        *sizes.entry(c.size()).or_insert(0) += 1;
    }
    let events = history.len();
    Ok(CascadeStats {
        tau,
        cascades: cascades.len(),
        events,
        eta_hat: 1.0 - cascades.len() as f64 / events as f64,
        sizes,
    })
}

/// Nearest-rank 10th percentile of consecutive inter-commit gaps (any
/// author), floored at one second.
pub fn default_tau(history: &ProjectHistory) -> i64 {
    let mut gaps: Vec<i64> = history
        .commits()
        .windows(2)
        .map(|w| w[1].timestamp - w[0].timestamp)
        .collect();
    if gaps.is_empty() {
        return 1;
    }
    gaps.sort_unstable();
    stats::nearest_rank(&gaps, DEFAULT_TAU_QUANTILE).max(1)
}
