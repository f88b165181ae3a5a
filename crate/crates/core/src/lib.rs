//! Commit-history analysis: team-size scaling of production, heavy-tail
//! exponents of per-developer contributions, ranked-contribution team
//! models, and contribution cascades.
//!
//! The usual pipeline is [`ingest`] → [`windows`] → [`metrics`] →
//! [`scaling`], with [`tails`] and [`cascades`] run on the same history.
//! [`simulate`] provides synthetic histories with known ground truth.

pub mod cascades;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod rng;
pub mod scaling;
pub mod simulate;
pub mod stats;
pub mod tails;
pub mod windows;

pub use cascades::{branching_ratio, detect_cascades, Cascade, CascadeStats};
pub use error::{Error, Result};
pub use ingest::{
    parse_commit_log, parse_jsonl, resolve_authors, to_jsonl, AuthorId, AuthorPolicy,
    CommitRecord, FilePair, ParseOptions, ProjectHistory,
};
pub use metrics::{
    commit_production, levenshtein_distance, window_observations, ObservationSet,
    ProductionMeasure, WindowObservation,
};
pub use scaling::{
    fit_scaling_exponent, log_bin, methodology_compare, CompareConfig, FitOptions,
    MethodologyReport, Outcome, ScalingFit,
};
pub use simulate::{
    simulate_branching_stream, simulate_sum_scaling, simulate_zipf_growth, zipf_total,
    BranchingModel, ZipfGrowthConfig, ZipfTeamModel,
};
pub use tails::{
    classify_regime, hill_estimator, pareto_mle_fit, productivity_exponent,
    ContributionDistribution, Regime, TailConfig, TailFit, TailMethod,
};
pub use windows::{active_team_series, single_commit_share, ActivityWindow, TeamDefinition};
