//! Synthetic generators and analytic references.
//!
//! * The ranked-contribution team: member `j` of `n` contributes `N / j^alpha`,
//!   so the team total grows like `N · n^(1-alpha)`, sublinearly in `n`.
//! * Sums of Pareto contributions, whose typical size grows like `n^(1/mu)`
//!   for `mu < 1` and like `n` above.
//! * A branching commit stream (immigrants plus Poisson(eta) offspring with
//!   exponential delays) used as an end-to-end test generator.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CommitRecord, ProjectHistory};
use crate::rng::stream_rng;
use crate::stats;
use crate::windows::DEFAULT_WINDOW;

pub const MIN_SUM_TRIALS: usize = 100;
pub const DEFAULT_EVENT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfTeamModel {
    /// Contribution of the top-ranked member.
    pub top: f64,
    pub alpha: f64,
    pub n: u64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// `floor(N^(1/alpha))`: the largest team in which every member contributes
/// at least one unit.
pub fn max_team_size(top: f64, alpha: f64) -> Result<u64> {
    check_alpha(alpha)?;
    if !(top.is_finite() && top >= 1.0) {
        return Err(Error::Domain(format!("N must be at least 1, got {top}")));
    }
    Ok((top.powf(1.0 / alpha) + 1e-9).floor() as u64)
}

impl ZipfTeamModel {
    pub fn new(top: f64, alpha: f64, n: u64) -> Result<Self> {
        let max = max_team_size(top, alpha)?;
        if n == 0 {
            return Err(Error::Domain("team size must be positive".into()));
        }
        if n > max {
            return Err(Error::Domain(format!(
                "team size n = {n} violates n <= N^(1/alpha) = {max} \
                 (every member must contribute N/n^alpha >= 1)"
            )));
        }
        Ok(ZipfTeamModel { top, alpha, n })
    }

    /// `N / j^alpha` for rank `j >= 1`.
    pub fn contribution(&self, j: u64) -> f64 {
        self.top / (j as f64).powf(self.alpha)
    }
}

/// Exact partial sum `S(n) = N · Σ_{j=1..n} j^-alpha`.
pub fn zipf_total(model: &ZipfTeamModel) -> f64 {
    (1..=model.n).map(|j| model.contribution(j)).sum()
}

/// `S(n)` with each contribution floored to whole units.
pub fn zipf_total_floored(model: &ZipfTeamModel) -> f64 {
    (1..=model.n).map(|j| model.contribution(j).floor()).sum()
}

/// `S(n) / (N · n^(1-alpha) / (1-alpha))` for each (increasing) `n`.
pub fn zipf_asymptotic_check(top: f64, alpha: f64, n_values: &[u64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if n_values.windows(2).any(|w| w[0] >= w[1]) || n_values.first() == Some(&0) {
        return Err(Error::Domain("n values must be positive and increasing".into()));
    }
    let mut out = Vec::with_capacity(n_values.len());
    let mut sum = 0.0;
    let mut j = 0u64;
    for &n in n_values {
        while j < n {
            j += 1;
            sum += top / (j as f64).powf(alpha);
        }
        out.push(sum / (top * (n as f64).powf(1.0 - alpha) / (1.0 - alpha)));
    }
    Ok(out)
}

/// Inverse-CDF Pareto draws `xmin · U^(-1/mu)` with `U` in `(0, 1]`.
pub fn sample_pareto(mu: f64, xmin: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    check_pareto(mu, xmin)?;
    if count == 0 {
        return Err(Error::Domain("count must be at least 1".into()));
    }
    let mut rng = stream_rng(seed, 0);
    Ok((0..count).map(|_| pareto_draw(&mut rng, mu, xmin)).collect())
}

fn check_pareto(mu: f64, xmin: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    if !(xmin.is_finite() && xmin > 0.0) {
        return Err(Error::Domain(format!("xmin must be positive, got {xmin}")));
    }
    Ok(())
}

fn pareto_draw<R: Rng>(rng: &mut R, mu: f64, xmin: f64) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    xmin * u.powf(-1.0 / mu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumScaling {
    /// `(n, median over trials of the sum of n draws)`.
    pub medians: Vec<(usize, f64)>,
    /// OLS slope of ln(median) on ln(n).
    pub slope: f64,
}

/// Median (over `trials`) of the sum of `n` Pareto(mu) draws, for each `n`,
/// and the log-log slope of those medians. Every `(n, trial)` task owns its
/// own RNG stream, so results do not depend on scheduling.
pub fn simulate_sum_scaling(
    mu: f64,
    n_values: &[usize],
    trials: usize,
    seed: u64,
) -> Result<SumScaling> {
    check_pareto(mu, 1.0)?;
    if trials < MIN_SUM_TRIALS {
        return Err(Error::Domain(format!(
            "at least {MIN_SUM_TRIALS} trials are needed for stable medians, got {trials}"
        )));
    }
    if n_values.len() < 2 || n_values.contains(&0) {
        return Err(Error::Domain(
            "need at least two positive team sizes".into(),
        ));
    }
    let medians: Vec<(usize, f64)> = n_values
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let mut sums: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream_rng(seed, (idx * trials + t) as u64);
                    (0..n).map(|_| pareto_draw(&mut rng, mu, 1.0)).sum()
                })
                .collect();
            (n, stats::median(&mut sums))
        })
        .collect();
    let lx: Vec<f64> = medians.iter().map(|m| (m.0 as f64).ln()).collect();
    let ly: Vec<f64> = medians.iter().map(|m| m.1.ln()).collect();
    let slope = stats::ols(&lx, &ly)?.slope;
    Ok(SumScaling { medians, slope })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchingModel {
    /// Mean number of offspring per event.
    pub eta: f64,
    /// Exogenous events per second.
    pub immigrant_rate: f64,
    /// Mean offspring delay in seconds.
    pub offspring_delay_scale: f64,
    /// Simulated duration in seconds.
    pub horizon: f64,
    pub seed: u64,
    pub event_cap: usize,
}

impl BranchingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta <= 1.0) {
            return Err(Error::Domain(format!(
                "branching ratio must lie in [0,1], got {}",
                self.eta
            )));
        }
        for (name, v) in [
            ("immigrant_rate", self.immigrant_rate),
            ("offspring_delay_scale", self.offspring_delay_scale),
            ("horizon", self.horizon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.event_cap == 0 {
            return Err(Error::Domain("event cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingOutput {
    pub history: ProjectHistory,
    pub immigrants: usize,
    /// The event cap stopped the simulation early.
    pub truncated: bool,
}

/// Simulates a branching commit stream. Offspring falling after the horizon
/// are dropped. Events are assigned to `participants` authors with
/// probabilities proportional to Pareto(`participation_mu`) weights.
pub fn simulate_branching_stream(
    model: &BranchingModel,
    participants: usize,
    participation_mu: f64,
) -> Result<BranchingOutput> {
    model.validate()?;
    check_pareto(participation_mu, 1.0)?;
    if participants == 0 {
        return Err(Error::Domain("need at least one participant".into()));
    }

    let mut rng = stream_rng(model.seed, 0);
    let gap = Exp::new(model.immigrant_rate).map_err(|e| Error::Domain(e.to_string()))?;
    let delay = Exp::new(1.0 / model.offspring_delay_scale).map_err(|e| Error::Domain(e.to_string()))?;
    let offspring = (model.eta > 0.0)
        .then(|| Poisson::new(model.eta))
        .transpose()
        .map_err(|e| Error::Domain(e.to_string()))?;

    let mut times: Vec<f64> = Vec::new();
    let mut t = gap.sample(&mut rng);
    while t <= model.horizon && times.len() < model.event_cap {
        times.push(t);
        t += gap.sample(&mut rng);
    }
    let immigrants = times.len();
    let mut truncated = t <= model.horizon;

    // Breadth-first expansion; `times` doubles as the queue.
    let mut head = 0;
    if let Some(offspring) = offspring {
        'expand: while head < times.len() {
            let parent = times[head];
            head += 1;
            let children = offspring.sample(&mut rng) as u64;
            for _ in 0..children {
                let child = parent + delay.sample(&mut rng);
                if child > model.horizon {
                    continue;
                }
                if times.len() >= model.event_cap {
                    truncated = true;
                    break 'expand;
                }
                times.push(child);
            }
        }
    }
    times.sort_by(f64::total_cmp);

    let mut wrng = stream_rng(model.seed, 1);
    let weights: Vec<f64> = (0..participants)
        .map(|_| pareto_draw(&mut wrng, participation_mu, 1.0))
        .collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::Domain(e.to_string()))?;
    let mut arng = stream_rng(model.seed, 2);
    let width = times.len().max(1).to_string().len();
    let commits = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let a = pick.sample(&mut arng);
            CommitRecord::new(
                format!("ev{i:0width$}"),
                format!("dev{a}@sim"),
                format!("dev{a}"),
                t.floor() as i64,
                1,
                0,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchingOutput {
        history: ProjectHistory::new("branching", commits)?,
        immigrants,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfGrowthConfig {
    pub top: f64,
    pub alpha: f64,
    pub windows: usize,
    pub n_min: u64,
    pub n_max: u64,
    /// Length of each generated window in seconds.
    pub window_length: i64,
    pub seed: u64,
}

impl Default for ZipfGrowthConfig {
    fn default() -> Self {
        ZipfGrowthConfig {
            top: 50.0,
            alpha: 0.5,
            windows: 60,
            n_min: 10,
            n_max: 1000,
            window_length: DEFAULT_WINDOW,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZipfGrowthOutput {
    pub history: ProjectHistory,
    /// Active team size of each generated window.
    pub team_sizes: Vec<u64>,
}

/// Whole-unit commit count of rank `j`: `N / j^alpha` rounded, at least one.
pub fn rounded_contribution(model: &ZipfTeamModel, j: u64) -> u64 {
    (model.contribution(j).round() as u64).max(1)
}

fn push_team(
    commits: &mut Vec<CommitRecord>,
    model: &ZipfTeamModel,
    start: i64,
    length: i64,
    rng: &mut impl Rng,
) -> Result<()> {
    let mut first = true;
    for j in 1..=model.n {
        for _ in 0..rounded_contribution(model, j) {
            // The first commit sits on the window boundary so that analysis
            // windows anchored at the first commit line up with generation.
            let offset = if first { 0 } else { rng.random_range(0..length) };
            first = false;
            let id = format!("z{:09}", commits.len());
            commits.push(CommitRecord::new(
                id,
                format!("dev{j}@zipf"),
                format!("dev{j}"),
                start + offset,
                1,
                0,
            )?);
        }
    }
    Ok(())
}

/// One team of the ranked-contribution model, committing inside a single
/// window starting at t = 0.
pub fn zipf_team_history(model: &ZipfTeamModel, window_length: i64, seed: u64) -> Result<ProjectHistory> {
    if window_length <= 0 {
        return Err(Error::Domain("window length must be positive".into()));
    }
    let mut commits = Vec::new();
    push_team(&mut commits, model, 0, window_length, &mut stream_rng(seed, 0))?;
    ProjectHistory::new("zipf-team", commits)
}

/// A history of consecutive windows; window `w` holds a ranked-contribution
/// team of log-uniform size in `[n_min, n_max]`, with member `j` always the
/// same author.
pub fn simulate_zipf_growth(cfg: &ZipfGrowthConfig) -> Result<ZipfGrowthOutput> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(Error::Domain("need 1 <= n_min <= n_max".into()));
    }
    if cfg.windows == 0 || cfg.window_length <= 0 {
        return Err(Error::Domain("need at least one window of positive length".into()));
    }
    ZipfTeamModel::new(cfg.top, cfg.alpha, cfg.n_max)?;
    let (lo, hi) = ((cfg.n_min as f64).ln(), (cfg.n_max as f64 + 1.0).ln());
    let mut commits = Vec::new();
    let mut team_sizes = Vec::with_capacity(cfg.windows);
    for w in 0..cfg.windows {
        let mut rng = stream_rng(cfg.seed, w as u64);
        let n = (rng.random_range(lo..hi).exp().floor() as u64).clamp(cfg.n_min, cfg.n_max);
        let model = ZipfTeamModel::new(cfg.top, cfg.alpha, n)?;
        push_team(
            &mut commits,
            &model,
            w as i64 * cfg.window_length,
            cfg.window_length,
            &mut rng,
        )?;
        team_sizes.push(n);
    }
    Ok(ZipfGrowthOutput {
        history: ProjectHistory::new("zipf-growth", commits)?,
        team_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zipf_reported_values() {
        let s5 = zipf_total(&ZipfTeamModel::new(10.0, 0.5, 5).unwrap());
        let s25 = zipf_total(&ZipfTeamModel::new(10.0, 0.5, 25).unwrap());
        assert_eq!(s5.round(), 32.0);
        assert_eq!(s25.round(), 86.0);
        assert!((s5 - 32.32).abs() < 0.01, "{s5}");
        assert!((s25 - 86.39).abs() < 0.01, "{s25}");
        assert!((s25 / s5 - 2.67).abs() < 0.01);
    }

    #[test]
    fn single_member_team() {
        for (top, alpha) in [(10.0, 0.5), (3.0, 0.2), (1.0, 0.9)] {
            assert_eq!(zipf_total(&ZipfTeamModel::new(top, alpha, 1).unwrap()), top);
        }
    }

    #[test]
    fn max_team_size_values() {
        assert_eq!(max_team_size(10.0, 0.5).unwrap(), 100);
        assert_eq!(max_team_size(1.0, 0.3).unwrap(), 1);
        assert_eq!(max_team_size(1.0, 0.9).unwrap(), 1);
        let m = ZipfTeamModel::new(10.0, 0.5, 25).unwrap();
        assert_eq!(m.contribution(1), 10.0);
        assert_eq!(m.contribution(25), 2.0);
        assert!(max_team_size(0.5, 0.5).is_err());
        assert!(max_team_size(10.0, 1.0).is_err());
        assert!(max_team_size(10.0, 0.0).is_err());
    }

    #[test]
    fn constructor_enforces_constraint() {
        assert!(ZipfTeamModel::new(10.0, 0.5, 100).is_ok());
        let err = ZipfTeamModel::new(10.0, 0.5, 101).unwrap_err();
        assert!(err.to_string().contains("N^(1/alpha)"));
        assert!(ZipfTeamModel::new(10.0, 0.5, 0).is_err());
    }

    #[test]
    fn matches_term_by_term_sum() {
        for &(top, alpha, n) in &[(10.0, 0.5, 100u64), (1000.0, 0.3, 5000), (7.5, 0.8, 12)] {
            let m = ZipfTeamModel::new(top, alpha, n).unwrap();
            let mut brute = 0.0;
            for j in 1..=n {
                brute += top * (j as f64).powf(-alpha);
            }
            assert!(((zipf_total(&m) - brute) / brute).abs() < 1e-12);
        }
    }

    #[test]
    fn strictly_increasing_and_concave() {
        let totals: Vec<f64> = (1..=100)
            .map(|n| zipf_total(&ZipfTeamModel::new(10.0, 0.5, n).unwrap()))
            .collect();
        for w in totals.windows(3) {
            let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
            assert!(d1 > 0.0 && d2 > 0.0 && d2 < d1);
        }
    }

    #[test]
    fn floored_variant() {
        let m = ZipfTeamModel::new(10.0, 0.5, 5).unwrap();
        // 10 + 7 + 5 + 5 + 4
        assert_eq!(zipf_total_floored(&m), 31.0);
    }

    #[test]
    fn asymptotic_ratio() {
        let r = zipf_asymptotic_check(10.0, 0.5, &[1, 10, 1000, 1_000_000]).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-15);
        assert!((0.99..=1.01).contains(&r[3]), "{}", r[3]);
        assert!(r.windows(2).all(|w| (1.0 - w[1]).abs() < (1.0 - w[0]).abs()));
        assert!(zipf_asymptotic_check(10.0, 0.5, &[10, 5]).is_err());
    }

    #[test]
    fn asymptotic_log_slope() {
        let ns = stats::log_spaced(100, 100_000, 25);
        let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ly: Vec<f64> = ns
            .iter()
            .map(|&n| zipf_total(&ZipfTeamModel::new(1000.0, 0.5, n as u64).unwrap()).ln())
            .collect();
        let slope = stats::ols(&lx, &ly).unwrap().slope;
        assert!((slope - 0.5).abs() <= 0.02, "{slope}");
    }

    #[test]
    fn pareto_support_and_determinism() {
        let a = sample_pareto(0.7, 2.0, 1000, 9).unwrap();
        assert!(a.iter().all(|&x| x >= 2.0));
        assert_eq!(a, sample_pareto(0.7, 2.0, 1000, 9).unwrap());
        assert_ne!(a, sample_pareto(0.7, 2.0, 1000, 10).unwrap());
        assert!(sample_pareto(0.0, 1.0, 1, 0).is_err());
        assert!(sample_pareto(1.0, -1.0, 1, 0).is_err());
        assert!(sample_pareto(1.0, 1.0, 0, 0).is_err());
    }

    #[test]
    fn pareto_ccdf_at_twice_xmin() {
        let xs = sample_pareto(0.7, 3.0, 100_000, 1).unwrap();
        let frac = xs.iter().filter(|&&x| x > 6.0).count() as f64 / xs.len() as f64;
        let expected = 2f64.powf(-0.7);
        // Binomial standard error is ~0.0015 here.
        assert!((frac - expected).abs() < 0.006, "{frac} vs {expected}");
    }

    #[test]
    fn sum_scaling_slopes() {
        let ns = stats::log_spaced(100, 10_000, 5);
        let heavy = simulate_sum_scaling(0.5, &ns, 100, 42).unwrap();
        assert!((heavy.slope - 2.0).abs() <= 0.15, "{}", heavy.slope);
        let light = simulate_sum_scaling(1.5, &ns, 100, 42).unwrap();
        assert!((light.slope - 1.0).abs() <= 0.1, "{}", light.slope);
        let edge = simulate_sum_scaling(1.0, &ns, 100, 42).unwrap();
        assert!((1.0..=1.25).contains(&edge.slope), "{}", edge.slope);
        assert!(simulate_sum_scaling(0.5, &ns, 99, 42).is_err());
    }

    fn model(eta: f64, seed: u64) -> BranchingModel {
        BranchingModel {
            eta,
            immigrant_rate: 1e-3,
            offspring_delay_scale: 60.0,
            horizon: 1e7,
            seed,
            event_cap: DEFAULT_EVENT_CAP,
        }
    }

    #[test]
    fn poisson_stream_without_offspring() {
        let out = simulate_branching_stream(&model(0.0, 4), 10, 1.5).unwrap();
        let expected = 1e-3 * 1e7;
        let events = out.history.len() as f64;
        assert!((events - expected).abs() <= 3.0 * expected.sqrt());
        assert_eq!(out.immigrants, out.history.len());
        assert!(!out.truncated);
    }

    #[test]
    fn mean_cluster_size() {
        let out = simulate_branching_stream(&model(0.5, 4), 10, 1.5).unwrap();
        let ratio = out.history.len() as f64 / out.immigrants as f64;
        assert!((ratio - 2.0).abs() <= 0.2, "{ratio}");
    }

    #[test]
    fn critical_stream_hits_cap() {
        let m = BranchingModel {
            eta: 1.0,
            event_cap: 5_000,
            ..model(1.0, 2)
        };
        let out = simulate_branching_stream(&m, 10, 1.5).unwrap();
        assert!(out.truncated);
        assert_eq!(out.history.len(), 5_000);
        assert!(simulate_branching_stream(&BranchingModel { eta: 1.1, ..m }, 10, 1.5).is_err());
    }

    #[test]
    fn stream_is_valid_and_reproducible() {
        let out = simulate_branching_stream(&model(0.3, 8), 50, 0.7).unwrap();
        let h = &out.history;
        assert!(h.commits().windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        let ids: std::collections::BTreeSet<_> = h.commits().iter().map(|c| &c.id).collect();
        assert_eq!(ids.len(), h.len());
        assert_eq!(out, simulate_branching_stream(&model(0.3, 8), 50, 0.7).unwrap());
    }

    #[test]
    fn zipf_team_history_counts() {
        let m = ZipfTeamModel::new(10.0, 0.5, 25).unwrap();
        let h = zipf_team_history(&m, DEFAULT_WINDOW, 1).unwrap();
        let expected: u64 = (1..=25).map(|j| rounded_contribution(&m, j)).sum();
        assert_eq!(h.len() as u64, expected);
        assert_eq!(h.author_count(), 25);
        assert_eq!(h.first_ts(), Some(0));
    }

    #[test]
    fn zipf_growth_layout() {
        let cfg = ZipfGrowthConfig {
            windows: 8,
            ..Default::default()
        };
        let out = simulate_zipf_growth(&cfg).unwrap();
        assert_eq!(out.team_sizes.len(), 8);
        assert!(out.team_sizes.iter().all(|&n| (10..=1000).contains(&n)));
        let bad = ZipfGrowthConfig {
            n_max: 3000,
            ..cfg
        };
        assert!(simulate_zipf_growth(&bad).is_err());
    }
}
