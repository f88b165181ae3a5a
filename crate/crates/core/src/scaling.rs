//! Production-vs-team-size scaling fits and the two-arm methodology report.
//!
//! Arm A fits `P ~ n^beta` over short fixed windows (production scaling).
//! Arm B resolves a long window from the quantile of per-author inter-commit
//! gaps and reports how mean output per member `P/n` trends with `n`.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ProjectHistory;
use crate::metrics::{self, MetricsConfig, ObservationSet, ProductionMeasure, WindowObservation};
use crate::rng::{stream_rng, DEFAULT_SEED};
use crate::stats::{self, Z_95};
use crate::tails::{self, ContributionDistribution, Regime, TailConfig, TailFit};
use crate::windows::{self, TeamDefinition, DEFAULT_QUANTILE, DEFAULT_WINDOW};

pub const MIN_FIT_POINTS: usize = 5;
pub const DEFAULT_BINS_PER_DECADE: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinnedPoint {
    pub n_mean: f64,
    pub p_mean: f64,
    pub count: usize,
}

fn usable(o: &WindowObservation) -> bool {
    o.n >= 1 && o.production > 0.0 && o.production.is_finite()
}

/// Geometric bins over `n` with `bins_per_decade` bins per factor of ten;
/// arithmetic means inside each bin. Observations with `n = 0` or `P <= 0`
/// are skipped.
pub fn log_bin(observations: &[WindowObservation], bins_per_decade: u32) -> Vec<BinnedPoint> {
    let bpd = f64::from(bins_per_decade.max(1));
    let mut bins: std::collections::BTreeMap<i64, (f64, f64, usize)> = Default::default();
    for o in observations.iter().filter(|o| usable(o)) {
        let idx = ((o.n as f64).log10() * bpd + 1e-9).floor() as i64;
        let e = bins.entry(idx).or_insert((0.0, 0.0, 0));
        e.0 += o.n as f64;
        e.1 += o.production;
        e.2 += 1;
    }
    bins.into_values()
        .map(|(sn, sp, c)| BinnedPoint {
            n_mean: sn / c as f64,
            p_mean: sp / c as f64,
            count: c,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CiMethod {
    /// `beta ± z·se` with the OLS slope standard error.
    Normal,
    /// Percentile interval over resampled points.
    Bootstrap { resamples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// `None` fits the raw observations.
    pub bins_per_decade: Option<u32>,
    pub ci: CiMethod,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bins_per_decade: Some(DEFAULT_BINS_PER_DECADE),
            ci: CiMethod::Normal,
        }
    }
}

impl FitOptions {
    pub fn unbinned() -> Self {
        FitOptions {
            bins_per_decade: None,
            ci: CiMethod::Normal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub beta: f64,
    pub intercept: f64,
    /// 95% interval on `beta`.
    pub ci: [f64; 2],
    pub r_squared: f64,
    pub n_points: usize,
    pub binned: bool,
    /// Observations dropped because `n = 0` or `P <= 0`.
    pub excluded: usize,
    /// The whole interval lies above one.
    pub superlinear: bool,
}

impl ScalingFit {
    pub fn ci_low(&self) -> f64 {
        self.ci[0]
    }

    pub fn ci_high(&self) -> f64 {
        self.ci[1]
    }
}

/// OLS of `ln P` on `ln n`.
pub fn fit_scaling_exponent(
    observations: &[WindowObservation],
    opts: &FitOptions,
) -> Result<ScalingFit> {
    let kept: Vec<WindowObservation> = observations.iter().copied().filter(usable).collect();
    let excluded = observations.len() - kept.len();
    let points: Vec<(f64, f64)> = match opts.bins_per_decade {
        Some(bpd) => log_bin(&kept, bpd)
            .into_iter()
            .map(|b| (b.n_mean, b.p_mean))
            .collect(),
        None => kept.iter().map(|o| (o.n as f64, o.production)).collect(),
    };
    let mut fit = fit_log_log(&points, &opts.ci)?;
    fit.binned = opts.bins_per_decade.is_some();
    fit.excluded = excluded;
    Ok(fit)
}

/// Log-log OLS over `(x, y)` pairs, both positive.
pub fn fit_log_log(points: &[(f64, f64)], ci: &CiMethod) -> Result<ScalingFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least {MIN_FIT_POINTS} usable points, got {}",
            points.len()
        )));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = stats::ols(&lx, &ly)?;
    let ci = match *ci {
        CiMethod::Normal => [
            fit.slope - Z_95 * fit.slope_se,
            fit.slope + Z_95 * fit.slope_se,
        ],
        CiMethod::Bootstrap { resamples, seed } => bootstrap_slope(&lx, &ly, resamples, seed, fit.slope),
    };
    Ok(ScalingFit {
        beta: fit.slope,
        intercept: fit.intercept,
        ci,
        r_squared: fit.r_squared,
        n_points: points.len(),
        binned: false,
        excluded: 0,
        superlinear: ci[0] > 1.0,
    })
}

fn bootstrap_slope(lx: &[f64], ly: &[f64], resamples: usize, seed: u64, point: f64) -> [f64; 2] {
    let m = lx.len();
    let mut slopes: Vec<f64> = (0..resamples)
        .filter_map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let (mut bx, mut by) = (Vec::with_capacity(m), Vec::with_capacity(m));
            for _ in 0..m {
                let i = rng.random_range(0..m);
                bx.push(lx[i]);
                by.push(ly[i]);
            }
            stats::ols(&bx, &by).ok().map(|f| f.slope)
        })
        .collect();
    if slopes.is_empty() {
        return [point, point];
    }
    let (lo, hi) = stats::percentile_interval(&mut slopes, 0.95);
    [lo, hi]
}

/// Trend of mean output per member: OLS of `ln(P/n)` on `ln n`.
pub fn productivity_trend(
    observations: &[WindowObservation],
    opts: &FitOptions,
) -> Result<ScalingFit> {
    let kept: Vec<WindowObservation> = observations.iter().copied().filter(usable).collect();
    let excluded = observations.len() - kept.len();
    let points: Vec<(f64, f64)> = match opts.bins_per_decade {
        Some(bpd) => log_bin(&kept, bpd)
            .into_iter()
            .map(|b| (b.n_mean, b.p_mean / b.n_mean))
            .collect(),
        None => kept
            .iter()
            .map(|o| (o.n as f64, o.production / o.n as f64))
            .collect(),
    };
    let mut fit = fit_log_log(&points, &opts.ci)?;
    fit.binned = opts.bins_per_decade.is_some();
    fit.excluded = excluded;
    // Growing per-member output is the relevant flag here.
    fit.superlinear = fit.ci[0] > 0.0;
    Ok(fit)
}

/// Either a computed value or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    Error(String),
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            Outcome::Error(_) => None,
        }
    }

    pub fn error(&self) -> Option<&str> {
        match self {
            Outcome::Ok(_) => None,
            Outcome::Error(e) => Some(e),
        }
    }
}

impl<T> From<Result<T>> for Outcome<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Error(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    Hill,
    Mle,
    Both,
}

#[derive(Debug, Clone, Copy)]
pub struct CompareConfig {
    pub fixed_window: i64,
    pub quantile: f64,
    pub fit: FitOptions,
    pub estimator: EstimatorChoice,
    /// Hill tail size; `None` uses `max(10, floor(sqrt(authors)))`.
    pub hill_k: Option<usize>,
    pub tail: TailConfig,
    pub metrics: MetricsConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            fixed_window: DEFAULT_WINDOW,
            quantile: DEFAULT_QUANTILE,
            fit: FitOptions::default(),
            estimator: EstimatorChoice::Both,
            hill_k: None,
            tail: TailConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

impl CompareConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.tail.seed = seed;
        if let CiMethod::Bootstrap { resamples, .. } = self.fit.ci {
            self.fit.ci = CiMethod::Bootstrap { resamples, seed };
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub label: String,
    pub definition: TeamDefinition,
    pub window_length: Option<i64>,
    pub observations: Outcome<ObservationSet>,
    pub fit: Outcome<ScalingFit>,
    /// Mean of `P/n` over non-empty windows (arm B only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_productivity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSection {
    pub hill: Option<Outcome<TailFit>>,
    pub mle: Option<Outcome<TailFit>>,
    pub hill_regime: Option<Regime>,
    pub mle_regime: Option<Regime>,
}

impl TailSection {
    /// Regime of the preferred estimate: MLE when available, else Hill.
    pub fn regime(&self) -> Option<Regime> {
        self.mle_regime.or(self.hill_regime)
    }

    pub fn mu(&self) -> Option<f64> {
        let pick = |o: &Option<Outcome<TailFit>>| o.as_ref().and_then(|o| o.ok()).map(|f| f.mu);
        pick(&self.mle).or_else(|| pick(&self.hill))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodologyReport {
    pub project: String,
    pub commits: usize,
    pub authors: usize,
    pub measure: ProductionMeasure,
    pub arm_a: ArmReport,
    pub arm_b: ArmReport,
    pub tails: TailSection,
    pub single_commit_share: Outcome<f64>,
    pub notes: Vec<String>,
}

const NOTE_A: &str = "arm A measures production scaling: total output P of the active team in short fixed windows, fitted as P ~ n^beta";
const NOTE_B: &str = "arm B measures mean productivity: output per member P/n in windows sized by the inter-commit-gap quantile; reported as the slope of ln(P/n) on ln n, not a reproduction of the original regression";

fn observe(
    history: &ProjectHistory,
    def: TeamDefinition,
    measure: ProductionMeasure,
    cfg: &MetricsConfig,
) -> Result<ObservationSet> {
    let length = windows::resolve_window_length(history, def)?;
    let series = windows::active_team_series(history, TeamDefinition::fixed(length)?)?;
    Ok(metrics::observations_from_windows(history, &series, length, measure, cfg))
}

/// Runs both arms, tail fits and the single-commit share on one history.
/// Failures of individual parts are recorded in the report.
pub fn methodology_compare(
    history: &ProjectHistory,
    measure: ProductionMeasure,
    cfg: &CompareConfig,
) -> MethodologyReport {
    let def_a = TeamDefinition::FixedWindow {
        length: cfg.fixed_window,
    };
    let obs_a: Outcome<ObservationSet> = observe(history, def_a, measure, &cfg.metrics).into();
    let fit_a: Outcome<ScalingFit> = match &obs_a {
        Outcome::Ok(o) => fit_scaling_exponent(&o.observations, &cfg.fit).into(),
        Outcome::Error(e) => Outcome::Error(e.clone()),
    };
    let arm_a = ArmReport {
        label: "production scaling (fixed window)".into(),
        definition: def_a,
        window_length: obs_a.ok().map(|o| o.window_length),
        observations: obs_a,
        fit: fit_a,
        mean_productivity: None,
    };

    let def_b = TeamDefinition::QuantileWindow { q: cfg.quantile };
    let obs_b: Outcome<ObservationSet> = observe(history, def_b, measure, &cfg.metrics).into();
    let (fit_b, mean_b) = match &obs_b {
        Outcome::Ok(o) => {
            let per_member: Vec<f64> = o
                .observations
                .iter()
                .filter(|w| usable(w))
                .map(|w| w.production / w.n as f64)
                .collect();
            let mean = (!per_member.is_empty())
                .then(|| per_member.iter().sum::<f64>() / per_member.len() as f64);
            (productivity_trend(&o.observations, &cfg.fit).into(), mean)
        }
        Outcome::Error(e) => (Outcome::Error(e.clone()), None),
    };
    let arm_b = ArmReport {
        label: "mean productivity (quantile window)".into(),
        definition: def_b,
        window_length: obs_b.ok().map(|o| o.window_length),
        observations: obs_b,
        fit: fit_b,
        mean_productivity: mean_b,
    };

    MethodologyReport {
        project: history.name().to_string(),
        commits: history.len(),
        authors: history.author_count(),
        measure,
        arm_a,
        arm_b,
        tails: tail_section(history, measure, cfg),
        single_commit_share: windows::single_commit_share(history).into(),
        notes: vec![NOTE_A.into(), NOTE_B.into()],
    }
}

fn tail_section(
    history: &ProjectHistory,
    measure: ProductionMeasure,
    cfg: &CompareConfig,
) -> TailSection {
    let dist = ContributionDistribution::from_history(history, measure);
    let want_hill = matches!(cfg.estimator, EstimatorChoice::Hill | EstimatorChoice::Both);
    let want_mle = matches!(cfg.estimator, EstimatorChoice::Mle | EstimatorChoice::Both);
    let hill: Option<Outcome<TailFit>> = want_hill.then(|| {
        dist.as_ref()
            .map_err(Clone::clone)
            .and_then(|d| {
                let k = cfg.hill_k.unwrap_or_else(|| tails::default_hill_k(d.len()));
                tails::hill_estimator(d, k, &cfg.tail)
            })
            .into()
    });
    let mle: Option<Outcome<TailFit>> = want_mle.then(|| {
        dist.as_ref()
            .map_err(Clone::clone)
            .and_then(|d| tails::pareto_mle_fit(d, &cfg.tail))
            .into()
    });
    let regime = |o: &Option<Outcome<TailFit>>| {
        o.as_ref()
            .and_then(|o| o.ok())
            .and_then(|f| tails::classify_regime(f.mu).ok())
    };
    TailSection {
        hill_regime: regime(&hill),
        mle_regime: regime(&mle),
        hill,
        mle,
    }
}

fn fmt_fit(o: &Outcome<ScalingFit>) -> String {
    match o {
        Outcome::Ok(f) => format!(
            "{:.4}  [{:.4}, {:.4}]  r2={:.3}  points={}",
            f.beta, f.ci[0], f.ci[1], f.r_squared, f.n_points
        ),
        Outcome::Error(e) => format!("unavailable ({e})"),
    }
}

fn fmt_tail(o: &Option<Outcome<TailFit>>) -> String {
    match o {
        None => "not requested".into(),
        Some(Outcome::Ok(f)) => format!(
            "mu={:.4}  [{:.4}, {:.4}]  xmin={}  k={}",
            f.mu, f.ci[0], f.ci[1], f.xmin, f.k
        ),
        Some(Outcome::Error(e)) => format!("unavailable ({e})"),
    }
}

/// Human-readable summary table.
pub fn render_text(r: &MethodologyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "project            {}", r.project);
    let _ = writeln!(out, "commits            {}", r.commits);
    let _ = writeln!(out, "authors            {}", r.authors);
    let _ = writeln!(out, "measure            {}", r.measure);
    match &r.single_commit_share {
        Outcome::Ok(s) => {
            let _ = writeln!(out, "single-commit      {s:.4}");
        }
        Outcome::Error(e) => {
            let _ = writeln!(out, "single-commit      unavailable ({e})");
        }
    }
    for (name, arm, what) in [
        ("A", &r.arm_a, "beta"),
        ("B", &r.arm_b, "slope ln(P/n)"),
    ] {
        let _ = writeln!(out, "arm {name}: {}", arm.label);
        match arm.window_length {
            Some(l) => {
                let _ = writeln!(out, "  window           {l} s ({:.2} d)", l as f64 / 86_400.0);
            }
            None => {
                let _ = writeln!(out, "  window           unresolved");
            }
        }
        if let Some(o) = arm.observations.ok() {
            let _ = writeln!(
                out,
                "  windows          {} ({} empty), coverage {:.3}",
                o.total_windows,
                o.empty_windows,
                o.coverage()
            );
        }
        let _ = writeln!(out, "  {what:<16} {}", fmt_fit(&arm.fit));
        if let Some(m) = arm.mean_productivity {
            let _ = writeln!(out, "  mean P/n         {m:.4}");
        }
    }
    let _ = writeln!(out, "tail (hill)        {}", fmt_tail(&r.tails.hill));
    let _ = writeln!(out, "tail (mle)         {}", fmt_tail(&r.tails.mle));
    let regime = r
        .tails
        .regime()
        .map(|g| g.to_string())
        .unwrap_or_else(|| "undetermined".into());
    let _ = writeln!(out, "regime             {regime}");
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

/// Plot-ready `n_mean,p_mean,count` rows.
pub fn binned_csv(points: &[BinnedPoint]) -> String {
    let mut out = String::from("n_mean,p_mean,count\n");
    for b in points {
        let _ = writeln!(out, "{},{},{}", b.n_mean, b.p_mean, b.count);
    }
    out
}

/// Default bootstrap configuration for slope intervals.
pub fn bootstrap_ci(resamples: usize) -> CiMethod {
    CiMethod::Bootstrap {
        resamples,
        seed: DEFAULT_SEED,
    }
}
