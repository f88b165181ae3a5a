use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use scalemetrics_core::cascades::{self, CascadeStats};
use scalemetrics_core::ingest::ProjectHistory;
use scalemetrics_core::metrics::ProductionMeasure;
use scalemetrics_core::scaling::{
    self, CiMethod, CompareConfig, EstimatorChoice, FitOptions, MethodologyReport, Outcome,
};
use scalemetrics_core::tails::{Regime, TailConfig};

/// Resolved analysis settings, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub window: i64,
    pub quantile: f64,
    pub measure: ProductionMeasure,
    pub estimator: EstimatorChoice,
    pub hill_k: Option<usize>,
    pub bins_per_decade: Option<u32>,
    pub bootstrap: Option<usize>,
    pub tau: Option<i64>,
}

impl Settings {
    fn compare_config(&self, seed: u64) -> CompareConfig {
        let ci = match self.bootstrap {
            Some(resamples) => CiMethod::Bootstrap { resamples, seed },
            None => CiMethod::Normal,
        };
        CompareConfig {
            fixed_window: self.window,
            quantile: self.quantile,
            fit: FitOptions {
                bins_per_decade: self.bins_per_decade,
                ci,
            },
            estimator: self.estimator,
            hill_k: self.hill_k,
            tail: TailConfig {
                seed,
                ..TailConfig::default()
            },
            ..CompareConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub seed: u64,
    pub settings: Settings,
    pub methodology: MethodologyReport,
    pub cascades: Outcome<CascadeStats>,
    pub warnings: Vec<String>,
}

pub fn analyze(history: &ProjectHistory, settings: &Settings, seed: u64) -> AnalysisReport {
    let methodology =
        scaling::methodology_compare(history, settings.measure, &settings.compare_config(seed));
    let tau = settings.tau.unwrap_or_else(|| cascades::default_tau(history));
    let cascades: Outcome<CascadeStats> = cascades::branching_ratio(history, tau).into();

    let mut warnings = Vec::new();
    let mut note = |what: &str, err: Option<&str>| {
        if let Some(e) = err {
            warnings.push(format!("{what}: {e}"));
        }
    };
    note("arm A", methodology.arm_a.fit.error());
    note("arm B", methodology.arm_b.fit.error());
    if let Some(h) = &methodology.tails.hill {
        note("hill", h.error());
    }
    if let Some(m) = &methodology.tails.mle {
        note("mle", m.error());
    }
    note("cascades", cascades.error());
    if let Some(o) = methodology.arm_a.observations.ok() {
        if o.unavailable_commits > 0 {
            warnings.push(format!(
                "{} commits lack a usable {} measure (coverage {:.3})",
                o.unavailable_commits,
                o.measure,
                o.coverage()
            ));
        }
    }

    AnalysisReport {
        seed,
        settings: settings.clone(),
        methodology,
        cascades,
        warnings,
    }
}

pub fn render_analysis(r: &AnalysisReport) -> String {
    let mut out = scaling::render_text(&r.methodology);
    match &r.cascades {
        Outcome::Ok(c) => {
            let _ = writeln!(
                out,
                "cascades           {} over {} events (tau {} s), eta_hat {:.4}",
                c.cascades, c.events, c.tau, c.eta_hat
            );
        }
        Outcome::Error(e) => {
            let _ = writeln!(out, "cascades           unavailable ({e})");
        }
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRow {
    pub project: String,
    pub commits: usize,
    pub authors: usize,
    pub beta: Option<f64>,
    pub beta_ci: Option<[f64; 2]>,
    pub superlinear_production: Option<bool>,
    pub productivity_slope: Option<f64>,
    pub mu: Option<f64>,
    pub regime: Option<Regime>,
    pub single_commit_share: Option<f64>,
    pub eta_hat: Option<f64>,
    pub error: Option<String>,
}

impl ProjectRow {
    pub fn from_report(r: &AnalysisReport) -> Self {
        let m = &r.methodology;
        let fit_a = m.arm_a.fit.ok();
        ProjectRow {
            project: m.project.clone(),
            commits: m.commits,
            authors: m.authors,
            beta: fit_a.map(|f| f.beta),
            beta_ci: fit_a.map(|f| f.ci),
            superlinear_production: fit_a.map(|f| f.superlinear),
            productivity_slope: m.arm_b.fit.ok().map(|f| f.beta),
            mu: m.tails.mu(),
            regime: m.tails.regime(),
            single_commit_share: m.single_commit_share.ok().copied(),
            eta_hat: r.cascades.ok().map(|c| c.eta_hat),
            error: None,
        }
    }

    pub fn failed(project: String, error: String) -> Self {
        ProjectRow {
            project,
            commits: 0,
            authors: 0,
            beta: None,
            beta_ci: None,
            superlinear_production: None,
            productivity_slope: None,
            mu: None,
            regime: None,
            single_commit_share: None,
            eta_hat: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeTally {
    pub total: usize,
    pub superlinear_productivity: usize,
    pub superlinear_production: usize,
    pub linear_production: usize,
    pub undetermined: usize,
    /// Projects whose arm-A interval lies above one.
    pub arm_a_superlinear: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub seed: u64,
    pub settings: Settings,
    pub projects: Vec<ProjectRow>,
    pub tally: RegimeTally,
}

impl CorpusSummary {
    pub fn new(seed: u64, settings: Settings, projects: Vec<ProjectRow>) -> Self {
        let mut tally = RegimeTally {
            total: projects.len(),
            ..Default::default()
        };
        for p in &projects {
            match p.regime {
                Some(Regime::SuperlinearProductivity) => tally.superlinear_productivity += 1,
                Some(Regime::SuperlinearProduction) => tally.superlinear_production += 1,
                Some(Regime::LinearProduction) => tally.linear_production += 1,
                None => tally.undetermined += 1,
            }
            if p.superlinear_production == Some(true) {
                tally.arm_a_superlinear += 1;
            }
        }
        CorpusSummary {
            seed,
            settings,
            projects,
            tally,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

pub const SUMMARY_CSV_HEADER: &str =
    "project,commits,authors,beta,beta_lo,beta_hi,superlinear,productivity_slope,mu,regime,single_commit_share,eta_hat,error";

pub fn summary_csv(s: &CorpusSummary) -> String {
    let mut out = format!("{SUMMARY_CSV_HEADER}\n");
    let raw = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in &s.projects {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.project,
            p.commits,
            p.authors,
            raw(p.beta),
            raw(p.beta_ci.map(|c| c[0])),
            raw(p.beta_ci.map(|c| c[1])),
            p.superlinear_production.map(|b| b.to_string()).unwrap_or_default(),
            raw(p.productivity_slope),
            raw(p.mu),
            p.regime.map(|r| r.to_string()).unwrap_or_default(),
            raw(p.single_commit_share),
            raw(p.eta_hat),
            p.error.as_deref().unwrap_or("").replace(',', ";"),
        );
    }
    out
}

pub fn render_summary(s: &CorpusSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>8} {:>7} {:>8} {:>8} {:>8} {:<26}",
        "project", "commits", "authors", "beta", "P/n", "mu", "regime"
    );
    for p in &s.projects {
        let regime = match (&p.error, p.regime) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(r)) => r.to_string(),
            (None, None) => "undetermined".into(),
        };
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>7} {:>8} {:>8} {:>8} {:<26}",
            p.project,
            p.commits,
            p.authors,
            opt(p.beta),
            opt(p.productivity_slope),
            opt(p.mu),
            regime
        );
    }
    let t = &s.tally;
    let _ = writeln!(out);
    let _ = writeln!(out, "mu < 0.5 (superlinear productivity):      {}/{}", t.superlinear_productivity, t.total);
    let _ = writeln!(out, "0.5 <= mu < 1 (superlinear production): {}/{}", t.superlinear_production, t.total);
    let _ = writeln!(out, "mu >= 1 (linear production):             {}/{}", t.linear_production, t.total);
    let _ = writeln!(out, "undetermined:                            {}/{}", t.undetermined, t.total);
    let _ = writeln!(out, "arm A beta > 1 at 95%:                   {}/{}", t.arm_a_superlinear, t.total);
    out
}
