use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use scalemetrics_core::ingest::{to_jsonl, ProjectHistory};
use scalemetrics_core::metrics::ProductionMeasure;
use scalemetrics_core::scaling::{self, EstimatorChoice};
use scalemetrics_core::simulate::{
    self, BranchingModel, ZipfGrowthConfig, ZipfTeamModel,
};
use scalemetrics_core::windows;
use scalemetrics_core::stats;

use crate::args::{
    AnalysisArgs, AnalyzeArgs, CompareArgs, EstimatorArg, Generator, IngestArgs, MeasureArg,
    OutputFormat, ReportArgs, SimulateArgs,
};
use crate::error::{CliError, Result};
use crate::input::{self, parse_duration};
use crate::report::{self, AnalysisReport, CorpusSummary, ProjectRow, Settings};

/// What a command wants printed to stdout and stderr.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    /// Informational lines for stderr.
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn ingest(args: &IngestArgs) -> Result<Output> {
    let history = input::load_history(&args.input, &args.input_opts)?;
    let jsonl = to_jsonl(&history);
    let mut out = Output::default();
    match &args.output {
        Some(path) => input::write(path, &jsonl)?,
        None => out.stdout.push_str(&jsonl),
    }
    let summary = format!(
        "{} commits, {} authors, span {:.1} days",
        history.len(),
        history.author_count(),
        history.span() as f64 / windows::DAY as f64
    );
    // stdout carries the history itself when no output path is given.
    if args.output.is_some() {
        out.stdout.push_str(&summary);
        out.stdout.push('\n');
    } else {
        out.notes.push(summary);
    }
    Ok(out)
}

pub fn settings(a: &AnalysisArgs) -> Result<Settings> {
    if !(a.quantile > 0.0 && a.quantile < 1.0) {
        return Err(CliError::Usage(format!(
            "--quantile must lie in (0,1), got {}",
            a.quantile
        )));
    }
    if a.bins_per_decade == 0 {
        return Err(CliError::Usage("--bins-per-decade must be positive".into()));
    }
    Ok(Settings {
        window: parse_duration(&a.window)?,
        quantile: a.quantile,
        measure: match a.measure {
            MeasureArg::Commits => ProductionMeasure::Commits,
            MeasureArg::Loc => ProductionMeasure::LocTotal,
            MeasureArg::LocAdded => ProductionMeasure::LocAdded,
            MeasureArg::LocDeleted => ProductionMeasure::LocDeleted,
            MeasureArg::Lev => ProductionMeasure::LevenshteinDiff,
        },
        estimator: match a.estimator {
            EstimatorArg::Hill => EstimatorChoice::Hill,
            EstimatorArg::Mle => EstimatorChoice::Mle,
            EstimatorArg::Both => EstimatorChoice::Both,
        },
        hill_k: a.hill_k,
        bins_per_decade: (!a.no_binning).then_some(a.bins_per_decade),
        bootstrap: a.bootstrap,
        tau: a.tau.as_deref().map(parse_duration).transpose()?,
    })
}

fn require_commits(history: &ProjectHistory, path: &Path) -> Result<()> {
    if history.is_empty() {
        return Err(CliError::Data(format!("{}: no commits to analyze", path.display())));
    }
    Ok(())
}

fn write_bundle(dir: &Path, r: &AnalysisReport) -> Result<()> {
    let m = &r.methodology;
    input::write(&dir.join("report.json"), &to_json(r))?;
    input::write(&dir.join("report.txt"), &report::render_analysis(r))?;
    if let Some(o) = m.arm_a.observations.ok() {
        input::write(&dir.join("arm_a_observations.csv"), &o.to_csv())?;
        if let Some(bpd) = r.settings.bins_per_decade {
            let binned = scaling::log_bin(&o.observations, bpd);
            input::write(&dir.join("arm_a_binned.csv"), &scaling::binned_csv(&binned))?;
        }
    }
    if let Some(o) = m.arm_b.observations.ok() {
        input::write(&dir.join("arm_b_observations.csv"), &o.to_csv())?;
    }
    if let Some(c) = r.cascades.ok() {
        input::write(&dir.join("cascades.json"), &to_json(c))?;
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs, seed: u64) -> Result<Output> {
    let settings = settings(&args.analysis)?;
    let history = input::load_history(&args.input, &args.input_opts)?;
    require_commits(&history, &args.input)?;
    let r = report::analyze(&history, &settings, seed);
    if let Some(dir) = &args.out_dir {
        write_bundle(dir, &r)?;
    }
    let stdout = match args.analysis.format {
        OutputFormat::Json => to_json(&r),
        OutputFormat::Text => report::render_analysis(&r),
        OutputFormat::Csv => r
            .methodology
            .arm_a
            .observations
            .ok()
            .map(|o| o.to_csv())
            .unwrap_or_default(),
    };
    Ok(Output {
        stdout,
        warnings: r.warnings.clone(),
        ..Output::default()
    })
}

fn analyze_path(path: &Path, args: &CompareArgs, settings: &Settings, seed: u64) -> ProjectRow {
    let name = input::project_name(path);
    match input::load_history(path, &args.input_opts) {
        Ok(h) if h.is_empty() => ProjectRow::failed(name, "no commits".into()),
        Ok(h) => ProjectRow::from_report(&report::analyze(&h, settings, seed)),
        Err(e) => ProjectRow::failed(name, e.to_string()),
    }
}

pub fn compare(args: &CompareArgs, seed: u64) -> Result<Output> {
    let settings = settings(&args.analysis)?;
    let files = input::corpus_files(&args.corpus)?;
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<ProjectRow> = pool.install(|| {
        files
            .par_iter()
            .map(|p| analyze_path(p, args, &settings, seed))
            .collect()
    });
    let warnings = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.project)))
        .collect();
    let summary = CorpusSummary::new(seed, settings, rows);
    if let Some(dir) = &args.out_dir {
        input::write(&dir.join("summary.json"), &to_json(&summary))?;
        input::write(&dir.join("summary.csv"), &report::summary_csv(&summary))?;
        input::write(&dir.join("summary.txt"), &report::render_summary(&summary))?;
    }
    let stdout = match args.analysis.format {
        OutputFormat::Json => to_json(&summary),
        OutputFormat::Csv => report::summary_csv(&summary),
        OutputFormat::Text => report::render_summary(&summary),
    };
    Ok(Output {
        stdout,
        warnings,
        ..Output::default()
    })
}

pub fn render(args: &ReportArgs) -> Result<Output> {
    let text = input::read(&args.report)?;
    let invalid = |e: serde_json::Error| {
        CliError::Data(format!("{}: not a scalemetrics report: {e}", args.report.display()))
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(invalid)?;
    let stdout = if value.get("tally").is_some() {
        let s: CorpusSummary = serde_json::from_value(value).map_err(invalid)?;
        match args.format {
            OutputFormat::Text => report::render_summary(&s),
            OutputFormat::Csv => report::summary_csv(&s),
            OutputFormat::Json => to_json(&s),
        }
    } else {
        let r: AnalysisReport = serde_json::from_value(value).map_err(invalid)?;
        match args.format {
            OutputFormat::Text => report::render_analysis(&r),
            OutputFormat::Csv => r
                .methodology
                .arm_a
                .observations
                .ok()
                .map(|o| o.to_csv())
                .unwrap_or_default(),
            OutputFormat::Json => to_json(&r),
        }
    };
    Ok(Output {
        stdout,
        ..Output::default()
    })
}

fn sidecar_path(args: &SimulateArgs, output: &Path) -> PathBuf {
    args.sidecar.clone().unwrap_or_else(|| {
        let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("history");
        output.with_file_name(format!("{stem}.truth.json"))
    })
}

#[derive(Debug, Serialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
enum Truth {
    Zipf {
        seed: u64,
        top: f64,
        alpha: f64,
        n: u64,
        max_team_size: u64,
        /// Real-valued `S(n)`.
        total: f64,
        commits: usize,
    },
    ZipfGrowth {
        seed: u64,
        top: f64,
        alpha: f64,
        window: i64,
        team_sizes: Vec<u64>,
        /// Log-log slope of whole-unit team totals against team size.
        expected_beta: f64,
        commits: usize,
    },
    Branching {
        seed: u64,
        eta: f64,
        mu: f64,
        immigrant_rate: f64,
        offspring_delay_scale: f64,
        horizon: f64,
        participants: usize,
        immigrants: usize,
        events: usize,
        truncated: bool,
    },
}

fn core(context: &str) -> impl Fn(scalemetrics_core::Error) -> CliError + '_ {
    move |e| CliError::core(context, e)
}

pub fn simulate(args: &SimulateArgs, seed: u64) -> Result<Output> {
    let (history, truth) = match args.generator {
        Generator::Zipf {
            top,
            alpha,
            n,
            ref window,
        } => {
            let model = ZipfTeamModel::new(top, alpha, n).map_err(core("zipf"))?;
            let h = simulate::zipf_team_history(&model, parse_duration(window)?, seed)
                .map_err(core("zipf"))?;
            let truth = Truth::Zipf {
                seed,
                top,
                alpha,
                n,
                max_team_size: simulate::max_team_size(top, alpha).map_err(core("zipf"))?,
                total: simulate::zipf_total(&model),
                commits: h.len(),
            };
            (h, truth)
        }
        Generator::ZipfGrowth {
            top,
            alpha,
            windows,
            n_min,
            n_max,
            ref window,
        } => {
            let cfg = ZipfGrowthConfig {
                top,
                alpha,
                windows,
                n_min,
                n_max,
                window_length: parse_duration(window)?,
                seed,
            };
            let out = simulate::simulate_zipf_growth(&cfg).map_err(core("zipf-growth"))?;
            let expected_beta = growth_beta(&cfg, &out.team_sizes);
            let truth = Truth::ZipfGrowth {
                seed,
                top,
                alpha,
                window: cfg.window_length,
                expected_beta,
                commits: out.history.len(),
                team_sizes: out.team_sizes,
            };
            (out.history, truth)
        }
        Generator::Branching {
            eta,
            rate,
            ref delay,
            ref horizon,
            participants,
            mu,
            cap,
        } => {
            let model = BranchingModel {
                eta,
                immigrant_rate: rate,
                offspring_delay_scale: parse_duration(delay)? as f64,
                horizon: parse_duration(horizon)? as f64,
                seed,
                event_cap: cap,
            };
            let out = simulate::simulate_branching_stream(&model, participants, mu)
                .map_err(core("branching"))?;
            let truth = Truth::Branching {
                seed,
                eta,
                mu,
                immigrant_rate: rate,
                offspring_delay_scale: model.offspring_delay_scale,
                horizon: model.horizon,
                participants,
                immigrants: out.immigrants,
                events: out.history.len(),
                truncated: out.truncated,
            };
            (out.history, truth)
        }
    };

    let mut out = Output::default();
    let jsonl = to_jsonl(&history);
    match &args.output {
        Some(path) => {
            input::write(path, &jsonl)?;
            input::write(&sidecar_path(args, path), &to_json(&truth))?;
            out.stdout = format!("{} commits written to {}\n", history.len(), path.display());
        }
        None => {
            out.stdout = jsonl;
            if let Some(sidecar) = &args.sidecar {
                input::write(sidecar, &to_json(&truth))?;
            }
        }
    }
    if let Truth::Branching { truncated: true, .. } = truth {
        out.warnings.push("event cap reached; stream truncated".into());
    }
    Ok(out)
}

/// OLS slope of ln(total whole-unit commits) on ln(team size) over the
/// generated windows.
fn growth_beta(cfg: &ZipfGrowthConfig, sizes: &[u64]) -> f64 {
    let lx: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let m = ZipfTeamModel {
                top: cfg.top,
                alpha: cfg.alpha,
                n,
            };
            ((1..=n).map(|j| simulate::rounded_contribution(&m, j)).sum::<u64>() as f64).ln()
        })
        .collect();
    stats::ols(&lx, &ly).map(|f| f.slope).unwrap_or(f64::NAN)
}

