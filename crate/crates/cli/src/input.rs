use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use scalemetrics_core::ingest::{
    parse_commit_log, parse_jsonl, resolve_authors, AuthorPolicy, ParseOptions, ProjectHistory,
};

use crate::args::{InputArgs, InputFormat};
use crate::error::{CliError, Result};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn is_jsonl(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json" | "ndjson")
    )
}

pub fn project_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("project")
        .to_string()
}

fn load_policy(opts: &InputArgs) -> Result<AuthorPolicy> {
    let aliases = match &opts.aliases {
        None => BTreeMap::new(),
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| {
            CliError::Usage(format!("{}: alias map must be a JSON object of strings: {e}", p.display()))
        })?,
    };
    Ok(AuthorPolicy {
        aliases,
        deny: opts.deny.clone(),
    })
}

/// Reads, parses and resolves one history.
pub fn load_history(path: &Path, opts: &InputArgs) -> Result<ProjectHistory> {
    let text = read(path)?;
    let name = project_name(path);
    let jsonl = match opts.input_format {
        InputFormat::Jsonl => true,
        InputFormat::Log => false,
        InputFormat::Auto => is_jsonl(path),
    };
    let context = || path.display().to_string();
    let history = if jsonl {
        parse_jsonl(&text, &name)
    } else {
        parse_commit_log(
            &text,
            &ParseOptions {
                project_name: name,
                include_merges: opts.include_merges,
            },
        )
    }
    .map_err(|e| CliError::core(context(), e))?;
    let policy = load_policy(opts)?;
    resolve_authors(&history, &policy).map_err(|e| CliError::core(context(), e))
}

/// Histories in `dir`, sorted by file name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("log" | "txt" | "jsonl" | "ndjson")
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Parses durations such as `5d`, `12h`, `30m`, `90s`, `2w` or bare seconds.
pub fn parse_duration(s: &str) -> Result<i64> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit() && c != '.').unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid duration `{s}`")))?;
    let scale = match unit {
        "" | "s" => 1.0,
        "m" => 60.0,
        "h" => 3_600.0,
        "d" => 86_400.0,
        "w" => 604_800.0,
        other => return Err(CliError::Usage(format!("unknown duration unit `{other}` in `{s}`"))),
    };
    let secs = (value * scale).round();
    if secs < 1.0 {
        return Err(CliError::Usage(format!("duration `{s}` must be at least one second")));
    }
    Ok(secs as i64)
}
