//! Commit-history ingestion.
//!
//! Two input formats are accepted:
//!
//! * the pipe-delimited log format, one record per commit:
//!
//!   ```text
//!   C|<commit_id>|<author_email>|<author_name>|<unix_ts>|<parent_count>
//!   <added>\t<deleted>\t<path>
//!   ...
//!   ```
//!
//!   Numstat rows attach to the most recent header. `-` (binary files) counts
//!   as zero. Blank lines separate records and are otherwise ignored.
//!
//! * JSON lines, `{id, email, name, ts, added, deleted, files:[{old,new}]?}`,
//!   which is the only format able to carry diff payloads.
//!
//! Author identity is the lowercased, trimmed email, falling back to the name
//! when the email is empty.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorId(String);

impl AuthorId {
    /// Canonical key for a raw `(email, name)` pair, or `None` if both are blank.
    pub fn from_raw(email: &str, name: &str) -> Option<Self> {
        let email = normalize(email);
        if !email.is_empty() {
            return Some(AuthorId(email));
        }
        let name = normalize(name);
        (!name.is_empty()).then_some(AuthorId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AuthorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn normalize(raw: &str) -> String {
    raw.trim().to_lowercase()
}

/// Pre- and post-image of one changed file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilePair {
    pub old: String,
    pub new: String,
}

impl FilePair {
    pub fn new(old: impl Into<String>, new: impl Into<String>) -> Self {
        FilePair {
            old: old.into(),
            new: new.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub id: String,
    pub author: AuthorId,
    /// Raw email as it appeared in the input.
    pub author_email: String,
    pub author_name: String,
    /// Author date, seconds since the Unix epoch (UTC).
    pub timestamp: i64,
    pub lines_added: u64,
    pub lines_deleted: u64,
    pub diff_payload: Option<Vec<FilePair>>,
}

impl CommitRecord {
    /// Builds a record with the default author identity.
    pub fn new(
        id: impl Into<String>,
        email: impl Into<String>,
        name: impl Into<String>,
        timestamp: i64,
        lines_added: u64,
        lines_deleted: u64,
    ) -> Result<Self> {
        let id = id.into();
        let author_email = email.into();
        let author_name = name.into();
        if id.trim().is_empty() {
            return Err(Error::Config("empty commit id".into()));
        }
        if timestamp < 0 {
            return Err(Error::Config(format!(
                "commit `{id}` has negative timestamp {timestamp}"
            )));
        }
        let author = AuthorId::from_raw(&author_email, &author_name)
            .ok_or_else(|| Error::Config(format!("commit `{id}` has no author identity")))?;
        Ok(CommitRecord {
            id,
            author,
            author_email,
            author_name,
            timestamp,
            lines_added,
            lines_deleted,
            diff_payload: None,
        })
    }

    pub fn with_payload(mut self, files: Vec<FilePair>) -> Self {
        self.diff_payload = Some(files);
        self
    }
}

/// A project's commits, ordered by timestamp with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectHistory {
    name: String,
    commits: Vec<CommitRecord>,
}

impl ProjectHistory {
    /// Sorts commits by timestamp (stable) and checks id uniqueness.
    pub fn new(name: impl Into<String>, mut commits: Vec<CommitRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &commits {
            if !seen.insert(c.id.as_str()) {
                return Err(Error::DuplicateCommit(c.id.clone()));
            }
        }
        commits.sort_by_key(|c| c.timestamp);
        Ok(ProjectHistory {
            name: name.into(),
            commits,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn commits(&self) -> &[CommitRecord] {
        &self.commits
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    pub fn first_ts(&self) -> Option<i64> {
        self.commits.first().map(|c| c.timestamp)
    }

    pub fn last_ts(&self) -> Option<i64> {
        self.commits.last().map(|c| c.timestamp)
    }

    /// Seconds between the first and the last commit.
    pub fn span(&self) -> i64 {
        match (self.first_ts(), self.last_ts()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    pub fn commits_per_author(&self) -> BTreeMap<&AuthorId, usize> {
        let mut counts = BTreeMap::new();
        for c in &self.commits {
            *counts.entry(&c.author).or_insert(0) += 1;
        }
        counts
    }

    pub fn author_count(&self) -> usize {
        self.commits_per_author().len()
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.commits.is_empty() {
            return Err(Error::InsufficientData(format!(
                "project `{}` has no commits",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub project_name: String,
    /// Keep records whose parent count is two or more.
    pub include_merges: bool,
}

struct PendingCommit {
    record: CommitRecord,
    parents: u32,
}

/// Parses the pipe-delimited log format.
pub fn parse_commit_log(text: &str, opts: &ParseOptions) -> Result<ProjectHistory> {
    let mut pending: Vec<PendingCommit> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with("C|") {
            pending.push(parse_header(line, line_no)?);
            continue;
        }
        let Some(current) = pending.last_mut() else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `C|` header, found `{}`", truncate(line)),
            });
        };
        let (added, deleted) = parse_numstat(line, line_no)?;
        current.record.lines_added += added;
        current.record.lines_deleted += deleted;
    }

    let commits = pending
        .into_iter()
        .filter(|p| opts.include_merges || p.parents < 2)
        .map(|p| p.record)
        .collect();
    ProjectHistory::new(opts.project_name.clone(), commits)
}

fn parse_header(line: &str, line_no: usize) -> Result<PendingCommit> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    // The author name is the only free-text field, so peel fixed fields off
    // both ends and let the name keep any `|` it contains.
    let body = &line[2..];
    let mut head = body.splitn(3, '|');
    let id = head.next().unwrap_or_default();
    let email = head.next();
    let rest = head.next();
    let (Some(email), Some(rest)) = (email, rest) else {
        return Err(err(format!("malformed header `{}`", truncate(line))));
    };
    let mut tail = rest.rsplitn(3, '|');
    let parents = tail.next();
    let ts = tail.next();
    let name = tail.next();
    let (Some(parents), Some(ts), Some(name)) = (parents, ts, name) else {
        return Err(err(format!("malformed header `{}`", truncate(line))));
    };

    let timestamp: i64 = ts
        .trim()
        .parse()
        .map_err(|_| err(format!("invalid timestamp `{ts}`")))?;
    let parents: u32 = parents
        .trim()
        .parse()
        .map_err(|_| err(format!("invalid parent count `{parents}`")))?;
    let record = CommitRecord::new(id, email, name, timestamp, 0, 0).map_err(|e| match e {
        Error::Config(m) => err(m),
        other => other,
    })?;
    Ok(PendingCommit { record, parents })
}

fn parse_numstat(line: &str, line_no: usize) -> Result<(u64, u64)> {
    let mut fields = line.splitn(3, '\t');
    let (Some(a), Some(d), Some(_path)) = (fields.next(), fields.next(), fields.next()) else {
        return Err(Error::Parse {
            line: line_no,
            message: format!("malformed numstat row `{}`", truncate(line)),
        });
    };
    let count = |s: &str| -> Result<u64> {
        let s = s.trim();
        if s == "-" {
            return Ok(0);
        }
        s.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid line count `{s}`"),
        })
    };
    Ok((count(a)?, count(d)?))
}

fn truncate(line: &str) -> String {
    line.chars().take(80).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonCommit {
    id: String,
    #[serde(default)]
    email: String,
    #[serde(default)]
    name: String,
    ts: i64,
    #[serde(default)]
    added: u64,
    #[serde(default)]
    deleted: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    files: Option<Vec<FilePair>>,
}

/// Parses one JSON commit object per line.
pub fn parse_jsonl(text: &str, project_name: &str) -> Result<ProjectHistory> {
    let mut commits = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let j: JsonCommit = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let mut record = CommitRecord::new(j.id, j.email, j.name, j.ts, j.added, j.deleted)
            .map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        record.diff_payload = j.files;
        commits.push(record);
    }
    ProjectHistory::new(project_name, commits)
}

/// Writes the canonical JSON-lines form: the email field carries the resolved
/// author key.
pub fn to_jsonl(history: &ProjectHistory) -> String {
    let mut out = String::new();
    for c in history.commits() {
        let j = JsonCommit {
            id: c.id.clone(),
            email: c.author.as_str().to_string(),
            name: c.author_name.clone(),
            ts: c.timestamp,
            added: c.lines_added,
            deleted: c.lines_deleted,
            files: c.diff_payload.clone(),
        };
        out.push_str(&serde_json::to_string(&j).expect("commit serializes"));
        out.push('\n');
    }
    out
}

/// Alias map and deny-list applied during author resolution.
#[derive(Debug, Clone, Default)]
pub struct AuthorPolicy {
    /// raw identity -> canonical identity; chains are followed.
    pub aliases: BTreeMap<String, String>,
    /// Canonical keys (or names) whose commits are dropped.
    pub deny: Vec<String>,
}

struct Resolver {
    aliases: BTreeMap<String, String>,
    deny: BTreeSet<String>,
}

impl Resolver {
    fn new(policy: &AuthorPolicy) -> Result<Self> {
        let mut aliases = BTreeMap::new();
        for (k, v) in &policy.aliases {
            let (k, v) = (normalize(k), normalize(v));
            if k.is_empty() || v.is_empty() {
                return Err(Error::Config("alias map contains an empty identity".into()));
            }
            if k != v {
                aliases.insert(k, v);
            }
        }
        for start in aliases.keys() {
            let mut seen = BTreeSet::from([start.as_str()]);
            let mut cur = start.as_str();
            while let Some(next) = aliases.get(cur) {
                if !seen.insert(next.as_str()) {
                    return Err(Error::Config(format!(
                        "cyclic alias map: `{start}` never reaches a canonical identity"
                    )));
                }
                cur = next;
            }
        }
        let deny = policy.deny.iter().map(|d| normalize(d)).collect();
        Ok(Resolver { aliases, deny })
    }

    fn follow(&self, key: &str) -> Option<String> {
        let mut cur = self.aliases.get(key)?;
        while let Some(next) = self.aliases.get(cur) {
            cur = next;
        }
        Some(cur.clone())
    }

    fn resolve(&self, c: &CommitRecord) -> AuthorId {
        let email = normalize(&c.author_email);
        let name = normalize(&c.author_name);
        let mapped = (!email.is_empty())
            .then(|| self.follow(&email))
            .flatten()
            .or_else(|| self.follow(&name));
        match mapped {
            Some(key) => AuthorId(key),
            None => c.author.clone(),
        }
    }

    fn denied(&self, c: &CommitRecord, id: &AuthorId) -> bool {
        self.deny.contains(id.as_str()) || self.deny.contains(&normalize(&c.author_name))
    }
}

/// Re-derives every author key under `policy`. Commits of deny-listed
/// authors are dropped; everything else is preserved.
pub fn resolve_authors(history: &ProjectHistory, policy: &AuthorPolicy) -> Result<ProjectHistory> {
    let resolver = Resolver::new(policy)?;
    let commits = history
        .commits()
        .iter()
        .filter_map(|c| {
            let author = resolver.resolve(c);
            if resolver.denied(c, &author) {
                return None;
            }
            Some(CommitRecord {
                author,
                ..c.clone()
            })
        })
        .collect();
    Ok(ProjectHistory {
        name: history.name.clone(),
        commits,
    })
}
