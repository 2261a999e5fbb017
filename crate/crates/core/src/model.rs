//! Method identities, version histories and the corpus JSONL format.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;
pub const MAX_DAYS: i64 = 36_500;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodIdentity {
    pub project: String,
    /// Repository-relative path at HEAD.
    pub file_path: String,
    pub qualified_name: String,
    pub signature: String,
}

impl MethodIdentity {
    pub fn simple_name(&self) -> &str {
        self.qualified_name
            .rsplit('.')
            .next()
            .unwrap_or(&self.qualified_name)
    }
}

impl fmt::Display for MethodIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}{}",
            self.project, self.file_path, self.qualified_name, self.signature
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodVersion {
    pub commit_hash: String,
    /// Author time, UTC seconds.
    pub author_time: i64,
    pub source_text: String,
    /// Added plus deleted lines against the previous kept version; 0 for the oldest.
    pub changed_lines: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionHistory {
    pub identity: MethodIdentity,
    /// Newest first; `versions[0]` is the current snapshot.
    pub versions: Vec<MethodVersion>,
    pub lifetime_days: i64,
}

impl VersionHistory {
    pub fn current(&self) -> &MethodVersion {
        &self.versions[0]
    }

    pub fn oldest(&self) -> &MethodVersion {
        &self.versions[self.versions.len() - 1]
    }

    /// Check the structural invariants: non-empty, strictly decreasing time,
    /// adjacent texts distinct, well-formed hashes, consistent lifetime.
    pub fn check_invariants(&self, head_time: Option<i64>) -> std::result::Result<(), String> {
        if self.versions.is_empty() {
            return Err(format!("{}: empty history", self.identity));
        }
        for w in self.versions.windows(2) {
            if w[0].author_time <= w[1].author_time {
                return Err(format!(
                    "{}: author times not strictly decreasing",
                    self.identity
                ));
            }
            if w[0].source_text == w[1].source_text {
                return Err(format!("{}: adjacent versions share text", self.identity));
            }
        }
        for v in &self.versions {
            if v.commit_hash.len() != 40 || !v.commit_hash.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(format!(
                    "{}: bad commit hash {}",
                    self.identity, v.commit_hash
                ));
            }
        }
        if self.oldest().changed_lines != 0 {
            return Err(format!("{}: oldest version has a delta", self.identity));
        }
        if let Some(head) = head_time {
            if self.lifetime_days != lifetime_days(head, self.oldest().author_time) {
                return Err(format!("{}: lifetime mismatch", self.identity));
            }
        }
        Ok(())
    }
}

/// Whole days between the oldest version and the HEAD commit, clamped to `[0, MAX_DAYS]`.
pub fn lifetime_days(head_time: i64, oldest_time: i64) -> i64 {
    (head_time - oldest_time)
        .div_euclid(SECONDS_PER_DAY)
        .clamp(0, MAX_DAYS)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallHierarchy {
    pub longest_caller: Option<String>,
    pub longest_callee: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextBundle {
    pub history: VersionHistory,
    pub calls: CallHierarchy,
    pub days: i64,
}

impl ContextBundle {
    pub fn new(history: VersionHistory, calls: CallHierarchy) -> Self {
        let days = history.lifetime_days;
        Self {
            history,
            calls,
            days,
        }
    }

    pub fn identity(&self) -> &MethodIdentity {
        &self.history.identity
    }

    pub fn current_text(&self) -> &str {
        &self.history.current().source_text
    }
}

/// One line of the corpus JSONL file. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub project: String,
    pub file: String,
    pub name: String,
    pub signature: String,
    pub days: i64,
    pub versions: Vec<VersionRecord>,
    pub caller: Option<String>,
    pub callee: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionRecord {
    pub hash: String,
    pub time: i64,
    pub text: String,
    pub changed_lines: u64,
}

impl From<&ContextBundle> for CorpusRecord {
    fn from(b: &ContextBundle) -> Self {
        let id = b.identity();
        CorpusRecord {
            project: id.project.clone(),
            file: id.file_path.clone(),
            name: id.qualified_name.clone(),
            signature: id.signature.clone(),
            days: b.days,
            versions: b
                .history
                .versions
                .iter()
                .map(|v| VersionRecord {
                    hash: v.commit_hash.clone(),
                    time: v.author_time,
                    text: v.source_text.clone(),
                    changed_lines: v.changed_lines,
                })
                .collect(),
            caller: b.calls.longest_caller.clone(),
            callee: b.calls.longest_callee.clone(),
        }
    }
}

impl CorpusRecord {
    fn into_bundle(self, line: usize) -> Result<ContextBundle> {
        if self.versions.is_empty() {
            return Err(Error::SchemaError {
                line,
                message: "record has no versions".into(),
            });
        }
        if !(0..=MAX_DAYS).contains(&self.days) {
            return Err(Error::SchemaError {
                line,
                message: format!("days {} out of range", self.days),
            });
        }
        let identity = MethodIdentity {
            project: self.project,
            file_path: self.file,
            qualified_name: self.name,
            signature: self.signature,
        };
        let versions = self
            .versions
            .into_iter()
            .map(|v| MethodVersion {
                commit_hash: v.hash,
                author_time: v.time,
                source_text: v.text,
                changed_lines: v.changed_lines,
            })
            .collect();
        Ok(ContextBundle {
            history: VersionHistory {
                identity,
                versions,
                lifetime_days: self.days,
            },
            calls: CallHierarchy {
                longest_caller: self.caller,
                longest_callee: self.callee,
            },
            days: self.days,
        })
    }
}

pub fn write_corpus<W: Write>(mut out: W, corpus: &[ContextBundle]) -> Result<()> {
    for bundle in corpus {
        serde_json::to_writer(&mut out, &CorpusRecord::from(bundle))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_corpus<R: BufRead>(input: R) -> Result<Vec<ContextBundle>> {
    let mut corpus = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(&line).map_err(|e| Error::SchemaError {
            line: idx + 1,
            message: e.to_string(),
        })?;
        corpus.push(record.into_bundle(idx + 1)?);
    }
    Ok(corpus)
}

pub fn load_corpus(path: &std::path::Path) -> Result<Vec<ContextBundle>> {
    let file = std::fs::File::open(path)?;
    read_corpus(std::io::BufReader::new(file))
}

pub fn save_corpus(path: &std::path::Path, corpus: &[ContextBundle]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_corpus(std::io::BufWriter::new(file), corpus)
}
