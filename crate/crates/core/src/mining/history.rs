use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use similar::{capture_diff_slices, Algorithm, DiffTag};

use super::calls::CallGraph;
use super::git::GitRepo;
use crate::error::{Error, Result};
use crate::java::extract_methods;
use crate::model::{lifetime_days, ContextBundle, MethodIdentity, MethodVersion, VersionHistory};

/// Added plus deleted lines in a minimal line diff between two method texts.
pub fn changed_lines(old: &str, new: &str) -> u64 {
    let old: Vec<&str> = old.lines().collect();
    let new: Vec<&str> = new.lines().collect();
    capture_diff_slices(Algorithm::Myers, &old, &new)
        .iter()
        .map(|op| {
            let (tag, o, n) = op.as_tag_tuple();
            match tag {
                DiffTag::Equal => 0,
                DiffTag::Delete => o.len(),
                DiffTag::Insert => n.len(),
                DiffTag::Replace => o.len() + n.len(),
            }
        })
        .sum::<usize>() as u64
}

/// Snapshot of one method at one commit.
struct Snapshot {
    hash: String,
    time: i64,
    text: String,
}

/// Collapse a newest-first run of snapshots into kept versions: a snapshot is
/// kept only when its text differs from the next older kept one, and it is
/// dated by the commit that introduced that text.
fn collapse(run: Vec<Snapshot>) -> Vec<MethodVersion> {
    let mut kept: Vec<MethodVersion> = Vec::new();
    for snap in run.into_iter().rev() {
        let changed = match kept.last() {
            Some(prev) if prev.source_text == snap.text => continue,
            Some(prev) => changed_lines(&prev.source_text, &snap.text),
            None => 0,
        };
        kept.push(MethodVersion {
            commit_hash: snap.hash,
            author_time: snap.time,
            source_text: snap.text,
            changed_lines: changed,
        });
    }
    kept.reverse();
    kept
}

type MethodKey = (String, String);

/// Histories for every method of one HEAD file, or only `wanted` when given.
fn file_histories(
    repo: &GitRepo,
    project: &str,
    path: &str,
    head_time: i64,
    wanted: Option<&MethodKey>,
) -> Result<Vec<VersionHistory>> {
    let Some(head_src) = repo.show_file("HEAD", path)? else {
        return Ok(Vec::new());
    };
    let mut keys: Vec<MethodKey> = Vec::new();
    for m in extract_methods(&head_src).methods {
        let key = (m.qualified_name, m.signature);
        if wanted.is_some_and(|w| *w != key) {
            continue;
        }
        if keys.contains(&key) {
            log::warn!("{path}: duplicate declaration {}{}", key.0, key.1);
            continue;
        }
        keys.push(key);
    }
    if keys.is_empty() {
        return Ok(Vec::new());
    }

    // Per-revision method texts, newest first.
    let mut snapshots: Vec<(String, i64, HashMap<MethodKey, String>)> = Vec::new();
    for rev in repo.file_history(path)? {
        let texts = match repo.show_file(&rev.hash, &rev.path)? {
            Some(src) => {
                let mut map = HashMap::new();
                for m in extract_methods(&src).methods {
                    let text = m.text(&src).to_string();
                    map.entry((m.qualified_name, m.signature)).or_insert(text);
                }
                map
            }
            None => HashMap::new(),
        };
        snapshots.push((rev.hash, rev.author_time, texts));
    }

    let mut out = Vec::with_capacity(keys.len());
    for key in keys {
        let mut run = Vec::new();
        for (hash, time, texts) in &snapshots {
            match texts.get(&key) {
                Some(text) => run.push(Snapshot {
                    hash: hash.clone(),
                    time: *time,
                    text: text.clone(),
                }),
                None => break,
            }
        }
        let versions = collapse(run);
        if versions.is_empty() {
            continue;
        }
        let oldest = versions[versions.len() - 1].author_time;
        out.push(VersionHistory {
            identity: MethodIdentity {
                project: project.to_string(),
                file_path: path.to_string(),
                qualified_name: key.0,
                signature: key.1,
            },
            lifetime_days: lifetime_days(head_time, oldest),
            versions,
        });
    }
    Ok(out)
}

/// Every distinct snapshot of one method, newest first.
pub fn build_version_history(repo: &GitRepo, id: &MethodIdentity) -> Result<VersionHistory> {
    let head_time = repo.head_time()?;
    let key = (id.qualified_name.clone(), id.signature.clone());
    file_histories(repo, &id.project, &id.file_path, head_time, Some(&key))?
        .into_iter()
        .next()
        .ok_or_else(|| Error::MethodNotFound(id.to_string()))
}

/// Mine all Java methods present at HEAD, with call hierarchy contexts.
/// Output is sorted by identity and independent of worker scheduling.
pub fn mine_repository(repo: &GitRepo, project: &str) -> Result<Vec<ContextBundle>> {
    let head_time = repo.head_time()?;
    let files = repo.java_files_at_head()?;

    let per_file: Vec<Result<(String, String, Vec<VersionHistory>)>> = files
        .par_iter()
        .map(|path| {
            let src = repo.show_file("HEAD", path)?.unwrap_or_default();
            let histories = file_histories(repo, project, path, head_time, None)?;
            Ok((path.clone(), src, histories))
        })
        .collect();

    let mut snapshot = BTreeMap::new();
    let mut histories = Vec::new();
    for item in per_file {
        let (path, src, hs) = item?;
        snapshot.insert(path, src);
        histories.extend(hs);
    }
    histories.sort_by(|a, b| a.identity.cmp(&b.identity));

    let graph = CallGraph::build(project, &snapshot);
    Ok(histories
        .into_iter()
        .map(|h| {
            let calls = graph.hierarchy(&h.identity);
            ContextBundle::new(h, calls)
        })
        .collect())
}
