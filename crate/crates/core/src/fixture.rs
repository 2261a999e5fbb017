//! Synthetic git repositories whose mined histories are known in advance.
//!
//! A [`FixtureSpec`] lists commits with timestamps and method-level edits.
//! [`synth_fixture`] materialises it as a real repository, and
//! [`FixtureSpec::expected_histories`] computes what mining that repository
//! must return, straight from the `FixtureSpec`. The expected side uses its own LCS
//! line diff so it stays independent of the miner's diff implementation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::java::extract_methods;
use crate::model::{lifetime_days, MethodIdentity, MethodVersion, VersionHistory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub project: String,
    pub commits: Vec<FixtureCommit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureCommit {
    /// Author and committer time, UTC seconds. Strictly increasing across commits.
    pub time: i64,
    #[serde(default)]
    pub edits: Vec<Edit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    /// Insert or replace a method; its identity is parsed from `text`.
    Put {
        file: String,
        class: String,
        text: String,
    },
    /// Remove a method by simple name and signature.
    Delete {
        file: String,
        name: String,
        signature: String,
    },
    /// Change the file without touching any method body.
    Touch { file: String },
    /// Move a file to a new path.
    Rename { from: String, to: String },
}

#[derive(Debug, Clone)]
struct FileState {
    lineage: usize,
    class: String,
    /// ((qualified name, signature), text) in insertion order.
    methods: Vec<((String, String), String)>,
    touches: u32,
}

type Snapshot = BTreeMap<String, FileState>;

/// Parse a single method text inside `class` and return its key.
fn method_key(class: &str, text: &str) -> Result<(String, String)> {
    let wrapped = format!("class {class} {{\n{text}\n}}");
    let offset = class.len() + 9;
    let ex = extract_methods(&wrapped);
    let m = ex
        .methods
        .into_iter()
        .find(|m| m.span == (offset..offset + text.len()))
        .ok_or_else(|| {
            Error::InvalidFixture(format!("not a single method declaration: {text:?}"))
        })?;
    if !ex.diagnostics.is_empty() {
        return Err(Error::InvalidFixture(format!(
            "method text does not lex cleanly: {text:?}"
        )));
    }
    Ok((m.qualified_name, m.signature))
}

impl FixtureSpec {
    /// Replay the edits, returning the file set after every commit.
    fn replay(&self) -> Result<Vec<Snapshot>> {
        if self.commits.is_empty() {
            return Err(Error::InvalidFixture("no commits".into()));
        }
        for w in self.commits.windows(2) {
            if w[1].time <= w[0].time {
                return Err(Error::InvalidFixture(
                    "commit times must strictly increase".into(),
                ));
            }
        }
        let mut state: Snapshot = BTreeMap::new();
        let mut next_lineage = 0;
        let mut out = Vec::with_capacity(self.commits.len());
        for (ci, commit) in self.commits.iter().enumerate() {
            for edit in &commit.edits {
                match edit {
                    Edit::Put { file, class, text } => {
                        validate_path(file)?;
                        let key = method_key(class, text)?;
                        let entry = state.entry(file.clone()).or_insert_with(|| {
                            next_lineage += 1;
                            FileState {
                                lineage: next_lineage,
                                class: class.clone(),
                                methods: Vec::new(),
                                touches: 0,
                            }
                        });
                        if entry.class != *class {
                            return Err(Error::InvalidFixture(format!(
                                "commit {ci}: {file} declares class {}, not {class}",
                                entry.class
                            )));
                        }
                        match entry.methods.iter_mut().find(|(k, _)| *k == key) {
                            Some(slot) => slot.1 = text.clone(),
                            None => entry.methods.push((key, text.clone())),
                        }
                    }
                    Edit::Delete {
                        file,
                        name,
                        signature,
                    } => {
                        let entry = state.get_mut(file).ok_or_else(|| {
                            Error::InvalidFixture(format!("commit {ci}: no file {file}"))
                        })?;
                        let qualified = format!("{}.{}", entry.class, name);
                        let before = entry.methods.len();
                        entry
                            .methods
                            .retain(|((q, s), _)| !(*q == qualified && s == signature));
                        if entry.methods.len() == before {
                            return Err(Error::InvalidFixture(format!(
                                "commit {ci}: no method {qualified}{signature} in {file}"
                            )));
                        }
                    }
                    Edit::Touch { file } => {
                        state
                            .get_mut(file)
                            .ok_or_else(|| {
                                Error::InvalidFixture(format!("commit {ci}: no file {file}"))
                            })?
                            .touches += 1;
                    }
                    Edit::Rename { from, to } => {
                        validate_path(to)?;
                        if state.contains_key(to) {
                            return Err(Error::InvalidFixture(format!(
                                "commit {ci}: rename target {to} exists"
                            )));
                        }
                        let f = state.remove(from).ok_or_else(|| {
                            Error::InvalidFixture(format!("commit {ci}: no file {from}"))
                        })?;
                        state.insert(to.clone(), f);
                    }
                }
            }
            out.push(state.clone());
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.replay().map(|_| ())
    }

    pub fn head_time(&self) -> i64 {
        self.commits.last().map_or(0, |c| c.time)
    }

    /// The histories mining must produce, sorted by identity. `hashes[i]` is
    /// the commit hash created for `commits[i]`.
    pub fn expected_histories(&self, hashes: &[String]) -> Result<Vec<VersionHistory>> {
        let snaps = self.replay()?;
        if hashes.len() != snaps.len() {
            return Err(Error::InvalidFixture(
                "hash count does not match commits".into(),
            ));
        }
        let head = snaps.last().expect("replay yields one snapshot per commit");
        let head_time = self.head_time();
        let mut out = Vec::new();
        for (path, file) in head {
            for (key, _) in &file.methods {
                // newest-first run of (commit index, text) until the method is absent
                let mut run: Vec<(usize, &str)> = Vec::new();
                for ci in (0..snaps.len()).rev() {
                    let text = snaps[ci]
                        .values()
                        .find(|f| f.lineage == file.lineage)
                        .and_then(|f| f.methods.iter().find(|(k, _)| k == key))
                        .map(|(_, t)| t.as_str());
                    match text {
                        Some(t) => run.push((ci, t)),
                        None => break,
                    }
                }
                let mut kept: Vec<(usize, &str)> = Vec::new();
                for &(ci, t) in run.iter().rev() {
                    if kept.last().is_none_or(|&(_, prev)| prev != t) {
                        kept.push((ci, t));
                    }
                }
                let mut versions: Vec<MethodVersion> = kept
                    .iter()
                    .enumerate()
                    .map(|(i, &(ci, t))| MethodVersion {
                        commit_hash: hashes[ci].clone(),
                        author_time: self.commits[ci].time,
                        source_text: t.to_string(),
                        changed_lines: if i == 0 {
                            0
                        } else {
                            lcs_changed_lines(kept[i - 1].1, t)
                        },
                    })
                    .collect();
                versions.reverse();
                let oldest = versions.last().map_or(head_time, |v| v.author_time);
                out.push(VersionHistory {
                    identity: MethodIdentity {
                        project: self.project.clone(),
                        file_path: path.clone(),
                        qualified_name: key.0.clone(),
                        signature: key.1.clone(),
                    },
                    versions,
                    lifetime_days: lifetime_days(head_time, oldest),
                });
            }
        }
        out.sort_by(|a, b| a.identity.cmp(&b.identity));
        Ok(out)
    }
}

fn validate_path(path: &str) -> Result<()> {
    let p = Path::new(path);
    let ok = path.ends_with(".java")
        && p.is_relative()
        && p.components()
            .all(|c| matches!(c, std::path::Component::Normal(_)));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidFixture(format!("bad file path {path:?}")))
    }
}

/// `n + m - 2·LCS` over lines, by dynamic programming.
pub fn lcs_changed_lines(old: &str, new: &str) -> u64 {
    let a: Vec<&str> = old.lines().collect();
    let b: Vec<&str> = new.lines().collect();
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            dp[i][j] = if a[i] == b[j] {
                dp[i + 1][j + 1] + 1
            } else {
                dp[i + 1][j].max(dp[i][j + 1])
            };
        }
    }
    (a.len() + b.len() - 2 * dp[0][0]) as u64
}

fn render_file(file: &FileState, touch_values: &[u32]) -> String {
    let mut out = format!("package fixture;\n\npublic class {} {{\n", file.class);
    for (i, value) in touch_values.iter().take(file.touches as usize).enumerate() {
        out.push_str(&format!("    private int revision{i} = {value};\n"));
    }
    for (_, text) in &file.methods {
        out.push('\n');
        out.push_str(text);
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

/// A materialised fixture repository.
#[derive(Debug, Clone)]
pub struct FixtureRepo {
    pub path: PathBuf,
    /// Commit hash per spec commit, oldest first.
    pub commits: Vec<String>,
}

fn git(dir: &Path, args: &[&str], time: Option<i64>) -> Result<String> {
    let mut cmd = Command::new("git");
    cmd.arg("-C")
        .arg(dir)
        .args(["-c", "commit.gpgsign=false", "-c", "core.autocrlf=false"])
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .env("GIT_AUTHOR_NAME", "Fixture Author")
        .env("GIT_AUTHOR_EMAIL", "fixture@example.com")
        .env("GIT_COMMITTER_NAME", "Fixture Author")
        .env("GIT_COMMITTER_EMAIL", "fixture@example.com");
    if let Some(t) = time {
        let date = format!("@{t} +0000");
        cmd.env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_DATE", &date);
    }
    let out = cmd.output()?;
    if !out.status.success() {
        return Err(Error::Io(std::io::Error::other(format!(
            "git {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        ))));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Create a git repository at `out_dir` (which must be absent or empty) realising `spec`.
pub fn synth_fixture(spec: &FixtureSpec, seed: u64, out_dir: &Path) -> Result<FixtureRepo> {
    let snaps = spec.replay()?;
    if out_dir.exists() && fs::read_dir(out_dir)?.next().is_some() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            format!("{} is not empty", out_dir.display()),
        )));
    }
    fs::create_dir_all(out_dir)?;
    git(out_dir, &["init", "-q", "-b", "main"], None)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_touches = snaps
        .iter()
        .flat_map(|s| s.values().map(|f| f.touches))
        .max()
        .unwrap_or(0);
    let touch_values: Vec<u32> = (0..max_touches).map(|_| rng.gen_range(1..10_000)).collect();

    let mut written: BTreeMap<String, String> = BTreeMap::new();
    let mut hashes = Vec::with_capacity(snaps.len());
    for (ci, snap) in snaps.iter().enumerate() {
        for path in written.keys().filter(|p| !snap.contains_key(*p)) {
            fs::remove_file(out_dir.join(path))?;
        }
        written.retain(|p, _| snap.contains_key(p));
        for (path, file) in snap {
            let content = render_file(file, &touch_values);
            if written.get(path) != Some(&content) {
                let full = out_dir.join(path);
                if let Some(parent) = full.parent() {
                    fs::create_dir_all(parent)?;
                }
                fs::write(&full, &content)?;
                written.insert(path.clone(), content);
            }
        }
        let time = spec.commits[ci].time;
        git(out_dir, &["add", "-A"], None)?;
        let message = format!("commit {ci}");
        git(
            out_dir,
            &[
                "commit",
                "-q",
                "--allow-empty",
                "--no-verify",
                "-m",
                &message,
            ],
            Some(time),
        )?;
        hashes.push(
            git(out_dir, &["rev-parse", "HEAD"], None)?
                .trim()
                .to_string(),
        );
    }
    Ok(FixtureRepo {
        path: out_dir.to_path_buf(),
        commits: hashes,
    })
}

/// Random statement for generated method bodies.
fn statement(rng: &mut ChaCha8Rng) -> String {
    const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "total", "count", "limit"];
    let w = WORDS[rng.gen_range(0..WORDS.len())];
    match rng.gen_range(0..4) {
        0 => format!(
            "        int {w}{} = a * {};",
            rng.gen_range(0..50),
            rng.gen_range(1..100)
        ),
        1 => format!("        log(\"{w} {}\");", rng.gen_range(0..1000)),
        2 => format!("        a += {};", rng.gen_range(1..20)),
        _ => format!(
            "        if (a > {}) {{ a = {w}(a); }}",
            rng.gen_range(0..100)
        ),
    }
}

fn method_text(ret: &str, name: &str, param: &str, body: &[String]) -> String {
    let mut t = format!("{ret} {name}({param} a) {{\n");
    for line in body {
        t.push_str(line);
        t.push('\n');
    }
    t.push_str("        return a;\n    }");
    t
}

#[derive(Debug, Clone)]
struct GenMethod {
    file: usize,
    name: String,
    param: String,
    body: Vec<String>,
}

impl GenMethod {
    fn text(&self) -> String {
        method_text(&self.param, &self.name, &self.param, &self.body)
    }
}

impl FixtureSpec {
    /// A random but valid spec exercising no-op commits, unrelated hunks,
    /// deletions, signature changes, overloads and file renames.
    pub fn random(seed: u64) -> FixtureSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_files = rng.gen_range(1..=3);
        let mut paths: Vec<String> = (0..n_files)
            .map(|i| format!("src/main/java/fixture/C{i}.java"))
            .collect();
        let classes: Vec<String> = (0..n_files).map(|i| format!("C{i}")).collect();
        let mut methods: Vec<GenMethod> = Vec::new();
        let mut next_name = 0;
        let mut time = 1_500_000_000 + rng.gen_range(0..1_000_000);
        let mut commits = Vec::new();

        let mut first = Vec::new();
        for f in 0..n_files {
            for _ in 0..rng.gen_range(1..=3) {
                let m = GenMethod {
                    file: f,
                    name: format!("m{next_name}"),
                    param: "int".into(),
                    body: (0..rng.gen_range(1..4))
                        .map(|_| statement(&mut rng))
                        .collect(),
                };
                next_name += 1;
                first.push(Edit::Put {
                    file: paths[f].clone(),
                    class: classes[f].clone(),
                    text: m.text(),
                });
                methods.push(m);
            }
        }
        commits.push(FixtureCommit { time, edits: first });

        for _ in 0..rng.gen_range(1..8) {
            time += rng.gen_range(3_600..40 * 86_400);
            let mut edits = Vec::new();
            if rng.gen_bool(0.1) {
                let f = rng.gen_range(0..n_files);
                let to = format!("src/main/java/moved/r{}/C{f}.java", commits.len());
                edits.push(Edit::Rename {
                    from: paths[f].clone(),
                    to: to.clone(),
                });
                paths[f] = to;
                commits.push(FixtureCommit { time, edits });
                continue;
            }
            for _ in 0..rng.gen_range(1..=3) {
                let roll = rng.gen_range(0..100);
                if methods.is_empty() || roll < 10 {
                    let f = rng.gen_range(0..n_files);
                    // sometimes an overload of an existing name
                    let (name, param) =
                        match methods.iter().find(|m| m.file == f && m.param == "int") {
                            Some(m) if rng.gen_bool(0.3) => (m.name.clone(), "long".to_string()),
                            _ => {
                                next_name += 1;
                                (format!("m{next_name}"), "int".to_string())
                            }
                        };
                    if methods
                        .iter()
                        .any(|m| m.file == f && m.name == name && m.param == param)
                    {
                        continue;
                    }
                    let m = GenMethod {
                        file: f,
                        name,
                        param,
                        body: vec![statement(&mut rng)],
                    };
                    edits.push(Edit::Put {
                        file: paths[f].clone(),
                        class: classes[f].clone(),
                        text: m.text(),
                    });
                    methods.push(m);
                    continue;
                }
                let idx = rng.gen_range(0..methods.len());
                match roll {
                    10..=54 => {
                        let m = &mut methods[idx];
                        if m.body.len() > 1 && rng.gen_bool(0.3) {
                            let k = rng.gen_range(0..m.body.len());
                            m.body.remove(k);
                        } else if rng.gen_bool(0.5) {
                            let k = rng.gen_range(0..=m.body.len());
                            m.body.insert(k, statement(&mut rng));
                        } else {
                            let k = rng.gen_range(0..m.body.len());
                            m.body[k] = statement(&mut rng);
                        }
                    }
                    55..=64 => {} // identical re-put: no body change
                    65..=79 => {
                        edits.push(Edit::Touch {
                            file: paths[methods[idx].file].clone(),
                        });
                        continue;
                    }
                    80..=89 => {
                        let m = methods.remove(idx);
                        edits.push(Edit::Delete {
                            file: paths[m.file].clone(),
                            name: m.name.clone(),
                            signature: format!("({})", m.param),
                        });
                        continue;
                    }
                    _ => {
                        // signature change: the old identity ends, a new one begins
                        let old = methods[idx].clone();
                        let new_param = if old.param == "int" { "short" } else { "byte" };
                        if methods.iter().any(|m| {
                            m.file == old.file && m.name == old.name && m.param == new_param
                        }) {
                            continue;
                        }
                        edits.push(Edit::Delete {
                            file: paths[old.file].clone(),
                            name: old.name.clone(),
                            signature: format!("({})", old.param),
                        });
                        methods[idx].param = new_param.to_string();
                    }
                }
                let m = &methods[idx];
                edits.push(Edit::Put {
                    file: paths[m.file].clone(),
                    class: classes[m.file].clone(),
                    text: m.text(),
                });
            }
            commits.push(FixtureCommit { time, edits });
        }
        FixtureSpec {
            project: format!("fixture{seed}"),
            commits,
        }
    }
}
