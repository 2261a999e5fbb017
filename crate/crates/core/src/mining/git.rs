//! Thin wrapper over the `git` command-line client.

use std::path::{Path, PathBuf};
use std::process::Command;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GitRepo {
    root: PathBuf,
}

/// One commit that touched a followed file, with the file's path at that commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileRevision {
    pub hash: String,
    pub author_time: i64,
    pub path: String,
}

impl GitRepo {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let repo = GitRepo {
            root: root.as_ref().to_path_buf(),
        };
        repo.run(&["rev-parse", "--verify", "HEAD"])?;
        Ok(repo)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn unreadable(&self, message: impl Into<String>) -> Error {
        Error::RepositoryUnreadable {
            path: self.root.clone(),
            message: message.into(),
        }
    }

    fn command(&self) -> Command {
        let mut cmd = Command::new("git");
        cmd.arg("-C")
            .arg(&self.root)
            .args(["-c", "core.quotepath=off", "-c", "log.showSignature=false"])
            .env("GIT_TERMINAL_PROMPT", "0");
        cmd
    }

    pub(crate) fn run_bytes(&self, args: &[&str]) -> Result<Vec<u8>> {
        let out = self
            .command()
            .args(args)
            .output()
            .map_err(|e| self.unreadable(format!("cannot run git: {e}")))?;
        if !out.status.success() {
            return Err(self.unreadable(format!(
                "git {} failed: {}",
                args.join(" "),
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(out.stdout)
    }

    pub(crate) fn run(&self, args: &[&str]) -> Result<String> {
        let bytes = self.run_bytes(args)?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    pub fn head_hash(&self) -> Result<String> {
        Ok(self.run(&["rev-parse", "HEAD"])?.trim().to_string())
    }

    /// Author time of the HEAD commit.
    pub fn head_time(&self) -> Result<i64> {
        let out = self.run(&["log", "-1", "--format=%at", "HEAD"])?;
        out.trim()
            .parse()
            .map_err(|_| self.unreadable(format!("bad HEAD time {out:?}")))
    }

    /// Java files present at HEAD, sorted.
    pub fn java_files_at_head(&self) -> Result<Vec<String>> {
        let out = self.run_bytes(&["ls-tree", "-r", "-z", "--name-only", "HEAD"])?;
        let mut files: Vec<String> = out
            .split(|&b| b == 0)
            .filter(|p| !p.is_empty())
            .map(|p| String::from_utf8_lossy(p).into_owned())
            .filter(|p| p.ends_with(".java"))
            .collect();
        files.sort();
        Ok(files)
    }

    /// File contents at a commit, or `None` if the path does not exist there.
    pub fn show_file(&self, rev: &str, path: &str) -> Result<Option<String>> {
        let spec = format!("{rev}:{path}");
        let out = self
            .command()
            .args(["cat-file", "blob", &spec])
            .output()
            .map_err(|e| self.unreadable(format!("cannot run git: {e}")))?;
        if !out.status.success() {
            return Ok(None);
        }
        Ok(Some(String::from_utf8_lossy(&out.stdout).into_owned()))
    }

    /// Commits touching `path` (as named at HEAD), newest first, following renames.
    pub fn file_history(&self, path: &str) -> Result<Vec<FileRevision>> {
        let out = self.run(&[
            "log",
            "--follow",
            "-M",
            "--format=%x1e%H %at",
            "--name-status",
            "HEAD",
            "--",
            path,
        ])?;
        let mut revs = Vec::new();
        let mut current_path = path.to_string();
        for record in out.split('\x1e').filter(|r| !r.trim().is_empty()) {
            let mut lines = record.lines();
            let header = lines.next().unwrap_or_default();
            let mut parts = header.split_whitespace();
            let (Some(hash), Some(time)) = (parts.next(), parts.next()) else {
                return Err(self.unreadable(format!("bad log header {header:?}")));
            };
            let author_time: i64 = time
                .parse()
                .map_err(|_| self.unreadable(format!("bad author time {time:?}")))?;
            // Name-status tells us the path at this commit and, for renames,
            // the older path to follow from here on.
            let mut older_path = None;
            for line in lines.filter(|l| !l.is_empty()) {
                let fields: Vec<&str> = line.split('\t').collect();
                match fields.as_slice() {
                    [status, from, to] if status.starts_with('R') || status.starts_with('C') => {
                        current_path = (*to).to_string();
                        if status.starts_with('R') {
                            older_path = Some((*from).to_string());
                        }
                    }
                    [_, p] => current_path = (*p).to_string(),
                    _ => {}
                }
            }
            revs.push(FileRevision {
                hash: hash.to_string(),
                author_time,
                path: current_path.clone(),
            });
            if let Some(p) = older_path {
                current_path = p;
            }
        }
        Ok(revs)
    }
}
