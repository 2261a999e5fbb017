//! Per-project corpus statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ContextBundle;

/// Integer totals for one group of methods; averages derive from these so
/// that summing rows reproduces the global row exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRow {
    pub project: String,
    pub method_count: u64,
    pub version_count: u64,
    /// Versions that have an older kept version to diff against.
    pub delta_count: u64,
    pub changed_line_sum: u64,
    pub min_days: i64,
    pub max_days: i64,
    pub days_sum: i64,
}

impl StatsRow {
    fn push(&mut self, b: &ContextBundle) {
        let n = b.history.versions.len() as u64;
        if self.method_count == 0 {
            self.min_days = b.days;
            self.max_days = b.days;
        } else {
            self.min_days = self.min_days.min(b.days);
            self.max_days = self.max_days.max(b.days);
        }
        self.method_count += 1;
        self.version_count += n;
        self.delta_count += n - 1;
        self.changed_line_sum += b
            .history
            .versions
            .iter()
            .map(|v| v.changed_lines)
            .sum::<u64>();
        self.days_sum += b.days;
    }

    pub fn avg_versions_per_method(&self) -> f64 {
        self.version_count as f64 / self.method_count as f64
    }

    /// `None` when no method has more than one version.
    pub fn avg_changed_lines_per_version(&self) -> Option<f64> {
        (self.delta_count > 0).then(|| self.changed_line_sum as f64 / self.delta_count as f64)
    }

    pub fn avg_days(&self) -> f64 {
        self.days_sum as f64 / self.method_count as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub rows: Vec<StatsRow>,
    pub global: StatsRow,
}

pub fn corpus_stats(corpus: &[ContextBundle]) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rows: BTreeMap<&str, StatsRow> = BTreeMap::new();
    let mut global = StatsRow {
        project: "all".into(),
        ..StatsRow::default()
    };
    for b in corpus {
        let project = b.identity().project.as_str();
        rows.entry(project)
            .or_insert_with(|| StatsRow {
                project: project.to_string(),
                ..StatsRow::default()
            })
            .push(b);
        global.push(b);
    }
    Ok(CorpusStats {
        rows: rows.into_values().collect(),
        global,
    })
}

fn group_thousands(n: i64) -> String {
    let digits = n.unsigned_abs().to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    if n < 0 {
        out.insert(0, '-');
    }
    out
}

impl CorpusStats {
    /// Plain-text table: methods, avg versions/method, avg changed lines/version, min|max|avg days.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>9} {:>12} {:>14}  Min|Max|Avg days",
            "Project", "Methods", "Versions/m", "Changed/ver"
        );
        for row in self.rows.iter().chain(std::iter::once(&self.global)) {
            let changed = row
                .avg_changed_lines_per_version()
                .map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(
                out,
                "{:<24} {:>9} {:>12.2} {:>14}  {} | {} | {}",
                row.project,
                row.method_count,
                row.avg_versions_per_method(),
                changed,
                group_thousands(row.min_days),
                group_thousands(row.max_days),
                group_thousands(row.avg_days().round() as i64),
            );
        }
        out
    }
}
