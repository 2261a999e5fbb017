use serde::{Deserialize, Serialize};

use super::matrix::{ResultMatrix, ResultRow};
use crate::aggregation::{AggregationScheme, ContextSelection};
use crate::error::{Error, Result};
use crate::learning::{EvalReport, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

/// `+7%`, `-7%`, `0%`; empty when there is nothing to compare against.
pub fn format_pct(pct: Option<i64>) -> String {
    match pct {
        Some(p) if p > 0 => format!("+{p}%"),
        Some(p) => format!("{p}%"),
        None => String::new(),
    }
}

fn task_title(task: Task) -> &'static str {
    match task {
        Task::Clone => "Code Clone Detection",
        Task::Classify => "Code Classification",
    }
}

fn metric_columns(task: Task) -> [&'static str; 4] {
    match task {
        Task::Clone => ["P", "R", "F1", "%F1"],
        Task::Classify => ["Acc", "P", "R", "%Acc"],
    }
}

fn metric_cells(task: Task, row: &ResultRow) -> [String; 4] {
    let Some(r) = &row.report else {
        return ["-".into(), "-".into(), "-".into(), "failed".into()];
    };
    let f = |v: f64| format!("{v:.3}");
    let pct = format_pct(r.pct_improvement);
    match task {
        Task::Clone => [f(r.precision), f(r.recall), f(r.f1), pct],
        Task::Classify => [f(r.accuracy), f(r.precision), f(r.recall), pct],
    }
}

fn render_text(matrix: &ResultMatrix) -> String {
    let mut out = String::new();
    for task in Task::ALL {
        let rows: Vec<&ResultRow> = matrix.rows_for(task).collect();
        if rows.is_empty() {
            continue;
        }
        let mut lines: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["Context".to_string(), "Aggregation".to_string()];
        header.extend(metric_columns(task).iter().map(|s| s.to_string()));
        lines.push(header);
        for row in &rows {
            let mut cells = vec![
                row.contexts.label(),
                row.aggregation.map_or("-", |a| a.label()).to_string(),
            ];
            cells.extend(metric_cells(task, row));
            lines.push(cells);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| {
                lines
                    .iter()
                    .map(|l| l[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(task_title(task));
        out.push('\n');
        for (i, line) in lines.iter().enumerate() {
            let mut text = String::new();
            for (c, cell) in line.iter().enumerate() {
                if c > 0 {
                    text.push_str("  ");
                }
                let pad = widths[c] - cell.chars().count();
                if c < 2 {
                    text.push_str(cell);
                    text.extend(std::iter::repeat_n(' ', pad));
                } else {
                    text.extend(std::iter::repeat_n(' ', pad));
                    text.push_str(cell);
                }
            }
            out.push_str(text.trim_end());
            out.push('\n');
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        for row in rows.iter().filter(|r| r.error.is_some()) {
            out.push_str(&format!(
                "failed {} / {}: {}\n",
                row.contexts.name(),
                row.aggregation.map_or("baseline", |a| a.name()),
                row.error.as_deref().unwrap_or_default()
            ));
        }
    }
    out
}

/// Flat CSV line. Floats are written in shortest round-trip form.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    task: Task,
    contexts: ContextSelection,
    aggregation: Option<AggregationScheme>,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
    accuracy: Option<f64>,
    pct_improvement: Option<i64>,
    error: Option<String>,
    split_fingerprint: String,
}

fn render_csv(matrix: &ResultMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &matrix.rows {
        let r = row.report;
        w.serialize(CsvRow {
            task: row.task,
            contexts: row.contexts,
            aggregation: row.aggregation,
            precision: r.map(|r| r.precision),
            recall: r.map(|r| r.recall),
            f1: r.map(|r| r.f1),
            accuracy: r.map(|r| r.accuracy),
            pct_improvement: r.and_then(|r| r.pct_improvement),
            error: row.error.clone(),
            split_fingerprint: row.split_fingerprint.clone(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Render the matrix. Text tables show one block per task with 3-decimal
/// metrics; CSV keeps full precision so [`parse_csv`] restores the matrix.
pub fn render_table(matrix: &ResultMatrix, format: TableFormat) -> Result<String> {
    let mut sorted = matrix.clone();
    sorted.sort();
    match format {
        TableFormat::Text => Ok(render_text(&sorted)),
        TableFormat::Csv => render_csv(&sorted),
    }
}

pub fn parse_csv(text: &str) -> Result<ResultMatrix> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(text.as_bytes()).deserialize() {
        let r: CsvRow = rec?;
        let report = match (r.precision, r.recall, r.f1, r.accuracy) {
            (Some(precision), Some(recall), Some(f1), Some(accuracy)) => Some(EvalReport {
                precision,
                recall,
                f1,
                accuracy,
                pct_improvement: r.pct_improvement,
            }),
            _ => None,
        };
        rows.push(ResultRow {
            task: r.task,
            contexts: r.contexts,
            aggregation: r.aggregation,
            report,
            error: r.error,
            split_fingerprint: r.split_fingerprint,
        });
    }
    Ok(ResultMatrix { rows })
}
