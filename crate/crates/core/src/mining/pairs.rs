//! Labeled clone pairs built from weighted human judgments.

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MethodIdentity;

/// Judgment counts per confidence level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Judgments {
    #[serde(default)]
    pub high_yes: f64,
    #[serde(default)]
    pub med_yes: f64,
    #[serde(default)]
    pub low_yes: f64,
    #[serde(default)]
    pub high_no: f64,
    #[serde(default)]
    pub med_no: f64,
    #[serde(default)]
    pub low_no: f64,
}

impl Judgments {
    pub fn positive(n: f64) -> Self {
        Self {
            high_yes: n,
            ..Self::default()
        }
    }

    pub fn negative(n: f64) -> Self {
        Self {
            high_no: n,
            ..Self::default()
        }
    }

    /// Total judgments per level: (high, medium, low).
    pub fn confidence_weights(&self) -> (f64, f64, f64) {
        (
            self.high_yes + self.high_no,
            self.med_yes + self.med_no,
            self.low_yes + self.low_no,
        )
    }

    fn counts(&self) -> [f64; 6] {
        [
            self.high_yes,
            self.med_yes,
            self.low_yes,
            self.high_no,
            self.med_no,
            self.low_no,
        ]
    }
}

/// Turns judgment counts into a 0/1 label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelRule {
    pub high: f64,
    pub medium: f64,
    pub low: f64,
    pub threshold: f64,
}

impl Default for LabelRule {
    fn default() -> Self {
        Self {
            high: 1.0,
            medium: 0.66,
            low: 0.33,
            threshold: 0.5,
        }
    }
}

impl LabelRule {
    /// Weighted share of positive judgments, `None` when there is no weight at all.
    pub fn score(&self, j: &Judgments) -> Option<f64> {
        let pos = self.high * j.high_yes + self.medium * j.med_yes + self.low * j.low_yes;
        let neg = self.high * j.high_no + self.medium * j.med_no + self.low * j.low_no;
        let total = pos + neg;
        (total > 0.0).then(|| pos / total)
    }

    pub fn label(&self, j: &Judgments) -> Option<u8> {
        self.score(j).map(|s| u8::from(s > self.threshold))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub a: MethodIdentity,
    pub b: MethodIdentity,
    pub label: u8,
    pub judgments: Judgments,
}

/// Partial method reference; `file` and `signature` may be omitted as long as
/// the remaining fields select exactly one mined method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locator {
    pub project: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
}

impl From<&MethodIdentity> for Locator {
    fn from(id: &MethodIdentity) -> Self {
        Locator {
            project: id.project.clone(),
            file: Some(id.file_path.clone()),
            name: id.qualified_name.clone(),
            signature: Some(id.signature.clone()),
        }
    }
}

impl Locator {
    pub fn matches(&self, id: &MethodIdentity) -> bool {
        self.project == id.project
            && self.name == id.qualified_name
            && self.file.as_ref().is_none_or(|f| *f == id.file_path)
            && self.signature.as_ref().is_none_or(|s| *s == id.signature)
    }

    /// The unique identity this locator selects.
    pub fn resolve<'a>(
        &self,
        known: impl IntoIterator<Item = &'a MethodIdentity>,
    ) -> Option<&'a MethodIdentity> {
        let mut hits = known.into_iter().filter(|id| self.matches(id));
        let first = hits.next()?;
        hits.next().is_none().then_some(first)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub a: Locator,
    pub b: Locator,
    #[serde(flatten)]
    pub judgments: Judgments,
}

pub fn read_labeled_pairs<R: BufRead>(
    input: R,
    known: &[MethodIdentity],
    rule: &LabelRule,
) -> Result<Vec<LabeledPair>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::SchemaError {
            line: line_no,
            message,
        };
        let rec: PairRecord = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        if rec
            .judgments
            .counts()
            .iter()
            .any(|c| !c.is_finite() || *c < 0.0)
        {
            return Err(schema("judgment counts must be non-negative".into()));
        }
        let label = rule
            .label(&rec.judgments)
            .ok_or_else(|| schema("pair has no judgments".into()))?;
        let resolve = |loc: &Locator| {
            loc.resolve(known)
                .cloned()
                .ok_or_else(|| Error::UnresolvedMethod {
                    line: line_no,
                    locator: serde_json::to_string(loc).unwrap_or_default(),
                })
        };
        let a = resolve(&rec.a)?;
        let b = resolve(&rec.b)?;
        if a == b {
            return Err(schema("pair refers to the same method twice".into()));
        }
        out.push(LabeledPair {
            a,
            b,
            label,
            judgments: rec.judgments,
        });
    }
    Ok(out)
}

pub fn load_labeled_pairs(
    path: &Path,
    known: &[MethodIdentity],
    rule: &LabelRule,
) -> Result<Vec<LabeledPair>> {
    let file = std::fs::File::open(path)?;
    read_labeled_pairs(std::io::BufReader::new(file), known, rule)
}

pub fn write_pairs<W: std::io::Write>(mut out: W, pairs: &[LabeledPair]) -> Result<()> {
    for p in pairs {
        let rec = PairRecord {
            a: Locator::from(&p.a),
            b: Locator::from(&p.b),
            judgments: p.judgments,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Distinct identities across a pair list, in first-seen order.
pub fn pair_members(pairs: &[LabeledPair]) -> Vec<MethodIdentity> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in pairs {
        for id in [&p.a, &p.b] {
            if seen.insert(id.clone()) {
                out.push(id.clone());
            }
        }
    }
    out
}
