//! Combining a method's representations into one feature vector, for single
//! methods (classification) and method pairs (clone detection).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoder::{EncodedMethod, Vector};
use crate::error::{Error, Result};

/// Which contexts accompany the code vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ContextSelection {
    pub use_history: bool,
    pub use_call_hierarchy: bool,
    pub use_days: bool,
}

impl ContextSelection {
    pub const NONE: Self = Self::new(false, false, false);
    pub const VH: Self = Self::new(true, false, false);
    pub const CH: Self = Self::new(false, true, false);
    pub const VH_CH: Self = Self::new(true, true, false);
    pub const VH_DAYS: Self = Self::new(true, false, true);
    pub const VH_CH_DAYS: Self = Self::new(true, true, true);

    /// The five context rows, single contexts first.
    pub const GRID: [Self; 5] = [
        Self::VH,
        Self::CH,
        Self::VH_CH,
        Self::VH_DAYS,
        Self::VH_CH_DAYS,
    ];

    pub const fn new(use_history: bool, use_call_hierarchy: bool, use_days: bool) -> Self {
        Self {
            use_history,
            use_call_hierarchy,
            use_days,
        }
    }

    pub fn is_baseline(&self) -> bool {
        *self == Self::NONE
    }

    /// Number of selected context kinds: 0 for the baseline, 1 for single, 2+ for multiple.
    pub fn arity(&self) -> usize {
        usize::from(self.use_history)
            + usize::from(self.use_call_hierarchy)
            + usize::from(self.use_days)
    }

    pub fn name(&self) -> String {
        let mut parts = Vec::new();
        if self.use_history {
            parts.push("vh");
        }
        if self.use_call_hierarchy {
            parts.push("ch");
        }
        if self.use_days {
            parts.push("days");
        }
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join("+")
        }
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.use_history {
            parts.push("Version History");
        }
        if self.use_call_hierarchy {
            parts.push("Call Hierarchy");
        }
        if self.use_days {
            parts.push("No. of Days");
        }
        if parts.is_empty() {
            "Without Context".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for ContextSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ContextSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(Self::NONE);
        }
        let mut sel = Self::NONE;
        for part in s.split('+') {
            match part {
                "vh" => sel.use_history = true,
                "ch" => sel.use_call_hierarchy = true,
                "days" => sel.use_days = true,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown context {other:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(sel)
    }
}

impl Serialize for ContextSelection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for ContextSelection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AggregationScheme {
    #[serde(rename = "concat")]
    Concatenation,
    #[serde(rename = "maxpool")]
    MaxPooling,
    #[serde(rename = "diff_concat")]
    DiffThenConcat,
}

impl AggregationScheme {
    pub const ALL: [Self; 3] = [Self::Concatenation, Self::MaxPooling, Self::DiffThenConcat];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Concatenation => "concat",
            Self::MaxPooling => "maxpool",
            Self::DiffThenConcat => "diff_concat",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Concatenation => "Concatenation",
            Self::MaxPooling => "Max-pooling",
            Self::DiffThenConcat => "Diff & Concat",
        }
    }

    pub fn valid_for_single(&self) -> bool {
        *self != Self::DiffThenConcat
    }
}

impl fmt::Display for AggregationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown aggregation {s:?}")))
    }
}

fn check_same(a: &EncodedMethod, b: &EncodedMethod) -> Result<()> {
    let pairs = [
        (&a.code, &b.code),
        (&a.history, &b.history),
        (&a.caller, &b.caller),
        (&a.callee, &b.callee),
        (&a.days, &b.days),
    ];
    for (x, y) in pairs {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                actual: y.dim(),
            });
        }
    }
    Ok(())
}

/// `[code, history?, caller?, callee?, days?]`.
pub fn select_vectors(m: &EncodedMethod, sel: ContextSelection) -> Vec<&Vector> {
    let mut out = vec![&m.code];
    if sel.use_history {
        out.push(&m.history);
    }
    if sel.use_call_hierarchy {
        out.push(&m.caller);
        out.push(&m.callee);
    }
    if sel.use_days {
        out.push(&m.days);
    }
    out
}

fn concat(parts: &[&Vector]) -> Vector {
    Vector(parts.iter().flat_map(|v| v.iter().copied()).collect())
}

pub fn concat_single(m: &EncodedMethod, sel: ContextSelection) -> Vector {
    concat(&select_vectors(m, sel))
}

/// Elementwise maximum of equal-dimension vectors.
pub fn maxpool(vectors: &[&Vector]) -> Result<Vector> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidConfig("max-pooling needs at least one vector".into()))?;
    let mut out = first.0.clone();
    for v in &vectors[1..] {
        if v.dim() != out.len() {
            return Err(Error::DimensionMismatch {
                expected: out.len(),
                actual: v.dim(),
            });
        }
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o = o.max(*x);
        }
    }
    Ok(Vector(out))
}

/// D-dimensional selected vectors of one method (days excluded).
fn poolable(m: &EncodedMethod, sel: ContextSelection) -> Vec<&Vector> {
    let mut v = select_vectors(m, sel);
    if sel.use_days {
        v.pop();
    }
    v
}

/// Max-pool of the D-dimensional vectors with days appended when selected.
pub fn single_maxpool(m: &EncodedMethod, sel: ContextSelection) -> Result<Vector> {
    let mut out = maxpool(&poolable(m, sel))?;
    if sel.use_days {
        out.0.extend(m.days.iter());
    }
    Ok(out)
}

pub fn pair_concat_absdiff(
    a: &EncodedMethod,
    b: &EncodedMethod,
    sel: ContextSelection,
) -> Result<Vector> {
    check_same(a, b)?;
    let x = concat_single(a, sel);
    let y = concat_single(b, sel);
    Ok(Vector(
        x.iter().zip(y.iter()).map(|(p, q)| (p - q).abs()).collect(),
    ))
}

pub fn pair_maxpool(a: &EncodedMethod, b: &EncodedMethod, sel: ContextSelection) -> Result<Vector> {
    check_same(a, b)?;
    let mut pool = poolable(a, sel);
    pool.extend(poolable(b, sel));
    let mut out = maxpool(&pool)?;
    if sel.use_days {
        out.0.extend(maxpool(&[&a.days, &b.days])?.iter());
    }
    Ok(out)
}

/// `|code_a − code_b|` followed by a's then b's selected context vectors.
pub fn pair_diff_then_concat(
    a: &EncodedMethod,
    b: &EncodedMethod,
    sel: ContextSelection,
) -> Result<Vector> {
    check_same(a, b)?;
    let mut out: Vec<f64> = a
        .code
        .iter()
        .zip(b.code.iter())
        .map(|(p, q)| (p - q).abs())
        .collect();
    for m in [a, b] {
        for v in &select_vectors(m, sel)[1..] {
            out.extend(v.iter());
        }
    }
    Ok(Vector(out))
}

/// Feature vector for a single method under `scheme`.
pub fn aggregate_single(
    m: &EncodedMethod,
    sel: ContextSelection,
    scheme: AggregationScheme,
) -> Result<Vector> {
    match scheme {
        AggregationScheme::Concatenation => Ok(concat_single(m, sel)),
        AggregationScheme::MaxPooling => single_maxpool(m, sel),
        AggregationScheme::DiffThenConcat => Err(Error::InvalidConfig(
            "diff_concat needs a method pair".into(),
        )),
    }
}

/// Feature vector for a method pair under `scheme`. Concatenation means the
/// absolute difference of the two concatenations.
pub fn aggregate_pair(
    a: &EncodedMethod,
    b: &EncodedMethod,
    sel: ContextSelection,
    scheme: AggregationScheme,
) -> Result<Vector> {
    match scheme {
        AggregationScheme::Concatenation => pair_concat_absdiff(a, b, sel),
        AggregationScheme::MaxPooling => pair_maxpool(a, b, sel),
        AggregationScheme::DiffThenConcat => pair_diff_then_concat(a, b, sel),
    }
}

/// Output dimension as a function of scheme, selection and D.
pub fn output_dim(
    scheme: AggregationScheme,
    sel: ContextSelection,
    dim: usize,
    pair: bool,
) -> usize {
    let days = usize::from(sel.use_days);
    let contexts = dim * (usize::from(sel.use_history) + 2 * usize::from(sel.use_call_hierarchy));
    match scheme {
        AggregationScheme::Concatenation => dim + contexts + days,
        AggregationScheme::MaxPooling => dim + days,
        AggregationScheme::DiffThenConcat if pair => dim + 2 * (contexts + days),
        AggregationScheme::DiffThenConcat => 0,
    }
}
