//! Hashed TF-IDF encoder producing the five fixed-dimension representations
//! of a method: code, history, caller, callee and days.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::ops::Deref;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::java::{lex, TokenKind};
use crate::mining::Locator;
use crate::model::{ContextBundle, MethodIdentity, VersionHistory};

pub const DEFAULT_DIM: usize = 128;
pub const DEFAULT_BUDGET: usize = 512;
pub const MIN_DIM: usize = 8;

/// Dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

/// Split an identifier into lower-case subtokens at `_`, lower→upper
/// boundaries and the end of an upper-case run (`HTTPServer` → `http`, `server`).
pub fn split_identifier(ident: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in ident.split(['_', '$']).filter(|p| !p.is_empty()) {
        let chars: Vec<char> = part.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() || prev.is_ascii_digit()) && cur.is_uppercase()
                || prev.is_uppercase() && cur.is_uppercase() && next_lower;
            if boundary {
                out.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        out.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
    out
}

/// Java-aware lexical tokens with identifiers split into subtokens; comments dropped.
pub fn tokenize(source: &str) -> Vec<String> {
    let (toks, _) = lex(source);
    let mut out = Vec::with_capacity(toks.len());
    for t in toks {
        let text = t.text(source);
        match t.kind {
            TokenKind::Ident => out.extend(split_identifier(text)),
            _ => out.push(text.to_string()),
        }
    }
    out
}

/// Seeded 64-bit FNV-1a; stable across platforms and releases.
fn bucket_hash(token: &str, seed: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in seed.to_le_bytes().iter().chain(token.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Newest-first concatenation of version token streams, cut at `max_tokens`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBudget {
    pub max_tokens: usize,
}

impl Default for TokenBudget {
    fn default() -> Self {
        TokenBudget {
            max_tokens: DEFAULT_BUDGET,
        }
    }
}

impl TokenBudget {
    pub fn new(max_tokens: usize) -> Result<Self> {
        if max_tokens == 0 {
            return Err(Error::InvalidConfig("token budget must be positive".into()));
        }
        Ok(TokenBudget { max_tokens })
    }
}

/// Token stream used for the history representation.
pub fn history_tokens(history: &VersionHistory, budget: TokenBudget) -> Vec<String> {
    let mut out = Vec::new();
    for v in &history.versions {
        let remaining = budget.max_tokens - out.len();
        if remaining == 0 {
            break;
        }
        out.extend(tokenize(&v.source_text).into_iter().take(remaining));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabModel {
    pub dim: usize,
    pub seed: u64,
    pub doc_count: usize,
    /// `ln(N / max(df, 1))` per bucket.
    pub idf: Vec<f64>,
    pub days_mean: f64,
    pub days_std: f64,
}

impl VocabModel {
    /// Fit bucket idf weights over current-version texts and days statistics.
    pub fn fit(corpus: &[ContextBundle], dim: usize, seed: u64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if dim < MIN_DIM {
            return Err(Error::InvalidConfig(format!(
                "dimension must be at least {MIN_DIM}"
            )));
        }
        let texts: Vec<&str> = corpus.iter().map(|b| b.current_text()).collect();
        let days: Vec<f64> = corpus.iter().map(|b| b.days as f64).collect();
        Ok(Self::fit_texts(&texts, &days, dim, seed))
    }

    pub fn fit_texts(texts: &[&str], days: &[f64], dim: usize, seed: u64) -> Self {
        let mut df = vec![0usize; dim];
        let mut seen = vec![false; dim];
        for text in texts {
            seen.fill(false);
            for tok in tokenize(text) {
                let b = (bucket_hash(&tok, seed) % dim as u64) as usize;
                if !seen[b] {
                    seen[b] = true;
                    df[b] += 1;
                }
            }
        }
        let n = texts.len().max(1) as f64;
        let idf = df.iter().map(|&d| (n / d.max(1) as f64).ln()).collect();
        let (mean, std) = mean_std(days);
        VocabModel {
            dim,
            seed,
            doc_count: texts.len(),
            idf,
            days_mean: mean,
            days_std: std,
        }
    }

    pub fn bucket(&self, token: &str) -> usize {
        (bucket_hash(token, self.seed) % self.dim as u64) as usize
    }

    /// L2-normalised tf·idf over hashed buckets; the zero vector when no weight survives.
    pub fn encode_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vector {
        let mut v = vec![0.0; self.dim];
        for t in tokens {
            v[self.bucket(t.as_ref())] += 1.0;
        }
        for (x, w) in v.iter_mut().zip(&self.idf) {
            *x *= w;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        Vector(v)
    }

    pub fn encode_code(&self, text: &str) -> Vector {
        self.encode_tokens(&tokenize(text))
    }

    pub fn encode_history(&self, history: &VersionHistory, budget: TokenBudget) -> Vector {
        self.encode_tokens(&history_tokens(history, budget))
    }

    /// One-dimensional standardised days; a zero spread maps everything to 0.
    pub fn encode_days(&self, days: i64) -> Vector {
        if self.days_std == 0.0 {
            return Vector(vec![0.0]);
        }
        Vector(vec![(days as f64 - self.days_mean) / self.days_std])
    }

    pub fn encode_bundle(&self, bundle: &ContextBundle, budget: TokenBudget) -> EncodedMethod {
        let context = |text: &Option<String>| {
            text.as_deref()
                .map_or_else(|| Vector::zeros(self.dim), |t| self.encode_code(t))
        };
        EncodedMethod {
            code: self.encode_code(bundle.current_text()),
            history: self.encode_history(&bundle.history, budget),
            caller: context(&bundle.calls.longest_caller),
            callee: context(&bundle.calls.longest_callee),
            days: self.encode_days(bundle.days),
        }
    }
}

/// Population mean and standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// The five representations of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedMethod {
    pub code: Vector,
    pub history: Vector,
    pub caller: Vector,
    pub callee: Vector,
    pub days: Vector,
}

impl EncodedMethod {
    pub fn dim(&self) -> usize {
        self.code.dim()
    }

    fn check(&self, dim: usize) -> Result<()> {
        for v in [&self.code, &self.history, &self.caller, &self.callee] {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.dim(),
                });
            }
        }
        if self.days.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: self.days.dim(),
            });
        }
        Ok(())
    }
}

/// Encode a corpus in order; parallel over methods, deterministic output.
pub fn encode_corpus(
    corpus: &[ContextBundle],
    model: &VocabModel,
    budget: TokenBudget,
) -> Vec<EncodedMethod> {
    corpus
        .par_iter()
        .map(|b| model.encode_bundle(b, budget))
        .collect()
}

/// On-disk line for encoded or externally produced embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub locator: Locator,
    pub code: Vec<f64>,
    #[serde(default)]
    pub history: Option<Vec<f64>>,
    #[serde(default)]
    pub caller: Option<Vec<f64>>,
    #[serde(default)]
    pub callee: Option<Vec<f64>>,
    #[serde(default)]
    pub days: Option<Vec<f64>>,
}

pub fn write_encoded<W: Write>(
    mut out: W,
    items: &[(MethodIdentity, EncodedMethod)],
) -> Result<()> {
    for (id, m) in items {
        let rec = EmbeddingRecord {
            locator: Locator::from(id),
            code: m.code.0.clone(),
            history: Some(m.history.0.clone()),
            caller: Some(m.caller.0.clone()),
            callee: Some(m.callee.0.clone()),
            days: Some(m.days.0.clone()),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read embeddings, resolving each locator against `known` and checking
/// every D-dimensional part against `dim`. Missing parts become zero vectors.
pub fn read_external_embeddings<R: BufRead>(
    input: R,
    known: &[MethodIdentity],
    dim: usize,
) -> Result<HashMap<MethodIdentity, EncodedMethod>> {
    let mut out = HashMap::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EmbeddingRecord = serde_json::from_str(&line).map_err(|e| Error::SchemaError {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = rec
            .locator
            .resolve(known)
            .cloned()
            .ok_or_else(|| Error::UnresolvedMethod {
                line: line_no,
                locator: serde_json::to_string(&rec.locator).unwrap_or_default(),
            })?;
        let part = |v: Option<Vec<f64>>, d: usize| Vector(v.unwrap_or_else(|| vec![0.0; d]));
        let m = EncodedMethod {
            code: Vector(rec.code),
            history: part(rec.history, dim),
            caller: part(rec.caller, dim),
            callee: part(rec.callee, dim),
            days: part(rec.days, 1),
        };
        m.check(dim)?;
        if [&m.code, &m.history, &m.caller, &m.callee, &m.days]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::SchemaError {
                line: line_no,
                message: "non-finite embedding value".into(),
            });
        }
        out.insert(id, m);
    }
    Ok(out)
}

pub fn import_external_embeddings(
    path: &Path,
    known: &[MethodIdentity],
    dim: usize,
) -> Result<HashMap<MethodIdentity, EncodedMethod>> {
    let file = std::fs::File::open(path)?;
    read_external_embeddings(std::io::BufReader::new(file), known, dim)
}
