//! Synthetic clone corpus whose histories carry a controllable amount of signal.
//!
//! Every pair has members in two different classes under the same method
//! name. Positive pairs draw their current bodies from one shared word pool;
//! negatives draw from two unrelated pools. With probability
//! `informativeness` a positive pair also starts from one identical ancestral
//! body, while all other ancestors are independent random bodies.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{clone_dataset, EncodedCorpus, ResultMatrix, ResultRow};
use crate::aggregation::{AggregationScheme, ContextSelection};
use crate::error::{Error, Result};
use crate::fixture::{synth_fixture, Edit, FixtureCommit, FixtureSpec};
use crate::java::is_keyword;
use crate::learning::{evaluate, split_dataset, train, Task, TrainConfig};
use crate::mining::{mine_repository, GitRepo, Judgments, LabeledPair};
use crate::model::MethodIdentity;

const PROJECT: &str = "designed";
const PAIRS_PER_FILE: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignedConfig {
    pub seed: u64,
    /// Share of positive pairs whose histories start from one common body.
    pub informativeness: f64,
    pub pairs: usize,
    /// Statements per generated body.
    pub statements: usize,
    /// Chance that a current statement uses the pair's pool instead of noise.
    pub keep_rate: f64,
    /// Distinct words in each pair's pool.
    pub pool_size: usize,
    pub vocabulary: usize,
    pub dim: usize,
    pub budget: usize,
    pub runs: usize,
    pub train: TrainConfig,
}

impl DesignedConfig {
    pub fn new(seed: u64, informativeness: f64) -> Self {
        DesignedConfig {
            seed,
            informativeness,
            pairs: 2000,
            statements: 8,
            keep_rate: 0.5,
            pool_size: 8,
            vocabulary: 800,
            dim: 256,
            budget: 512,
            runs: 5,
            train: TrainConfig {
                learning_rate: 4.0,
                epochs: 100,
                batch_size: 32,
                seed,
                swap_augment: false,
            },
        }
    }
}

/// Per-run F1 scores and the matrix built from the median runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignedOutcome {
    pub config: DesignedConfig,
    pub baseline_f1: Vec<f64>,
    pub history_f1: Vec<f64>,
    pub baseline_median: f64,
    pub history_median: f64,
    pub matrix: ResultMatrix,
}

impl DesignedOutcome {
    pub fn delta(&self) -> f64 {
        self.history_median - self.baseline_median
    }
}

/// Lower-case pseudo-words that the tokenizer keeps whole.
fn vocabulary(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    const ONSETS: &[&str] = &[
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
    ];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
    let mut words = BTreeSet::new();
    while words.len() < n {
        let w: String = (0..3)
            .map(|_| {
                format!(
                    "{}{}",
                    ONSETS[rng.gen_range(0..ONSETS.len())],
                    VOWELS[rng.gen_range(0..VOWELS.len())]
                )
            })
            .collect();
        if !is_keyword(&w) {
            words.insert(w);
        }
    }
    let mut out: Vec<String> = words.into_iter().collect();
    out.shuffle(rng);
    out
}

fn body_text(name: &str, words: &[&str]) -> String {
    let mut t = format!("int {name}(int a) {{\n");
    for w in words {
        t.push_str(&format!("        a = a + {w}(a);\n"));
    }
    t.push_str("        return a;\n    }");
    t
}

struct PairPlan {
    label: u8,
    ancestors: [Vec<usize>; 2],
    currents: [Vec<usize>; 2],
}

fn pick(rng: &mut ChaCha8Rng, from: &[usize], k: usize) -> Vec<usize> {
    (0..k).map(|_| from[rng.gen_range(0..from.len())]).collect()
}

fn plan_pairs(cfg: &DesignedConfig, rng: &mut ChaCha8Rng) -> Vec<PairPlan> {
    let all: Vec<usize> = (0..cfg.vocabulary).collect();
    let pool = |rng: &mut ChaCha8Rng| -> Vec<usize> {
        all.choose_multiple(rng, cfg.pool_size).copied().collect()
    };
    let current = |rng: &mut ChaCha8Rng, own: &[usize]| -> Vec<usize> {
        (0..cfg.statements)
            .map(|_| {
                if rng.gen_bool(cfg.keep_rate) {
                    own[rng.gen_range(0..own.len())]
                } else {
                    all[rng.gen_range(0..all.len())]
                }
            })
            .collect()
    };
    (0..cfg.pairs)
        .map(|i| {
            let label = u8::from(i % 2 == 0);
            let pool_a = pool(rng);
            let pool_b = if label == 1 {
                pool_a.clone()
            } else {
                pool(rng)
            };
            let shared = label == 1 && rng.gen_bool(cfg.informativeness.clamp(0.0, 1.0));
            let anc_a = pick(rng, &all, cfg.statements);
            let anc_b = if shared {
                anc_a.clone()
            } else {
                pick(rng, &all, cfg.statements)
            };
            PairPlan {
                label,
                ancestors: [anc_a, anc_b],
                currents: [current(rng, &pool_a), current(rng, &pool_b)],
            }
        })
        .collect()
}

/// Two method identities and their clone label.
pub type DesignedPair = (MethodIdentity, MethodIdentity, u8);

/// The fixture realising the designed corpus, plus each pair as
/// `(left identity, right identity, label)`.
pub fn designed_spec(cfg: &DesignedConfig) -> Result<(FixtureSpec, Vec<DesignedPair>)> {
    if cfg.pairs < 20
        || cfg.statements == 0
        || cfg.pool_size == 0
        || cfg.vocabulary < cfg.pool_size * 4
    {
        return Err(Error::InvalidConfig("designed corpus is too small".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let words = vocabulary(cfg.vocabulary, &mut rng);
    let plans = plan_pairs(cfg, &mut rng);
    let text = |name: &str, ids: &[usize]| {
        let ws: Vec<&str> = ids.iter().map(|&i| words[i].as_str()).collect();
        body_text(name, &ws)
    };
    let mut first = Vec::new();
    let mut second = Vec::new();
    let mut pairs = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        let group = i / PAIRS_PER_FILE;
        let name = format!("m{i}");
        let mut ids = Vec::new();
        for (side, prefix) in ["L", "R"].iter().enumerate() {
            let class = format!("{prefix}{group}");
            let file = format!("src/{class}.java");
            first.push(Edit::Put {
                file: file.clone(),
                class: class.clone(),
                text: text(&name, &plan.ancestors[side]),
            });
            second.push(Edit::Put {
                file: file.clone(),
                class: class.clone(),
                text: text(&name, &plan.currents[side]),
            });
            ids.push(MethodIdentity {
                project: PROJECT.into(),
                file_path: file,
                qualified_name: format!("{class}.{name}"),
                signature: "(int)".into(),
            });
        }
        let b = ids.pop().expect("two sides");
        let a = ids.pop().expect("two sides");
        pairs.push((a, b, plan.label));
    }
    let t0 = 1_600_000_000;
    let spec = FixtureSpec {
        project: PROJECT.into(),
        commits: vec![
            FixtureCommit {
                time: t0,
                edits: first,
            },
            FixtureCommit {
                time: t0 + 90 * 86_400,
                edits: second,
            },
        ],
    };
    Ok((spec, pairs))
}

fn median(values: &[f64]) -> (f64, usize) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let m = idx[idx.len() / 2];
    (values[m], m)
}

/// Build the corpus in a temporary repository, mine and encode it, then
/// compare the code-only baseline with version-history concatenation.
pub fn run_designed(cfg: &DesignedConfig) -> Result<DesignedOutcome> {
    if cfg.runs == 0 {
        return Err(Error::InvalidConfig("runs must be positive".into()));
    }
    let (spec, pair_ids) = designed_spec(cfg)?;
    let dir = tempfile::tempdir()?;
    let repo_dir = dir.path().join("repo");
    synth_fixture(&spec, cfg.seed, &repo_dir)?;
    let corpus = mine_repository(&GitRepo::open(&repo_dir)?, PROJECT)?;
    let enc = EncodedCorpus::encode(&corpus, cfg.dim, cfg.budget, cfg.seed)?;
    let pairs: Vec<LabeledPair> = pair_ids
        .into_iter()
        .map(|(a, b, label)| LabeledPair {
            a,
            b,
            label,
            judgments: if label == 1 {
                Judgments::positive(1.0)
            } else {
                Judgments::negative(1.0)
            },
        })
        .collect();

    let agg = AggregationScheme::Concatenation;
    let base_data = clone_dataset(&enc, &pairs, ContextSelection::NONE, agg)?;
    let hist_data = clone_dataset(&enc, &pairs, ContextSelection::VH, agg)?;
    let mut base_rows = Vec::new();
    let mut hist_rows = Vec::new();
    for r in 0..cfg.runs as u64 {
        let seed = cfg.train.seed.wrapping_add(r);
        let split = split_dataset(pairs.len(), seed)?;
        let tc = TrainConfig {
            seed,
            ..cfg.train.clone()
        };
        for (data, sel, out) in [
            (&base_data, ContextSelection::NONE, &mut base_rows),
            (&hist_data, ContextSelection::VH, &mut hist_rows),
        ] {
            let o = train(data, &split, &tc, Task::Clone)?;
            let rep = evaluate(&o.head, data, &split.test, Task::Clone, None)?;
            out.push(ResultRow {
                task: Task::Clone,
                contexts: sel,
                aggregation: (!sel.is_baseline()).then_some(agg),
                report: Some(rep),
                error: None,
                split_fingerprint: split.fingerprint(),
            });
        }
    }
    let f1s = |rows: &[ResultRow]| -> Vec<f64> {
        rows.iter()
            .map(|r| r.report.map_or(0.0, |x| x.f1))
            .collect()
    };
    let baseline_f1 = f1s(&base_rows);
    let history_f1 = f1s(&hist_rows);
    let (baseline_median, bi) = median(&baseline_f1);
    let (history_median, hi) = median(&history_f1);
    let mut matrix = ResultMatrix {
        rows: vec![base_rows[bi].clone(), hist_rows[hi].clone()],
    };
    matrix.fill_improvements();
    Ok(DesignedOutcome {
        config: cfg.clone(),
        baseline_f1,
        history_f1,
        baseline_median,
        history_median,
        matrix,
    })
}

/// The history-informative designed experiment at `seed`.
pub fn run_designed_experiment(seed: u64) -> Result<DesignedOutcome> {
    run_designed(&DesignedConfig::new(seed, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_is_valid_and_balanced() {
        let cfg = DesignedConfig {
            pairs: 40,
            ..DesignedConfig::new(3, 1.0)
        };
        let (spec, pairs) = designed_spec(&cfg).unwrap();
        spec.validate().unwrap();
        assert_eq!(pairs.len(), 40);
        assert_eq!(pairs.iter().filter(|p| p.2 == 1).count(), 20);
        assert!(pairs
            .iter()
            .all(|(a, b, _)| a.simple_name() == b.simple_name() && a.file_path != b.file_path));
        assert_eq!(designed_spec(&cfg).unwrap().0, spec);
    }

    #[test]
    fn pseudo_words_stay_whole() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for w in vocabulary(50, &mut rng) {
            assert_eq!(crate::encoder::tokenize(&w), vec![w.clone()]);
        }
    }

    #[test]
    fn median_picks_middle_run() {
        assert_eq!(median(&[0.3, 0.9, 0.5, 0.1, 0.7]), (0.5, 2));
    }
}
