use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{aggregate_pair, aggregate_single, AggregationScheme, ContextSelection};
use crate::encoder::{
    encode_corpus, import_external_embeddings, read_external_embeddings, EmbeddingRecord,
    EncodedMethod, TokenBudget, VocabModel, DEFAULT_BUDGET, DEFAULT_DIM,
};
use crate::error::{Error, Result};
use crate::learning::{
    evaluate, pct_improvement, split_by_groups, split_dataset, train, Dataset, DatasetSplit,
    EvalReport, ModelFile, Task, TrainConfig,
};
use crate::mining::{load_labeled_pairs, LabelRule, LabeledPair, Locator};
use crate::model::{load_corpus, ContextBundle, MethodIdentity};

/// Environment variable that overrides `out_dir` when a config is loaded.
pub const OUT_DIR_ENV: &str = "HISTCTX_OUT";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitBy {
    /// Pairs are shuffled and split directly.
    #[default]
    Pair,
    /// Methods are split and a pair is kept only when both members fall in the same part.
    Method,
}

impl std::str::FromStr for SplitBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair" => Ok(SplitBy::Pair),
            "method" => Ok(SplitBy::Method),
            other => Err(Error::InvalidConfig(format!(
                "unknown split unit `{other}`"
            ))),
        }
    }
}

fn default_dim() -> usize {
    DEFAULT_DIM
}
fn default_budget() -> usize {
    DEFAULT_BUDGET
}
fn default_seed() -> u64 {
    7
}
fn default_tasks() -> Vec<Task> {
    Task::ALL.to_vec()
}
fn default_contexts() -> Vec<ContextSelection> {
    ContextSelection::GRID.to_vec()
}
fn default_aggregations() -> Vec<AggregationScheme> {
    AggregationScheme::ALL.to_vec()
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    /// Labeled pairs; required for the clone task.
    #[serde(default)]
    pub pairs: Option<PathBuf>,
    /// Precomputed embeddings replacing the hashed encoder.
    #[serde(default)]
    pub external: Option<PathBuf>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Encoder hash seed.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default = "default_contexts")]
    pub contexts: Vec<ContextSelection>,
    #[serde(default = "default_aggregations")]
    pub aggregations: Vec<AggregationScheme>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub split_by: SplitBy,
    #[serde(default)]
    pub label_rule: LabelRule,
}

impl ExperimentConfig {
    pub fn new(corpus: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            corpus: corpus.into(),
            pairs: None,
            external: None,
            dim: DEFAULT_DIM,
            budget: DEFAULT_BUDGET,
            seed: default_seed(),
            tasks: default_tasks(),
            contexts: default_contexts(),
            aggregations: default_aggregations(),
            train: TrainConfig::default(),
            out_dir: out_dir.into(),
            split_by: SplitBy::Pair,
            label_rule: LabelRule::default(),
        }
    }

    /// Read a JSON config. Relative paths are taken relative to the config
    /// file; `HISTCTX_OUT` replaces `out_dir` when set.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.corpus);
        if let Some(p) = cfg.pairs.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.external.as_mut() {
            rebase(p);
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => cfg.out_dir = PathBuf::from(dir),
            _ => rebase(&mut cfg.out_dir),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        TokenBudget::new(self.budget)?;
        if self.tasks.contains(&Task::Clone) && self.pairs.is_none() {
            return Err(Error::InvalidConfig("the clone task needs `pairs`".into()));
        }
        Ok(())
    }

    /// Grid cells for `task` in table order; diff_concat is pair-only.
    pub fn cells(&self, task: Task) -> Vec<(ContextSelection, AggregationScheme)> {
        let contexts: BTreeSet<(usize, usize, String)> = self
            .contexts
            .iter()
            .filter(|c| !c.is_baseline())
            .map(|c| context_order(*c))
            .collect();
        let mut out = Vec::new();
        for key in contexts {
            let sel: ContextSelection = key.2.parse().expect("names round-trip");
            for &agg in AggregationScheme::ALL
                .iter()
                .filter(|a| self.aggregations.contains(a))
            {
                if task == Task::Classify && !agg.valid_for_single() {
                    continue;
                }
                out.push((sel, agg));
            }
        }
        out
    }
}

/// Sort key: single contexts before multiple ones, then the canonical grid order.
pub(crate) fn context_order(sel: ContextSelection) -> (usize, usize, String) {
    let pos = ContextSelection::GRID
        .iter()
        .position(|g| *g == sel)
        .unwrap_or(ContextSelection::GRID.len());
    (sel.arity(), pos, sel.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub task: Task,
    pub contexts: ContextSelection,
    /// `None` on the without-context baseline row.
    pub aggregation: Option<AggregationScheme>,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
    pub split_fingerprint: String,
}

impl ResultRow {
    pub fn is_baseline(&self) -> bool {
        self.aggregation.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultMatrix {
    pub rows: Vec<ResultRow>,
}

impl ResultMatrix {
    pub fn rows_for(&self, task: Task) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.task == task)
    }

    pub fn baseline(&self, task: Task) -> Option<&ResultRow> {
        self.rows_for(task).find(|r| r.is_baseline())
    }

    pub fn find(
        &self,
        task: Task,
        sel: ContextSelection,
        agg: AggregationScheme,
    ) -> Option<&ResultRow> {
        self.rows_for(task)
            .find(|r| r.contexts == sel && r.aggregation == Some(agg))
    }

    /// Task, then baseline, single contexts, multiple contexts, then aggregation.
    pub fn sort(&mut self) {
        self.rows.sort_by_key(|r| {
            (
                r.task,
                r.aggregation.is_some(),
                context_order(r.contexts),
                r.aggregation,
            )
        });
    }

    /// Fill every non-baseline row's improvement from its task's baseline.
    pub fn fill_improvements(&mut self) {
        let baselines: HashMap<Task, EvalReport> = self
            .rows
            .iter()
            .filter(|r| r.is_baseline())
            .filter_map(|r| r.report.map(|rep| (r.task, rep)))
            .collect();
        for row in &mut self.rows {
            let base = baselines.get(&row.task);
            if let Some(rep) = row.report.as_mut() {
                rep.pct_improvement = match (row.aggregation, base) {
                    (Some(_), Some(b)) => {
                        pct_improvement(row.task.primary(rep), row.task.primary(b))
                    }
                    _ => None,
                };
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Load `matrix.json` from a file or from a run directory.
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() {
            path.join(MATRIX_FILE)
        } else {
            path.to_path_buf()
        };
        Ok(serde_json::from_str(&fs::read_to_string(file)?)?)
    }
}

pub const MATRIX_FILE: &str = "matrix.json";
const CELL_DIR: &str = "cells";
const CELL_VERSION: &str = "histctx-cell-1";

/// Encoded methods addressable by identity.
#[derive(Debug, Clone)]
pub struct EncodedCorpus {
    pub ids: Vec<MethodIdentity>,
    pub methods: Vec<EncodedMethod>,
    index: HashMap<MethodIdentity, usize>,
}

impl EncodedCorpus {
    pub fn new(ids: Vec<MethodIdentity>, methods: Vec<EncodedMethod>) -> Self {
        let index = ids
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, id)| (id, i))
            .collect();
        EncodedCorpus {
            ids,
            methods,
            index,
        }
    }

    /// Fit the hashed encoder on `corpus` and encode every method.
    pub fn encode(corpus: &[ContextBundle], dim: usize, budget: usize, seed: u64) -> Result<Self> {
        let model = VocabModel::fit(corpus, dim, seed)?;
        let methods = encode_corpus(corpus, &model, TokenBudget::new(budget)?);
        Ok(Self::new(
            corpus.iter().map(|b| b.identity().clone()).collect(),
            methods,
        ))
    }

    /// Read an encoded file whose locators name file and signature in full.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut ids = Vec::new();
        let mut dim = None;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: EmbeddingRecord =
                serde_json::from_str(line).map_err(|e| Error::SchemaError {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            dim.get_or_insert(rec.code.len());
            let Locator {
                project,
                file: Some(file_path),
                name,
                signature: Some(signature),
            } = rec.locator
            else {
                return Err(Error::SchemaError {
                    line: idx + 1,
                    message: "locator needs file and signature".into(),
                });
            };
            ids.push(MethodIdentity {
                project,
                file_path,
                qualified_name: name,
                signature,
            });
        }
        let mut found = read_external_embeddings(text.as_bytes(), &ids, dim.unwrap_or(0))?;
        let methods = ids
            .iter()
            .map(|id| found.remove(id).expect("read above"))
            .collect();
        Ok(Self::new(ids, methods))
    }

    pub fn position(&self, id: &MethodIdentity) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::MethodNotFound(id.to_string()))
    }

    pub fn get(&self, id: &MethodIdentity) -> Result<&EncodedMethod> {
        Ok(&self.methods[self.position(id)?])
    }
}

/// Pair features under one cell. Each pair is ordered by method identity
/// first; `swapped` holds the features with the operands exchanged.
pub fn clone_dataset(
    enc: &EncodedCorpus,
    pairs: &[LabeledPair],
    sel: ContextSelection,
    scheme: AggregationScheme,
) -> Result<Dataset> {
    let mut features = Vec::with_capacity(pairs.len());
    let mut swapped = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (first, second) = if p.a <= p.b {
            (&p.a, &p.b)
        } else {
            (&p.b, &p.a)
        };
        let (a, b) = (enc.get(first)?, enc.get(second)?);
        features.push(aggregate_pair(a, b, sel, scheme)?.into_inner());
        swapped.push(aggregate_pair(b, a, sel, scheme)?.into_inner());
    }
    let mut data = Dataset::new(
        features,
        pairs.iter().map(|p| usize::from(p.label)).collect(),
    )?;
    data.swapped = Some(swapped);
    Ok(data)
}

/// Single-method features labeled by project index in sorted project order.
pub fn classify_dataset(
    enc: &EncodedCorpus,
    sel: ContextSelection,
    scheme: AggregationScheme,
) -> Result<Dataset> {
    let projects: Vec<&str> = enc
        .ids
        .iter()
        .map(|id| id.project.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let features = enc
        .methods
        .iter()
        .map(|m| aggregate_single(m, sel, scheme).map(|v| v.into_inner()))
        .collect::<Result<Vec<_>>>()?;
    let labels = enc
        .ids
        .iter()
        .map(|id| {
            projects
                .binary_search(&id.project.as_str())
                .expect("project listed")
        })
        .collect();
    Dataset::new(features, labels)
}

pub fn clone_split(
    enc: &EncodedCorpus,
    pairs: &[LabeledPair],
    split_by: SplitBy,
    seed: u64,
) -> Result<DatasetSplit> {
    match split_by {
        SplitBy::Pair => split_dataset(pairs.len(), seed),
        SplitBy::Method => {
            let groups = pairs
                .iter()
                .map(|p| Ok(vec![enc.position(&p.a)?, enc.position(&p.b)?]))
                .collect::<Result<Vec<_>>>()?;
            split_by_groups(&groups, enc.ids.len(), seed)
        }
    }
}

fn cell_hash(
    task: Task,
    sel: ContextSelection,
    agg: Option<AggregationScheme>,
    data: &Dataset,
    split: &DatasetSplit,
    cfg: &TrainConfig,
) -> String {
    let mut h = Sha256::new();
    h.update(CELL_VERSION.as_bytes());
    h.update(task.name().as_bytes());
    h.update(sel.name().as_bytes());
    h.update(agg.map_or("baseline", |a| a.name()).as_bytes());
    h.update(serde_json::to_vec(cfg).expect("train config serializes"));
    h.update(split.fingerprint().as_bytes());
    for (x, y) in data.features.iter().zip(&data.labels) {
        h.update((*y as u64).to_le_bytes());
        for v in x {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    if cfg.swap_augment {
        for x in data.swapped.iter().flatten() {
            for v in x {
                h.update(v.to_bits().to_le_bytes());
            }
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Stored outcome of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub hash: String,
    pub row: ResultRow,
    pub model: Option<ModelFile>,
}

struct CellRun {
    row: ResultRow,
    trained: bool,
    steps: u64,
}

struct CellInput<'a> {
    task: Task,
    sel: ContextSelection,
    agg: Option<AggregationScheme>,
    data: Result<Dataset>,
    split: &'a DatasetSplit,
}

fn run_cell(input: CellInput<'_>, cfg: &TrainConfig, cells: &Path) -> Result<CellRun> {
    let CellInput {
        task,
        sel,
        agg,
        data,
        split,
    } = input;
    let mut row = ResultRow {
        task,
        contexts: sel,
        aggregation: agg,
        report: None,
        error: None,
        split_fingerprint: split.fingerprint(),
    };
    let data = match data {
        Ok(d) => d,
        Err(e) => {
            row.error = Some(e.to_string());
            return Ok(CellRun {
                row,
                trained: false,
                steps: 0,
            });
        }
    };
    let hash = cell_hash(task, sel, agg, &data, split, cfg);
    let path = cells.join(format!("{hash}.json"));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(rec) = serde_json::from_str::<CellRecord>(&text) {
            if rec.hash == hash {
                return Ok(CellRun {
                    row: rec.row,
                    trained: false,
                    steps: 0,
                });
            }
        }
    }
    let (model, steps) = match fit_cell(task, sel, agg, &data, split, cfg) {
        Ok(model) => {
            row.report = Some(model.test);
            let steps = model.steps;
            (Some(model), steps)
        }
        Err(e) => {
            row.error = Some(e.to_string());
            (None, 0)
        }
    };
    let rec = CellRecord {
        hash,
        row: row.clone(),
        model,
    };
    fs::write(&path, serde_json::to_string(&rec)? + "\n")?;
    Ok(CellRun {
        row,
        trained: true,
        steps,
    })
}

fn fit_cell(
    task: Task,
    sel: ContextSelection,
    agg: Option<AggregationScheme>,
    data: &Dataset,
    split: &DatasetSplit,
    cfg: &TrainConfig,
) -> Result<ModelFile> {
    let o = train(data, split, cfg, task)?;
    let test = evaluate(&o.head, data, &split.test, task, None)?;
    Ok(ModelFile {
        task,
        scenario: agg.map_or("baseline", |a| a.name()).to_string(),
        contexts: sel.name(),
        head: o.head,
        train: cfg.clone(),
        split_fingerprint: split.fingerprint(),
        best_epoch: o.best_epoch,
        best_validation: o.best_validation,
        steps: o.steps,
        test,
    })
}

/// Train and test a single cell outside the matrix. `agg = None` or an empty
/// selection gives the baseline.
pub fn train_one(
    enc: &EncodedCorpus,
    pairs: &[LabeledPair],
    task: Task,
    sel: ContextSelection,
    agg: Option<AggregationScheme>,
    split_by: SplitBy,
    cfg: &TrainConfig,
) -> Result<ModelFile> {
    let (sel, agg) = match agg {
        Some(a) if !sel.is_baseline() => (sel, Some(a)),
        _ => (ContextSelection::NONE, None),
    };
    let scheme = agg.unwrap_or(AggregationScheme::Concatenation);
    let (data, split) = match task {
        Task::Clone => (
            clone_dataset(enc, pairs, sel, scheme)?,
            clone_split(enc, pairs, split_by, cfg.seed)?,
        ),
        Task::Classify => (
            classify_dataset(enc, sel, scheme)?,
            split_dataset(enc.ids.len(), cfg.seed)?,
        ),
    };
    fit_cell(task, sel, agg, &data, &split, cfg)
}

/// The finished matrix plus how much work producing it took.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRun {
    pub matrix: ResultMatrix,
    pub cells_trained: usize,
    pub cells_reused: usize,
    pub steps: u64,
}

/// Load, encode and label the data named by `cfg`.
pub fn prepare(cfg: &ExperimentConfig) -> Result<(EncodedCorpus, Vec<LabeledPair>)> {
    let corpus = load_corpus(&cfg.corpus)?;
    let mut enc = EncodedCorpus::encode(&corpus, cfg.dim, cfg.budget, cfg.seed)?;
    if let Some(path) = &cfg.external {
        let mut ext = import_external_embeddings(path, &enc.ids, cfg.dim)?;
        let missing = enc.ids.iter().filter(|id| !ext.contains_key(*id)).count();
        if missing > 0 {
            return Err(Error::InvalidConfig(format!(
                "external embeddings cover {} of {} methods",
                enc.ids.len() - missing,
                enc.ids.len()
            )));
        }
        let methods = enc
            .ids
            .iter()
            .map(|id| ext.remove(id).expect("checked above"))
            .collect();
        enc = EncodedCorpus::new(enc.ids, methods);
    }
    let pairs = match &cfg.pairs {
        Some(p) if cfg.tasks.contains(&Task::Clone) => {
            load_labeled_pairs(p, &enc.ids, &cfg.label_rule)?
        }
        _ => Vec::new(),
    };
    Ok((enc, pairs))
}

/// Run every configured task: the baseline first, then each grid cell on the
/// same split. Completed cells found under `out_dir/cells` are reused.
pub fn run_matrix(cfg: &ExperimentConfig) -> Result<MatrixRun> {
    cfg.validate()?;
    let (enc, pairs) = prepare(cfg)?;
    run_matrix_on(cfg, &enc, &pairs)
}

pub fn run_matrix_on(
    cfg: &ExperimentConfig,
    enc: &EncodedCorpus,
    pairs: &[LabeledPair],
) -> Result<MatrixRun> {
    let cells_dir = cfg.out_dir.join(CELL_DIR);
    fs::create_dir_all(&cells_dir)?;
    let mut runs: Vec<CellRun> = Vec::new();
    let tasks: BTreeSet<Task> = cfg.tasks.iter().copied().collect();
    for task in tasks {
        let split = match task {
            Task::Clone => clone_split(enc, pairs, cfg.split_by, cfg.train.seed)?,
            Task::Classify => split_dataset(enc.ids.len(), cfg.train.seed)?,
        };
        let build = |sel, agg| match task {
            Task::Clone => clone_dataset(enc, pairs, sel, agg),
            Task::Classify => classify_dataset(enc, sel, agg),
        };
        let baseline = CellInput {
            task,
            sel: ContextSelection::NONE,
            agg: None,
            data: build(ContextSelection::NONE, AggregationScheme::Concatenation),
            split: &split,
        };
        runs.push(run_cell(baseline, &cfg.train, &cells_dir)?);
        let grid = cfg.cells(task);
        let done: Vec<CellRun> = grid
            .par_iter()
            .map(|&(sel, agg)| {
                let input = CellInput {
                    task,
                    sel,
                    agg: Some(agg),
                    data: build(sel, agg),
                    split: &split,
                };
                run_cell(input, &cfg.train, &cells_dir)
            })
            .collect::<Result<_>>()?;
        runs.extend(done);
    }
    let cells_trained = runs.iter().filter(|r| r.trained).count();
    let mut matrix = ResultMatrix {
        rows: runs.iter().map(|r| r.row.clone()).collect(),
    };
    matrix.sort();
    matrix.fill_improvements();
    matrix.save(&cfg.out_dir.join(MATRIX_FILE))?;
    Ok(MatrixRun {
        cells_reused: runs.len() - cells_trained,
        cells_trained,
        steps: runs.iter().map(|r| r.steps).sum(),
        matrix,
    })
}
