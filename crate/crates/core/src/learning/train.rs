use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::head::{HeadKind, LinearHead};
use super::metrics::{pct_improvement, BinaryConfusion, EvalReport, MultiConfusion};
use super::split::DatasetSplit;
use crate::error::{Error, Result};

/// Clone detection over pairs or project classification over single methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Clone,
    Classify,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Clone, Task::Classify];

    pub fn name(self) -> &'static str {
        match self {
            Task::Clone => "clone",
            Task::Classify => "classify",
        }
    }

    pub fn head_kind(self) -> HeadKind {
        match self {
            Task::Clone => HeadKind::Sigmoid,
            Task::Classify => HeadKind::Softmax,
        }
    }

    /// F1 for clone detection, accuracy for classification.
    pub fn primary(self, r: &EvalReport) -> f64 {
        match self {
            Task::Clone => r.f1,
            Task::Classify => r.accuracy,
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clone" => Ok(Task::Clone),
            "classify" => Ok(Task::Classify),
            other => Err(Error::InvalidConfig(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Also train on the swapped-operand feature of each pair.
    pub swap_augment: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            swap_augment: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Feature rows with their labels. `swapped[i]`, when present, is the feature
/// of example `i` with the pair operands exchanged.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub swapped: Option<Vec<Vec<f64>>>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        if let Some(first) = features.first() {
            if let Some(bad) = features.iter().find(|f| f.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    actual: bad.len(),
                });
            }
        }
        Ok(Dataset {
            features,
            labels,
            swapped: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Number of labels for the task: 2 for clone, max label + 1 otherwise.
    pub fn n_classes(&self, task: Task) -> usize {
        match task {
            Task::Clone => 2,
            Task::Classify => self.labels.iter().max().map_or(0, |m| m + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub head: LinearHead,
    /// 0 means the initial head was never beaten on validation.
    pub best_epoch: usize,
    pub best_validation: f64,
    /// Validation score per epoch, starting with the initial head.
    pub validation_curve: Vec<f64>,
    pub steps: u64,
}

/// Mini-batch gradient descent, keeping the epoch with the best validation score.
pub fn train(
    data: &Dataset,
    split: &DatasetSplit,
    cfg: &TrainConfig,
    task: Task,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if split
        .train
        .iter()
        .chain(&split.validation)
        .chain(&split.test)
        .any(|&i| i >= data.len())
    {
        return Err(Error::InvalidConfig("split index out of range".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in &split.train {
        seen.insert(data.labels[i]);
    }
    if seen.len() < 2 {
        return Err(Error::DegenerateLabels(format!(
            "training set holds {} distinct label(s)",
            seen.len()
        )));
    }
    let n_classes = data.n_classes(task);
    if task == Task::Clone && data.labels.iter().any(|&y| y > 1) {
        return Err(Error::InvalidConfig("clone labels must be 0 or 1".into()));
    }

    let mut head = LinearHead::init(task.head_kind(), data.dim(), n_classes, cfg.seed)?;

    let mut examples: Vec<&[f64]> = Vec::new();
    let mut targets: Vec<usize> = Vec::new();
    for &i in &split.train {
        examples.push(&data.features[i]);
        targets.push(data.labels[i]);
        if cfg.swap_augment {
            if let Some(sw) = &data.swapped {
                examples.push(&sw[i]);
                targets.push(data.labels[i]);
            }
        }
    }

    let score = |h: &LinearHead| -> Result<f64> {
        Ok(task.primary(&evaluate(h, data, &split.validation, task, None)?))
    };
    let mut best = head.clone();
    let mut best_score = score(&head)?;
    let mut best_epoch = 0;
    let mut curve = vec![best_score];
    let mut steps = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x005e_ed0f_e90c);
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&k| examples[k]).collect();
            let ys: Vec<usize> = chunk.iter().map(|&k| targets[k]).collect();
            let (_, grad) = head.loss_and_grad(&xs, &ys)?;
            for (w, g) in head.weights.iter_mut().zip(&grad.weights) {
                *w -= cfg.learning_rate * g;
            }
            for (b, g) in head.bias.iter_mut().zip(&grad.bias) {
                *b -= cfg.learning_rate * g;
            }
            steps += 1;
        }
        if !head.is_finite() {
            return Err(Error::InvalidConfig(
                "training diverged to non-finite weights".into(),
            ));
        }
        let s = score(&head)?;
        curve.push(s);
        if s > best_score {
            best_score = s;
            best_epoch = epoch;
            best = head.clone();
        }
    }
    Ok(TrainOutcome {
        head: best,
        best_epoch,
        best_validation: best_score,
        validation_curve: curve,
        steps,
    })
}

/// Metrics of `head` over the rows in `indices`; prediction is sharded across
/// threads and reduced through additive confusion counts.
pub fn evaluate(
    head: &LinearHead,
    data: &Dataset,
    indices: &[usize],
    task: Task,
    baseline: Option<&EvalReport>,
) -> Result<EvalReport> {
    let preds: Vec<usize> = indices
        .par_iter()
        .map(|&i| head.predict(&data.features[i]))
        .collect::<Result<_>>()?;
    let truth: Vec<usize> = indices.iter().map(|&i| data.labels[i]).collect();
    let mut report = match task {
        Task::Clone => BinaryConfusion::from_predictions(&preds, &truth).report(),
        Task::Classify => {
            let n = head.n_out.max(truth.iter().max().map_or(0, |m| m + 1));
            MultiConfusion::from_predictions(&preds, &truth, n).report()
        }
    };
    if let Some(b) = baseline {
        report.pct_improvement = pct_improvement(task.primary(&report), task.primary(b));
    }
    Ok(report)
}

/// On-disk model: head parameters plus the training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub task: Task,
    pub scenario: String,
    pub contexts: String,
    pub head: LinearHead,
    pub train: TrainConfig,
    pub split_fingerprint: String,
    pub best_epoch: usize,
    pub best_validation: f64,
    pub steps: u64,
    pub test: EvalReport,
}

impl ModelFile {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let model: ModelFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let h = &model.head;
        if h.weights.len() != h.n_in * h.n_out || h.bias.len() != h.n_out {
            return Err(Error::DimensionMismatch {
                expected: h.n_in * h.n_out,
                actual: h.weights.len(),
            });
        }
        Ok(model)
    }
}
