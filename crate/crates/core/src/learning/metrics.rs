use serde::{Deserialize, Serialize};

/// Precision, recall, F1 and accuracy, plus the signed improvement over a baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Rounded percent change of the primary metric against the baseline.
    pub pct_improvement: Option<i64>,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// `round((metric / baseline − 1)·100)`, `None` for a zero baseline.
pub fn pct_improvement(metric: f64, baseline: f64) -> Option<i64> {
    (baseline > 0.0).then(|| ((metric / baseline - 1.0) * 100.0).round() as i64)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Binary confusion counts; additive across shards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BinaryConfusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl BinaryConfusion {
    pub fn from_predictions(pred: &[usize], truth: &[usize]) -> Self {
        let mut c = Self::default();
        for (&p, &t) in pred.iter().zip(truth) {
            match (p == 1, t == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }

    pub fn report(&self) -> EvalReport {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        EvalReport {
            precision,
            recall,
            f1: f1_score(precision, recall),
            accuracy: ratio(self.tp + self.tn, self.tp + self.fp + self.tn + self.fn_),
            pct_improvement: None,
        }
    }
}

/// `counts[truth][pred]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiConfusion {
    pub counts: Vec<Vec<u64>>,
}

impl MultiConfusion {
    pub fn from_predictions(pred: &[usize], truth: &[usize], n_classes: usize) -> Self {
        let mut counts = vec![vec![0u64; n_classes]; n_classes];
        for (&p, &t) in pred.iter().zip(truth) {
            counts[t][p] += 1;
        }
        Self { counts }
    }

    pub fn merge(mut self, o: &Self) -> Self {
        for (row, orow) in self.counts.iter_mut().zip(&o.counts) {
            for (c, oc) in row.iter_mut().zip(orow) {
                *c += oc;
            }
        }
        self
    }

    /// Accuracy with macro precision and recall over the classes that occur in
    /// either the truth or the predictions; F1 from the macro averages.
    pub fn report(&self) -> EvalReport {
        let n = self.counts.len();
        let total: u64 = self.counts.iter().flatten().sum();
        let correct: u64 = (0..n).map(|k| self.counts[k][k]).sum();
        let (mut p_sum, mut r_sum, mut classes) = (0.0, 0.0, 0u64);
        for k in 0..n {
            let actual: u64 = self.counts[k].iter().sum();
            let predicted: u64 = self.counts.iter().map(|row| row[k]).sum();
            if actual == 0 && predicted == 0 {
                continue;
            }
            classes += 1;
            p_sum += ratio(self.counts[k][k], predicted);
            r_sum += ratio(self.counts[k][k], actual);
        }
        let precision = if classes > 0 {
            p_sum / classes as f64
        } else {
            0.0
        };
        let recall = if classes > 0 {
            r_sum / classes as f64
        } else {
            0.0
        };
        EvalReport {
            precision,
            recall,
            f1: f1_score(precision, recall),
            accuracy: ratio(correct, total),
            pct_improvement: None,
        }
    }
}
