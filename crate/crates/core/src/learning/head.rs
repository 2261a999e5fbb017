use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    Sigmoid,
    Softmax,
}

/// Linear layer followed by a sigmoid (one output) or softmax (one per label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub kind: HeadKind,
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradients with the same layout as the head parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

impl LinearHead {
    pub fn zeros(kind: HeadKind, n_in: usize, n_out: usize) -> Result<Self> {
        let n_out = match kind {
            HeadKind::Sigmoid => 1,
            HeadKind::Softmax if n_out >= 2 => n_out,
            HeadKind::Softmax => {
                return Err(Error::InvalidConfig(
                    "softmax head needs at least two labels".into(),
                ))
            }
        };
        Ok(LinearHead {
            kind,
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            bias: vec![0.0; n_out],
        })
    }

    /// Weights from a seeded uniform(−1/√n_in, 1/√n_in); zero bias.
    pub fn init(kind: HeadKind, n_in: usize, n_out: usize, seed: u64) -> Result<Self> {
        let mut head = Self::zeros(kind, n_in, n_out)?;
        let bound = 1.0 / (n_in.max(1) as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in &mut head.weights {
            *w = rng.gen_range(-bound..=bound);
        }
        Ok(head)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_in {
            return Err(Error::DimensionMismatch {
                expected: self.n_in,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok((0..self.n_out)
            .map(|r| {
                let row = &self.weights[r * self.n_in..(r + 1) * self.n_in];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias[r]
            })
            .collect())
    }

    /// Sigmoid: `[p(positive)]`; softmax: one probability per label.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.logits(x)?;
        Ok(match self.kind {
            HeadKind::Sigmoid => vec![sigmoid(z[0])],
            HeadKind::Softmax => softmax(&z),
        })
    }

    /// Predicted label: threshold 0.5 for sigmoid (0.5 counts as positive),
    /// argmax with ties to the lowest index for softmax.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let p = self.forward(x)?;
        Ok(match self.kind {
            HeadKind::Sigmoid => usize::from(p[0] >= 0.5),
            HeadKind::Softmax => {
                let mut best = 0;
                for (i, &v) in p.iter().enumerate() {
                    if v > p[best] {
                        best = i;
                    }
                }
                best
            }
        })
    }

    fn check_label(&self, y: usize) -> Result<()> {
        let limit = match self.kind {
            HeadKind::Sigmoid => 2,
            HeadKind::Softmax => self.n_out,
        };
        if y >= limit {
            return Err(Error::InvalidConfig(format!(
                "label {y} out of range for head"
            )));
        }
        Ok(())
    }

    /// Mean cross-entropy over the batch and its analytic gradient.
    pub fn loss_and_grad(&self, xs: &[&[f64]], ys: &[usize]) -> Result<(f64, Gradients)> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                actual: ys.len(),
            });
        }
        let mut grad = Gradients {
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.n_out],
        };
        if xs.is_empty() {
            return Ok((0.0, grad));
        }
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            self.check_label(y)?;
            let z = self.logits(x)?;
            // dL/dz per output
            let dz: Vec<f64> = match self.kind {
                HeadKind::Sigmoid => {
                    let t = y as f64;
                    loss += softplus(z[0]) - t * z[0];
                    vec![sigmoid(z[0]) - t]
                }
                HeadKind::Softmax => {
                    loss += log_sum_exp(&z) - z[y];
                    let mut p = softmax(&z);
                    p[y] -= 1.0;
                    p
                }
            };
            for (r, d) in dz.iter().enumerate() {
                grad.bias[r] += d;
                let row = &mut grad.weights[r * self.n_in..(r + 1) * self.n_in];
                for (g, v) in row.iter_mut().zip(x.iter()) {
                    *g += d * v;
                }
            }
        }
        let n = xs.len() as f64;
        grad.weights.iter_mut().for_each(|g| *g /= n);
        grad.bias.iter_mut().for_each(|g| *g /= n);
        Ok((loss / n, grad))
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}
