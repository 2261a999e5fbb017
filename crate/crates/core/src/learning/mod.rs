//! Linear heads, dataset splits, training and metrics.

mod head;
mod metrics;
mod split;
mod train;

pub use head::{sigmoid, softmax, Gradients, HeadKind, LinearHead};
pub use metrics::{f1_score, pct_improvement, BinaryConfusion, EvalReport, MultiConfusion};
pub use split::{split_by_groups, split_dataset, DatasetSplit, MIN_SPLIT_SIZE};
pub use train::{evaluate, train, Dataset, ModelFile, Task, TrainConfig, TrainOutcome};
