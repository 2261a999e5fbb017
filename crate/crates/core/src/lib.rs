//! Method-level version history mining, context encoding, aggregation and
//! linear evaluation heads for Java code representations.

pub mod aggregation;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod fixture;
pub mod java;
pub mod learning;
pub mod mining;
pub mod model;

pub use aggregation::{AggregationScheme, ContextSelection};
pub use encoder::{EncodedMethod, TokenBudget, Vector, VocabModel};
pub use error::{Error, Result};
pub use learning::{DatasetSplit, EvalReport, LinearHead, Task, TrainConfig};
pub use model::{CallHierarchy, ContextBundle, MethodIdentity, MethodVersion, VersionHistory};
