//! Repository mining: method version histories, call hierarchy, labeled
//! pairs and corpus statistics.

mod calls;
mod git;
mod history;
mod pairs;
mod stats;

pub use calls::{mine_call_hierarchy, signature_arity, CallGraph};
pub use git::{FileRevision, GitRepo};
pub use history::{build_version_history, changed_lines, mine_repository};
pub use pairs::{
    load_labeled_pairs, pair_members, read_labeled_pairs, write_pairs, Judgments, LabelRule,
    LabeledPair, Locator, PairRecord,
};
pub use stats::{corpus_stats, CorpusStats, StatsRow};
