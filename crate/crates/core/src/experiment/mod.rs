//! Experiment matrix, report tables and the designed synthetic experiment.

mod designed;
mod matrix;
mod report;

pub use designed::{
    designed_spec, run_designed, run_designed_experiment, DesignedConfig, DesignedOutcome,
    DesignedPair,
};
pub use matrix::{
    classify_dataset, clone_dataset, clone_split, prepare, run_matrix, run_matrix_on, train_one,
    CellRecord, EncodedCorpus, ExperimentConfig, MatrixRun, ResultMatrix, ResultRow, SplitBy,
    MATRIX_FILE, OUT_DIR_ENV,
};
pub use report::{format_pct, parse_csv, render_table, TableFormat};
