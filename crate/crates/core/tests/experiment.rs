mod common;

use std::collections::HashSet;
use std::fs::File;

use histctx::encoder::write_encoded;
use histctx::experiment::{
    parse_csv, prepare, render_table, run_matrix, ExperimentConfig, ResultMatrix, SplitBy,
    TableFormat, OUT_DIR_ENV,
};
use histctx::learning::split_by_groups;
use histctx::model::{read_corpus, write_corpus};
use histctx::{AggregationScheme, ContextSelection, Task};

fn config(dir: &std::path::Path) -> ExperimentConfig {
    let (corpus, pairs) = common::small_workspace(dir, 60, 5);
    let mut cfg = ExperimentConfig::new(corpus, dir.join("out"));
    cfg.pairs = Some(pairs);
    cfg.dim = 64;
    cfg.train.epochs = 10;
    cfg.train.learning_rate = 0.5;
    cfg
}

#[test]
fn matrix_follows_table_structure_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let run = run_matrix(&cfg).unwrap();
    let m = &run.matrix;
    assert_eq!(m.rows_for(Task::Clone).count(), 16);
    assert_eq!(m.rows_for(Task::Classify).count(), 11);
    assert_eq!(run.cells_trained, 27);
    assert!(m.rows.iter().all(|r| r.error.is_none()), "{m:#?}");
    assert!(m
        .rows_for(Task::Classify)
        .all(|r| r.aggregation != Some(AggregationScheme::DiffThenConcat)));

    for task in Task::ALL {
        let rows: Vec<_> = m.rows_for(task).collect();
        assert!(rows[0].is_baseline());
        assert_eq!(rows[0].report.unwrap().pct_improvement, None);
        assert!(rows[1..]
            .iter()
            .all(|r| r.report.unwrap().pct_improvement.is_some()));
        let prints: HashSet<&str> = rows.iter().map(|r| r.split_fingerprint.as_str()).collect();
        assert_eq!(prints.len(), 1, "one split per task");
        // single contexts come before multiple ones
        let arities: Vec<usize> = rows.iter().map(|r| r.contexts.arity()).collect();
        assert!(arities.windows(2).all(|w| w[0] <= w[1]));
    }

    let text = render_table(m, TableFormat::Text).unwrap();
    assert!(text.contains("Code Clone Detection") && text.contains("Code Classification"));
    let csv = render_table(m, TableFormat::Csv).unwrap();
    assert_eq!(csv.lines().count(), 28);
    assert_eq!(&parse_csv(&csv).unwrap(), m);
    assert_eq!(&ResultMatrix::load(&cfg.out_dir).unwrap(), m);

    let again = run_matrix(&cfg).unwrap();
    assert_eq!(
        (again.cells_trained, again.cells_reused, again.steps),
        (0, 27, 0)
    );
    assert_eq!(&again.matrix, m);
}

#[test]
fn empty_grid_is_baseline_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.contexts.clear();
    let run = run_matrix(&cfg).unwrap();
    assert_eq!(run.matrix.rows.len(), 2);
    assert!(run.matrix.rows.iter().all(|r| r.is_baseline()));
}

#[test]
fn failed_cells_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    let mut corpus =
        read_corpus(std::io::BufReader::new(File::open(&cfg.corpus).unwrap())).unwrap();
    for b in &mut corpus {
        b.history.identity.project = "only".into();
    }
    write_corpus(File::create(&cfg.corpus).unwrap(), &corpus).unwrap();
    cfg.tasks = vec![Task::Classify];
    cfg.pairs = None;
    let run = run_matrix(&cfg).unwrap();
    assert_eq!(run.matrix.rows.len(), 11);
    assert!(run
        .matrix
        .rows
        .iter()
        .all(|r| r.report.is_none() && r.error.is_some()));
    let text = render_table(&run.matrix, TableFormat::Text).unwrap();
    assert!(text.contains("failed"));
    assert!(ResultMatrix::load(&cfg.out_dir)
        .unwrap()
        .rows
        .iter()
        .all(|r| r.error.is_some()));
}

#[test]
fn external_embeddings_reproduce_builtin_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.tasks = vec![Task::Clone];
    cfg.contexts = vec![ContextSelection::VH_CH_DAYS];
    let builtin = run_matrix(&cfg).unwrap().matrix;

    let (enc, _) = prepare(&cfg).unwrap();
    let items: Vec<_> = enc
        .ids
        .iter()
        .cloned()
        .zip(enc.methods.iter().cloned())
        .collect();
    let ext = dir.path().join("emb.jsonl");
    write_encoded(File::create(&ext).unwrap(), &items).unwrap();
    cfg.external = Some(ext);
    cfg.out_dir = dir.path().join("out-ext");
    assert_eq!(run_matrix(&cfg).unwrap().matrix, builtin);

    cfg.dim = 32;
    assert!(run_matrix(&cfg).is_err());
}

#[test]
fn method_split_keeps_methods_apart() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.tasks = vec![Task::Clone];
    cfg.contexts = vec![ContextSelection::VH];
    cfg.split_by = SplitBy::Method;
    let run = run_matrix(&cfg).unwrap();
    assert_eq!(run.matrix.rows.len(), 4);

    let (enc, pairs) = prepare(&cfg).unwrap();
    let groups: Vec<Vec<usize>> = pairs
        .iter()
        .map(|p| vec![enc.position(&p.a).unwrap(), enc.position(&p.b).unwrap()])
        .collect();
    let split = split_by_groups(&groups, enc.ids.len(), cfg.train.seed).unwrap();
    let methods =
        |idx: &[usize]| -> HashSet<usize> { idx.iter().flat_map(|&i| groups[i].clone()).collect() };
    assert!(methods(&split.train).is_disjoint(&methods(&split.test)));
    assert!(methods(&split.train).is_disjoint(&methods(&split.validation)));
}

#[test]
fn config_file_paths_and_output_override() {
    let dir = tempfile::tempdir().unwrap();
    common::small_workspace(dir.path(), 30, 9);
    let path = dir.path().join("exp.json");
    std::fs::write(
        &path,
        r#"{"corpus": "corpus.jsonl", "pairs": "pairs.jsonl", "tasks": ["clone"],
            "contexts": ["vh", "vh+ch+days"], "aggregations": ["concat", "diff_concat"],
            "train": {"epochs": 2}, "out_dir": "results"}"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.corpus, dir.path().join("corpus.jsonl"));
    assert_eq!(cfg.out_dir, dir.path().join("results"));
    assert_eq!(cfg.train.learning_rate, 0.01);
    assert_eq!(cfg.cells(Task::Clone).len(), 4);
    assert_eq!(cfg.cells(Task::Classify).len(), 2);

    let other = dir.path().join("elsewhere");
    std::env::set_var(OUT_DIR_ENV, &other);
    let overridden = ExperimentConfig::load(&path);
    std::env::remove_var(OUT_DIR_ENV);
    assert_eq!(overridden.unwrap().out_dir, other);

    std::fs::write(&path, r#"{"corpus": "corpus.jsonl"}"#).unwrap();
    assert!(
        ExperimentConfig::load(&path).is_err(),
        "clone task needs pairs"
    );
}
