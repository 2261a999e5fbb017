#![allow(dead_code)]

use std::fs::File;
use std::path::{Path, PathBuf};

use histctx::experiment::{designed_spec, DesignedConfig};
use histctx::fixture::synth_fixture;
use histctx::mining::{mine_repository, write_pairs, GitRepo, Judgments, LabeledPair};
use histctx::model::save_corpus;
use histctx::MethodIdentity;

/// Corpus and pair files for a small designed corpus. Methods of the left
/// classes belong to project `left`, the others to `right`.
pub fn small_workspace(dir: &Path, pairs: usize, seed: u64) -> (PathBuf, PathBuf) {
    let cfg = DesignedConfig {
        pairs,
        ..DesignedConfig::new(seed, 1.0)
    };
    let (spec, ids) = designed_spec(&cfg).unwrap();
    let repo = dir.join("repo");
    synth_fixture(&spec, seed, &repo).unwrap();
    let mut corpus = mine_repository(&GitRepo::open(&repo).unwrap(), &spec.project).unwrap();
    let relabel = |id: &mut MethodIdentity| {
        id.project = if id.qualified_name.starts_with('L') {
            "left"
        } else {
            "right"
        }
        .into();
    };
    for b in &mut corpus {
        relabel(&mut b.history.identity);
    }
    let labeled: Vec<LabeledPair> = ids
        .into_iter()
        .map(|(mut a, mut b, label)| {
            relabel(&mut a);
            relabel(&mut b);
            LabeledPair {
                a,
                b,
                label,
                judgments: if label == 1 {
                    Judgments::positive(2.0)
                } else {
                    Judgments::negative(2.0)
                },
            }
        })
        .collect();
    let corpus_path = dir.join("corpus.jsonl");
    let pairs_path = dir.join("pairs.jsonl");
    save_corpus(&corpus_path, &corpus).unwrap();
    write_pairs(File::create(&pairs_path).unwrap(), &labeled).unwrap();
    (corpus_path, pairs_path)
}
