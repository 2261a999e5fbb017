use histctx::fixture::{lcs_changed_lines, synth_fixture, Edit, FixtureCommit, FixtureSpec};
use histctx::mining::{
    build_version_history, changed_lines, corpus_stats, mine_repository, GitRepo,
};
use histctx::model::{read_corpus, write_corpus};
use histctx::{Error, MethodIdentity};
use proptest::prelude::*;

const DAY: i64 = 86_400;
const FILE: &str = "src/Calc.java";

fn put(text: &str) -> Edit {
    Edit::Put {
        file: FILE.into(),
        class: "Calc".into(),
        text: text.into(),
    }
}

fn commit(time: i64, edits: Vec<Edit>) -> FixtureCommit {
    FixtureCommit { time, edits }
}

fn spec(commits: Vec<FixtureCommit>) -> FixtureSpec {
    FixtureSpec {
        project: "calc".into(),
        commits,
    }
}

fn sum_id() -> MethodIdentity {
    MethodIdentity {
        project: "calc".into(),
        file_path: FILE.into(),
        qualified_name: "Calc.sum".into(),
        signature: "(int)".into(),
    }
}

const SUM_V1: &str = "int sum(int a) {\n        return a + 1;\n    }";
const SUM_V2: &str = "int sum(int a) {\n        int b = a * 2;\n        return b + 1;\n    }";

#[test]
fn unchanged_commits_are_dropped() {
    let t0 = 1_600_000_000;
    let s = spec(vec![
        commit(t0, vec![put(SUM_V1)]),
        commit(t0 + DAY, vec![Edit::Touch { file: FILE.into() }]),
        commit(t0 + 3 * DAY, vec![put(SUM_V2)]),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 1, &dir.path().join("r")).unwrap();
    let repo = GitRepo::open(&fx.path).unwrap();
    let h = build_version_history(&repo, &sum_id()).unwrap();
    assert_eq!(h.versions.len(), 2);
    assert_eq!(h.versions[0].commit_hash, fx.commits[2]);
    assert_eq!(h.versions[1].commit_hash, fx.commits[0]);
    assert_eq!(h.versions[0].source_text, SUM_V2);
    assert_eq!(h.versions[0].changed_lines, 3);
    assert_eq!(h.versions[1].changed_lines, 0);
    assert_eq!(h.lifetime_days, 3);
    assert_eq!(vec![h], s.expected_histories(&fx.commits).unwrap());
}

#[test]
fn method_added_at_head_has_one_version() {
    let t0 = 1_600_000_000;
    let other = "int other(int a) {\n        return a;\n    }";
    let s = spec(vec![
        commit(t0, vec![put(other)]),
        commit(t0 + 5 * DAY, vec![put(SUM_V1)]),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 2, &dir.path().join("r")).unwrap();
    let h = build_version_history(&GitRepo::open(&fx.path).unwrap(), &sum_id()).unwrap();
    assert_eq!(h.versions.len(), 1);
    assert_eq!(h.lifetime_days, 0);
}

#[test]
fn ten_day_gap_gives_ten_days() {
    let t0 = 1_600_000_000;
    let s = spec(vec![
        commit(t0, vec![put(SUM_V1)]),
        commit(t0 + 10 * DAY, vec![put(SUM_V2)]),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 3, &dir.path().join("r")).unwrap();
    let corpus = mine_repository(&GitRepo::open(&fx.path).unwrap(), "calc").unwrap();
    assert_eq!(corpus.len(), 1);
    assert_eq!(corpus[0].days, 10);
    assert_eq!(corpus[0].history.versions.len(), 2);
}

#[test]
fn introduction_without_later_edits_is_one_version() {
    let t0 = 1_600_000_000;
    let s = spec(vec![
        commit(t0, vec![put(SUM_V1)]),
        commit(t0 + DAY, vec![]),
        commit(t0 + 2 * DAY, vec![Edit::Touch { file: FILE.into() }]),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 4, &dir.path().join("r")).unwrap();
    let h = build_version_history(&GitRepo::open(&fx.path).unwrap(), &sum_id()).unwrap();
    assert_eq!(h.versions.len(), 1);
    assert_eq!(h.lifetime_days, 2);
}

#[test]
fn renamed_file_keeps_its_history() {
    let t0 = 1_600_000_000;
    let s = spec(vec![
        commit(t0, vec![put(SUM_V1)]),
        commit(
            t0 + DAY,
            vec![Edit::Rename {
                from: FILE.into(),
                to: "src/moved/Calc.java".into(),
            }],
        ),
        commit(
            t0 + 2 * DAY,
            vec![Edit::Put {
                file: "src/moved/Calc.java".into(),
                class: "Calc".into(),
                text: SUM_V2.into(),
            }],
        ),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 5, &dir.path().join("r")).unwrap();
    let corpus = mine_repository(&GitRepo::open(&fx.path).unwrap(), "calc").unwrap();
    assert_eq!(corpus.len(), 1);
    assert_eq!(corpus[0].identity().file_path, "src/moved/Calc.java");
    let texts: Vec<&str> = corpus[0]
        .history
        .versions
        .iter()
        .map(|v| v.source_text.as_str())
        .collect();
    assert_eq!(texts, [SUM_V2, SUM_V1]);
    let expected = s.expected_histories(&fx.commits).unwrap();
    assert_eq!(corpus[0].history, expected[0]);
}

#[test]
fn clone_pair_histories_meet_on_the_shared_ancestor() {
    let t0 = 1_600_000_000;
    let ancestor = |name: &str| format!("int {name}(int a) {{\n        return a * 3 + 1;\n    }}");
    let s = FixtureSpec {
        project: "p".into(),
        commits: vec![
            commit(
                t0,
                vec![
                    Edit::Put {
                        file: "src/A.java".into(),
                        class: "A".into(),
                        text: ancestor("f"),
                    },
                    Edit::Put {
                        file: "src/B.java".into(),
                        class: "B".into(),
                        text: ancestor("f"),
                    },
                ],
            ),
            commit(
                t0 + DAY,
                vec![
                    Edit::Put {
                        file: "src/A.java".into(),
                        class: "A".into(),
                        text:
                            "int f(int a) {\n        int t = a * 3;\n        return t + 1;\n    }"
                                .into(),
                    },
                    Edit::Put {
                        file: "src/B.java".into(),
                        class: "B".into(),
                        text: "int f(int a) {\n        return 1 + 3 * a;\n    }".into(),
                    },
                ],
            ),
        ],
    };
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 6, &dir.path().join("r")).unwrap();
    let corpus = mine_repository(&GitRepo::open(&fx.path).unwrap(), "p").unwrap();
    assert_eq!(corpus.len(), 2);
    assert_ne!(corpus[0].current_text(), corpus[1].current_text());
    assert_eq!(
        corpus[0].history.oldest().source_text,
        corpus[1].history.oldest().source_text
    );
}

#[test]
fn missing_method_is_reported() {
    let s = spec(vec![commit(1_600_000_000, vec![put(SUM_V1)])]);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 7, &dir.path().join("r")).unwrap();
    let mut id = sum_id();
    id.signature = "(long)".into();
    let err = build_version_history(&GitRepo::open(&fx.path).unwrap(), &id).unwrap_err();
    assert!(matches!(err, Error::MethodNotFound(_)));
}

#[test]
fn non_repository_is_unreadable() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        GitRepo::open(dir.path()),
        Err(Error::RepositoryUnreadable { .. })
    ));
}

#[test]
fn call_hierarchy_comes_from_head() {
    let t0 = 1_600_000_000;
    let caller = "int twice(int a) {\n        return sum(sum(a));\n    }";
    let s = spec(vec![commit(t0, vec![put(SUM_V1), put(caller)])]);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 8, &dir.path().join("r")).unwrap();
    let corpus = mine_repository(&GitRepo::open(&fx.path).unwrap(), "calc").unwrap();
    let sum = corpus
        .iter()
        .find(|b| b.identity().simple_name() == "sum")
        .unwrap();
    let twice = corpus
        .iter()
        .find(|b| b.identity().simple_name() == "twice")
        .unwrap();
    assert_eq!(sum.calls.longest_caller.as_deref(), Some(caller));
    assert_eq!(sum.calls.longest_callee, None);
    assert_eq!(twice.calls.longest_callee.as_deref(), Some(SUM_V1));
}

#[test]
fn mining_is_idempotent_and_round_trips() {
    let s = FixtureSpec::random(11);
    let dir = tempfile::tempdir().unwrap();
    let fx = synth_fixture(&s, 11, &dir.path().join("r")).unwrap();
    let repo = GitRepo::open(&fx.path).unwrap();
    let mut first = Vec::new();
    let mut second = Vec::new();
    let corpus = mine_repository(&repo, &s.project).unwrap();
    write_corpus(&mut first, &corpus).unwrap();
    write_corpus(&mut second, &mine_repository(&repo, &s.project).unwrap()).unwrap();
    assert_eq!(first, second);
    assert_eq!(read_corpus(first.as_slice()).unwrap(), corpus);

    let stats = corpus_stats(&corpus).unwrap();
    let methods: u64 = stats.rows.iter().map(|r| r.method_count).sum();
    assert_eq!(methods, stats.global.method_count);
    assert_eq!(methods as usize, corpus.len());
}

#[test]
fn random_specs_mine_as_expected() {
    for seed in 100..105 {
        let s = FixtureSpec::random(seed);
        let dir = tempfile::tempdir().unwrap();
        let fx = synth_fixture(&s, seed, &dir.path().join("r")).unwrap();
        let corpus = mine_repository(&GitRepo::open(&fx.path).unwrap(), &s.project).unwrap();
        let mined: Vec<_> = corpus.into_iter().map(|b| b.history).collect();
        assert_eq!(
            mined,
            s.expected_histories(&fx.commits).unwrap(),
            "seed {seed}"
        );
        for h in &mined {
            h.check_invariants(Some(s.head_time())).unwrap();
        }
    }
}

fn lines() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec!["a", "b", "c", "d", "{", "}", ""]),
        0..25,
    )
    .prop_map(|v| v.join("\n"))
}

proptest! {
    #[test]
    fn myers_matches_lcs_oracle(old in lines(), new in lines()) {
        prop_assert_eq!(changed_lines(&old, &new), lcs_changed_lines(&old, &new));
    }
}
