use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn histctx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histctx"))
        .args(args)
        .env_remove("HISTCTX_OUT")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = histctx(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Twelve methods in two classes, each edited once after creation.
fn spec(project: &str) -> Value {
    let body = |i: usize, k: usize| {
        let stmts: String = (0..k)
            .map(|s| format!("        a = a * {} + {s};\n", i + 2))
            .collect();
        format!("int m{i}(int a) {{\n{stmts}        return a;\n    }}")
    };
    let put = |i: usize, k: usize| {
        let class = if i < 6 { "A" } else { "B" };
        json!({"op": "put", "file": format!("src/{class}.java"), "class": class, "text": body(i, k)})
    };
    json!({
        "project": project,
        "commits": [
            {"time": 1_600_000_000, "edits": (0..12).map(|i| put(i, 1)).collect::<Vec<_>>()},
            {"time": 1_600_000_000 + 20 * 86_400, "edits": (0..12).map(|i| put(i, 2)).collect::<Vec<_>>()},
        ]
    })
}

fn mined(dir: &Path, project: &str) -> String {
    let spec_path = dir.join(format!("{project}.json"));
    fs::write(&spec_path, spec(project).to_string()).unwrap();
    let repo = dir.join(project);
    ok(&[
        "fixture",
        "--spec",
        p(&spec_path),
        "--seed",
        "3",
        "--out",
        p(&repo),
    ]);
    let corpus = dir.join(format!("{project}.jsonl"));
    let said = ok(&["mine", "--repo", p(&repo), "--out", p(&corpus)]);
    assert!(
        said.contains(&format!("12 methods mined from {project}")),
        "{said}"
    );
    fs::read_to_string(corpus).unwrap()
}

/// Two mined projects in one corpus, plus clone pairs over the first one.
fn workspace(dir: &Path) -> (String, String) {
    let text = mined(dir, "alpha") + &mined(dir, "beta");
    let corpus = dir.join("corpus.jsonl");
    fs::write(&corpus, &text).unwrap();

    let locs: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v["project"] == "alpha")
        .map(|v| json!({"project": v["project"], "file": v["file"], "name": v["name"], "signature": v["signature"]}))
        .collect();
    let mut pairs = String::new();
    for i in 0..locs.len() {
        for j in i + 1..locs.len() {
            let same = (i % 2 == j % 2) as u8;
            let line = json!({"a": locs[i], "b": locs[j], "high_yes": same, "high_no": 1 - same});
            pairs.push_str(&format!("{line}\n"));
        }
    }
    let pairs_path = dir.join("pairs.jsonl");
    fs::write(&pairs_path, pairs).unwrap();
    (p(&corpus).to_string(), p(&pairs_path).to_string())
}

#[test]
fn mine_stats_encode_train() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, pairs) = workspace(dir.path());

    let stats = ok(&["stats", "--corpus", &corpus]);
    assert!(stats
        .lines()
        .any(|l| l.starts_with("alpha") && l.contains("2.00") && l.contains("20 | 20 | 20")));
    assert!(stats.lines().any(|l| l.starts_with("beta")));

    let enc = dir.path().join("enc.jsonl");
    let said = ok(&[
        "encode",
        "--corpus",
        &corpus,
        "--dim",
        "16",
        "--out",
        p(&enc),
    ]);
    assert!(said.contains("encoded 24 methods"));
    let first: Value =
        serde_json::from_str(fs::read_to_string(&enc).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["code"].as_array().unwrap().len(), 16);

    let again = dir.path().join("again.jsonl");
    ok(&[
        "encode",
        "--corpus",
        &corpus,
        "--dim",
        "16",
        "--external",
        p(&enc),
        "--out",
        p(&again),
    ]);
    assert_eq!(fs::read(&enc).unwrap(), fs::read(&again).unwrap());

    let model = dir.path().join("model.json");
    for (task, scenario) in [
        ("clone", "diff_concat"),
        ("classify", "maxpool"),
        ("clone", "baseline"),
    ] {
        let said = ok(&[
            "train",
            "--task",
            task,
            "--scenario",
            scenario,
            "--contexts",
            "vh+days",
            "--enc",
            p(&enc),
            "--pairs",
            &pairs,
            "--epochs",
            "5",
            "--lr",
            "0.5",
            "--out",
            p(&model),
        ]);
        assert!(said.starts_with("best epoch"), "{said}");
        let saved: Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
        assert_eq!(saved["task"], task);
    }

    let out = histctx(&[
        "train",
        "--task",
        "clone",
        "--enc",
        p(&enc),
        "--out",
        p(&model),
    ]);
    assert!(!out.status.success());
    let out = histctx(&[
        "train",
        "--task",
        "classify",
        "--scenario",
        "diff_concat",
        "--enc",
        p(&enc),
        "--out",
        p(&model),
    ]);
    assert!(!out.status.success());
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, pairs) = workspace(dir.path());
    let out_dir = dir.path().join("out");
    let config = dir.path().join("exp.json");
    let cfg = json!({
        "corpus": corpus, "pairs": pairs, "dim": 16,
        "train": {"epochs": 3, "learning_rate": 0.5},
        "out_dir": p(&out_dir),
    });
    fs::write(&config, cfg.to_string()).unwrap();

    let text = ok(&["run", "--config", p(&config)]);
    assert!(text.starts_with("Code Clone Detection\n"));
    assert!(text.contains("Code Classification"));
    assert_eq!(ok(&["report", "--matrix", p(&out_dir)]), text);

    let csv = ok(&[
        "report",
        "--matrix",
        p(&out_dir.join("matrix.json")),
        "--format",
        "csv",
    ]);
    assert_eq!(csv.lines().count(), 1 + 16 + 11);

    let rerun = histctx(&["run", "--config", p(&config)]);
    assert!(String::from_utf8_lossy(&rerun.stderr).contains("0 cells trained, 27 reused"));

    let elsewhere = dir.path().join("elsewhere");
    let moved = Command::new(env!("CARGO_BIN_EXE_histctx"))
        .args(["run", "--config", p(&config), "--split-by", "method"])
        .env("HISTCTX_OUT", &elsewhere)
        .output()
        .unwrap();
    assert!(
        moved.status.success(),
        "{}",
        String::from_utf8_lossy(&moved.stderr)
    );
    assert!(elsewhere.join("matrix.json").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = histctx(&[
        "mine",
        "--repo",
        p(dir.path()),
        "--out",
        p(&dir.path().join("c.jsonl")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Error"));
    assert!(!histctx(&["report", "--matrix", p(dir.path())])
        .status
        .success());
    assert!(!histctx(&["demo", "--informativeness", "2"])
        .status
        .success());
    assert!(
        !histctx(&["report", "--matrix", p(dir.path()), "--format", "xml"])
            .status
            .success()
    );
}

#[test]
fn random_fixture_mines() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    let said = ok(&["fixture", "--seed", "12", "--out", p(&repo)]);
    assert!(said.contains("commits in"));
    let corpus = dir.path().join("c.jsonl");
    ok(&[
        "mine",
        "--repo",
        p(&repo),
        "--out",
        p(&corpus),
        "--project",
        "rnd",
    ]);
    let stats = ok(&["stats", "--corpus", p(&corpus)]);
    assert!(stats.lines().nth(1).unwrap().starts_with("rnd"));
}
