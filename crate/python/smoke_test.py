"""Smoke test for the histctx extension module.

Build first: pip install --no-build-isolation -e crates/py
"""

import json
import math
import tempfile
from pathlib import Path

import histctx


def put(i, k, cls):
    stmts = "".join(f"        a = a * {i + 2} + {s};\n" for s in range(k))
    text = f"int m{i}(int a) {{\n{stmts}        return a;\n    }}"
    return {"op": "put", "file": f"src/{cls}.java", "class": cls, "text": text}


def main():
    tmp = Path(tempfile.mkdtemp())
    spec = {
        "project": "demo",
        "commits": [
            {"time": 1_600_000_000, "edits": [put(i, 1, "A") for i in range(4)]},
            {"time": 1_600_000_000 + 5 * 86_400, "edits": [put(i, 3, "A") for i in range(2)]},
        ],
    }
    commits = histctx.synth_fixture(str(tmp / "repo"), 1, json.dumps(spec))
    assert len(commits) == 2

    corpus = tmp / "corpus.jsonl"
    assert histctx.mine(str(tmp / "repo"), "demo", str(corpus)) == 4
    print(histctx.corpus_stats(str(corpus)))

    enc = histctx.Encoder(str(corpus), dim=16)
    names = [m[2] for m in enc.methods()]
    assert names == sorted(names), names
    a, b = enc.encode(0), enc.encode(1)
    assert a.dim == 16 and len(enc.encode_code("int x = 1;")) == 16
    assert histctx.aggregate_pair(a, b, "vh", "concat") == histctx.aggregate_pair(b, a, "vh", "concat")
    assert len(histctx.aggregate_pair(a, b, "vh+days", "diff_concat")) == histctx.output_dim("diff_concat", "vh+days", 16)
    assert histctx.output_dim("concat", "vh+days", 128) == 257
    try:
        histctx.aggregate_single(a, "vh", "diff_concat")
        raise AssertionError("diff_concat on one method should fail")
    except ValueError:
        pass

    head = histctx.LinearHead("softmax", 3, 4, seed=2)
    probs = head.forward([0.1, -0.2, 0.3])
    assert math.isclose(sum(probs), 1.0)
    loss, gw, gb = head.loss_and_grad([[0.1, -0.2, 0.3]], [2])
    assert loss > 0 and len(gw) == 12 and len(gb) == 4

    assert f"{histctx.f1_score(0.913, 0.750):.3f}" == "0.824"
    assert histctx.pct_improvement(0.880, 0.824) == 7
    train, val, test = histctx.split_dataset(1679, 0)
    assert (len(train), len(val), len(test)) == (1343, 167, 169)

    try:
        histctx.mine(str(tmp), "x", str(tmp / "c.jsonl"))
        raise AssertionError("mining a non-repository should fail")
    except histctx.HistctxError:
        pass
    print("smoke test ok")


if __name__ == "__main__":
    main()
