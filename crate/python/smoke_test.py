"""Smoke test for the regomax Python extension.

Build the module first, e.g. ``maturin develop -m crates/py/Cargo.toml`` or
copy ``target/release/libregomax_py.so`` to ``regomax.so`` on PYTHONPATH.
"""

import json
import math
import tempfile

import regomax


def close(a, b, tol=1e-9):
    return abs(a - b) < tol


def main():
    chain = regomax.Graph(2, [(0, 1)])
    pr = regomax.pagerank(chain)
    assert pr.converged
    assert close(pr.probabilities[0], 0.5 / 1.425)
    assert pr.ordering == [1, 0]

    star = regomax.Graph(4, [(0, 1), (0, 2), (0, 3)])
    cr = regomax.cheirank(star)
    assert cr.ordering[0] == 0

    assert regomax.two_d_rank([1, 0], [0, 1]) == [1, 0]
    assert regomax.overlap_curve(list("abcd"), list("bade"), 4) == [0.0, 1.0, 2 / 3, 0.75]

    edges = [(i, (i * 7 + k) % 40) for i in range(40) for k in (1, 3, 11) if (i * 7 + k) % 40 != i]
    names = [f"n{i}" for i in range(40)]
    graph = regomax.Graph(40, edges, labels=names)
    reduced = regomax.ReducedMatrix.compute(graph, ["n0", "n5", "n17", "n23"])
    for j in range(4):
        assert close(sum(row[j] for row in reduced.g_r), 1.0, 1e-8)
    w = reduced.weights()
    assert close(w["rr"] + w["pr"] + w["qr"], 1.0, 1e-8)
    assert 0.0 < reduced.lambda_c < 1.0

    with tempfile.TemporaryDirectory() as tmp:
        reduced.export(tmp)
        again = regomax.ReducedMatrix.load(tmp)
        assert again.names == reduced.names
        assert again.reduced_pagerank == reduced.reduced_pagerank

    sens = regomax.sensitivity(reduced, "n0", ["n5"])
    assert len(sens) == 1 and math.isfinite(sens[0]["diagonal"])

    scores = regomax.theta_scores([("EN", ["a", "b"]), ("FR", ["b"])], k_top=100)
    assert scores[0] == ("b", 199, 2)

    groups = {"n0": "A", "n5": "A", "n17": "B", "n23": "B"}
    doc = json.loads(regomax.friendship_network(reduced, groups, ["n0", "n17"], f=2))
    assert doc["format"] == "friendship/1"
    assert {n["name"] for n in doc["nodes"]} <= set(groups)

    print("python smoke test passed")


if __name__ == "__main__":
    main()
