"""Acceptance suite: one test per release criterion.

Each test prints a single PASS/FAIL line (visible with `pytest -rA` or `-s`)
and asserts at the criterion's tolerance. Everything runs single-threaded
and seeded.
"""

import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import make_planted_corpus, make_two_sense_corpus
from onoma.behavioral_profile import ProfileTable, correspondence_analysis
from onoma.cli import main
from onoma.coherence import CooccurrenceCounts, npmi_pair, topic_npmi
from onoma.corpus import TokenizedCorpus, save_corpus
from onoma.density_cluster import (
    condense_tree,
    core_distances,
    extract_clusters,
    mutual_reachability_mst,
)
from onoma.hyperopt import PARAM_NAMES, SearchSpace, optimize
from onoma.rng import stage_rng
from onoma.sense_induction import induce_senses, kmeans, profile_clusters
from onoma.topic_model import TopicAssignment, cluster_documents, ctfidf, top_topic_words

from test_density_cluster import exhaustive_antichain_max, kruskal_oracle_weight
from test_sense_induction import exhaustive_min_sse


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: {status}{suffix}")
    assert ok, f"{name} failed{suffix}"


@pytest.fixture(scope="module")
def appendix_csv():
    from importlib import resources

    return str(resources.files("onoma").joinpath("data/appendix_profile.csv"))


def test_ca_fixture_reproduction(appendix_csv, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"profile": {"table": appendix_csv}}))
    out = tmp_path / "out"
    start = time.perf_counter()
    code = main(["--config", str(cfg), "--out-dir", str(out), "profile"])
    elapsed = time.perf_counter() - start
    ca = json.loads((out / "ca.json").read_text())
    sigmas = ca["singular_values"]
    cum2 = sum(ca["inertia_shares"][:2])
    ok = (
        code == 0
        and len(sigmas) == 2
        and all(s > 1e-12 for s in sigmas)
        and abs(cum2 - 1.0) <= 1e-9
        and elapsed < 1.0
    )
    report("ca-fixture-reproduction", ok,
           f"dims={len(sigmas)} cum2={cum2:.12f} runtime={elapsed:.3f}s")


def test_ca_hand_oracle():
    table = ProfileTable(
        rows=[("", "r1"), ("", "r2")], columns=["a", "b"],
        values=np.array([[2.0, 1.0], [1.0, 2.0]]),
    )
    ca = correspondence_analysis(table)
    sigma_ok = abs(ca.singular_values[0] - 1.0 / 3.0) <= 1e-12
    inertia_ok = abs(ca.total_inertia - 1.0 / 9.0) <= 1e-12
    x = table.values
    expected = np.outer(x.sum(1), x.sum(0)) / x.sum()
    chi2 = float(np.sum((x - expected) ** 2 / expected))
    chi_ok = abs(x.sum() * ca.total_inertia - chi2) <= 1e-12 and \
        abs(chi2 - 2.0 / 3.0) <= 1e-12
    report("ca-hand-oracle", sigma_ok and inertia_ok and chi_ok,
           f"sigma={ca.singular_values[0]!r} inertia={ca.total_inertia!r}")


def test_moon_plot_association(appendix_csv):
    from onoma.behavioral_profile import load_profile_table

    table = load_profile_table(appendix_csv)
    # independent oracle: numpy SVD of the standardized residuals
    x = table.values
    p = x / x.sum()
    r, c = p.sum(1), p.sum(0)
    s = (p - np.outer(r, c)) / np.sqrt(np.outer(r, c))
    u, sg, vt = np.linalg.svd(s, full_matrices=False)
    keep = sg > 1e-12
    u, sg, v = u[:, keep], sg[keep], vt[keep].T
    feat_std = u / np.sqrt(r)[:, None]
    word_pri = (v * sg) / np.sqrt(c)[:, None]

    def angle(vec):
        return math.atan2(vec[1], vec[0])

    def gap(a, b):
        return abs(math.remainder(a - b, 2 * math.pi))

    word_angles = {w: angle(word_pri[i, :2]) for i, w in enumerate(table.columns)}
    results = {}
    for tag in ("self-care", "social issue"):
        idx = next(i for i, (_, t) in enumerate(table.rows) if t == tag)
        fa = angle(feat_std[idx, :2])
        gaps = sorted((gap(word_angles[w], fa), w) for w in table.columns)
        results[tag] = (gaps[0][1], gaps[0][0] < gaps[1][0])
    # the toolkit's own CA must agree with the oracle's reading
    ca = correspondence_analysis(table)
    own_angles = {
        w: angle(ca.col_principal[i, :2]) for i, w in enumerate(ca.col_names)
    }
    own = {}
    for tag in ("self-care", "social issue"):
        idx = next(i for i, name in enumerate(ca.row_names) if name.endswith(tag))
        fa = angle(ca.row_standard[idx, :2])
        own[tag] = min(own_angles, key=lambda w: gap(own_angles[w], fa))
    ok = (
        results["self-care"] == ("shang", True)
        and results["social issue"] == ("harm", True)
        and own["self-care"] == "shang"
        and own["social issue"] == "harm"
    )
    report("moon-plot-association", ok, f"oracle={results} toolkit={own}")


def test_hdbscan_oracle_equivalence():
    rng = np.random.default_rng(2024)
    mst_ok = True
    for _ in range(200):
        n = int(rng.integers(5, 51))
        x = rng.normal(size=(n, int(rng.integers(1, 4))))
        ms = int(rng.integers(1, min(6, n)))
        core = core_distances(x, ms)
        mst = mutual_reachability_mst(x, core)
        if abs(mst.total_weight() - kruskal_oracle_weight(x, core)) > 1e-9:
            mst_ok = False
            break

    extract_ok = True
    checked = 0
    for trial in range(80):
        k = int(rng.integers(1, 4))
        centers = rng.uniform(0, 12, size=(k, 2))
        x = np.concatenate([
            rng.normal(cc, 0.4, size=(int(rng.integers(8, 20)), 2))
            for cc in centers
        ])
        core = core_distances(x, 3)
        tree = condense_tree(mutual_reachability_mst(x, core), 4)
        if len(tree.cluster_ids()) > 12:
            continue
        checked += 1
        res = extract_clusters(tree)
        stability = tree.stability()
        total = sum(stability[cid] for cid in res.selected_nodes)
        if not math.isclose(total, exhaustive_antichain_max(tree), rel_tol=1e-9):
            extract_ok = False
            break
    report("hdbscan-oracle-equivalence", mst_ok and extract_ok and checked >= 30,
           f"mst_ok={mst_ok} extract_ok={extract_ok} trees_checked={checked}")


def test_npmi_correctness():
    def counts(n, cx, cy, joint):
        return CooccurrenceCounts(n_docs=n, counts={"x": cx, "y": cy},
                                  joint={("x", "y"): joint})

    independence = npmi_pair(counts(100, 50, 50, 25), "x", "y")
    perfect = npmi_pair(counts(100, 25, 25, 25), "x", "y")
    hand = npmi_pair(counts(100, 40, 30, 20), "x", "y")
    hand_expected = math.log(5.0 / 3.0) / -math.log(0.2)
    rng = np.random.default_rng(1)
    bounded = True
    for _ in range(500):
        n = int(rng.integers(2, 300))
        cx = int(rng.integers(1, n + 1))
        cy = int(rng.integers(1, n + 1))
        joint = int(rng.integers(0, min(cx, cy) + 1))
        val = npmi_pair(counts(n, cx, cy, joint), "x", "y")
        if not -1.0 <= val <= 1.0:
            bounded = False
            break
    ok = (
        abs(independence) <= 1e-6
        and abs(perfect - 1.0) <= 1e-6
        and abs(hand - hand_expected) <= 1e-6
        and abs(hand - 0.3174) <= 5e-5
        and bounded
    )
    report("npmi-correctness", ok,
           f"indep={independence:.2e} perfect={perfect:.8f} hand={hand:.6f}")


def test_ctfidf_correctness():
    tokens = TokenizedCorpus.from_docs([["t", "t", "x", "x"], ["y"] * 6])
    matrix = ctfidf(tokens, TopicAssignment(labels=np.array([0, 1])))
    weight = matrix.weights[0, matrix.vocabulary["t"]]
    hand_ok = abs(weight - 2.0 * math.log(3.5)) <= 1e-9

    rng = np.random.default_rng(3)
    docs = [[f"w{rng.integers(6)}" for _ in range(4)] for _ in range(12)]
    labels = rng.integers(0, 3, size=12)
    perm = rng.permutation(12)
    m1 = ctfidf(TokenizedCorpus.from_docs(docs), TopicAssignment(labels=labels))
    m2 = ctfidf(TokenizedCorpus.from_docs([docs[i] for i in perm]),
                TopicAssignment(labels=labels[perm]))
    perm_ok = all(
        np.allclose(m1.weights[:, col], m2.weights[:, m2.vocabulary[term]])
        for term, col in m1.vocabulary.items()
    )
    report("ctfidf-correctness", hand_ok and perm_ok,
           f"weight={weight!r} expected={2.0 * math.log(3.5)!r}")


def test_kmeans_oracle():
    rng = np.random.default_rng(17)
    hits = 0
    monotone = True
    total = 500
    for trial in range(total):
        n = int(rng.integers(4, 13))
        dim = int(rng.integers(1, 3))
        pts = rng.normal(size=(n, dim))
        _, _, history = kmeans(pts, 2, seed=trial)
        if any(b > a + 1e-9 for a, b in zip(history, history[1:])):
            monotone = False
        if history[-1] <= exhaustive_min_sse(pts) + 1e-9:
            hits += 1
    rate = hits / total
    report("kmeans-oracle", rate >= 0.95 and monotone,
           f"optimal_rate={rate:.3f} monotone={monotone}")


def test_bayesian_optimization():
    space = SearchSpace()
    start = time.perf_counter()
    hits = 0
    worst = 0
    for seed in range(10):
        rng = stage_rng(seed, "acceptance:bo-target")
        opt = {}
        for name in PARAM_NAMES:
            lo, hi = getattr(space, name)
            opt[name] = int(rng.integers(lo, hi + 1))
        opt["min_samples"] = min(opt["min_samples"], opt["min_cluster_size"])
        u_opt = space.to_unit(opt)

        def objective(params, u_opt=u_opt):
            return -float(np.sum((space.to_unit(params) - u_opt) ** 2))

        best, history = optimize(objective, space, budget=150, n_init=10,
                                 seed=seed)
        steps = max(abs(best.params[n] - opt[n]) for n in PARAM_NAMES)
        worst = max(worst, steps)
        hits += steps <= 2
        assert len(history) == 150
    elapsed = time.perf_counter() - start
    report("bayesian-optimization", hits >= 9 and elapsed < 60.0,
           f"hits={hits}/10 worst_steps={worst} runtime={elapsed:.1f}s")


def test_end_to_end_topic_recovery(tmp_path):
    from sklearn.metrics import adjusted_rand_score

    corpus, truth = make_planted_corpus(per_topic=45, seed=7)
    save_corpus(corpus, tmp_path / "vectors.jsonl", "jsonl")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "seed": 42,
        "topics": {"vectors": str(tmp_path / "vectors.jsonl"),
                   "n_neighbors": 10, "n_components": 5,
                   "min_cluster_size": 10},
    }))
    out = tmp_path / "out"
    code = main(["--config", str(cfg), "--out-dir", str(out), "topics"])
    labels = np.array([
        int(line.split("\t")[1])
        for line in (out / "assignments.tsv").read_text().splitlines()[1:]
    ])
    ari = adjusted_rand_score(truth, labels)
    planted_npmi = json.loads((out / "metrics.json").read_text())["npmi"]

    tokens = TokenizedCorpus.from_docs([d.tokens for d in corpus.docs])
    rng = np.random.default_rng(0)
    shuffled = labels.copy()
    rng.shuffle(shuffled)
    random_words = top_topic_words(
        ctfidf(tokens, TopicAssignment(labels=shuffled)), 10
    )
    random_npmi = topic_npmi(random_words, tokens)
    ok = code == 0 and ari >= 0.9 and planted_npmi > random_npmi
    report("end-to-end-topic-recovery", ok,
           f"ari={ari:.3f} npmi={planted_npmi:.4f} random={random_npmi:.4f}")


def test_sense_induction_recovery():
    corpus, truth, objects = make_two_sense_corpus()
    model = induce_senses(corpus, 2, seed=9)
    purity = max(float(np.mean(model.labels == truth)),
                 float(np.mean(model.labels == 1 - truth)))
    w, b = model.boundary
    pred = (model.points @ w + b > 0).astype(int)
    agreement = max(float(np.mean(pred == model.labels)),
                    float(np.mean(pred == 1 - model.labels)))
    profile = profile_clusters(model, objects)
    percents = sorted(profile.share_percent(c) for c in profile.shares)
    percent_ok = all(isinstance(p, int) for p in percents) and sum(percents) == 100
    ok = purity >= 0.95 and agreement >= 0.95 and percent_ok
    report("sense-induction-recovery", ok,
           f"purity={purity:.3f} agreement={agreement:.3f} shares={percents}%")


def test_determinism_all_commands(tmp_path, appendix_csv):
    corpus, _ = make_planted_corpus(per_topic=30, seed=3)
    save_corpus(corpus, tmp_path / "vectors.jsonl", "jsonl")
    sense_corpus, _, objects = make_two_sense_corpus(per_sense=40)
    save_corpus(sense_corpus, tmp_path / "senses.jsonl", "jsonl")
    with open(tmp_path / "objects.tsv", "w") as fh:
        for doc, obj in zip(sense_corpus.docs, objects):
            fh.write(f"{doc.id}\t{obj}\n")
    with open(tmp_path / "tokens.jsonl", "w") as fh:
        for i, toks in enumerate((["shang", "shou"], ["bu", "shang"], ["hao"])):
            fh.write(json.dumps({"id": f"t{i}", "tokens": toks}) + "\n")
    (tmp_path / "targets.json").write_text(json.dumps({"shang": ["shang"]}))
    cfg = {
        "seed": 42,
        "topics": {"vectors": str(tmp_path / "vectors.jsonl"),
                   "n_neighbors": 8, "n_components": 4, "min_cluster_size": 8},
        "optimize": {"budget": 3, "n_init": 2,
                     "space": {"n_neighbors": [6, 10], "n_components": [3, 5],
                               "min_cluster_size": [6, 10],
                               "min_samples": [1, 10]}},
        "senses": {"vectors": str(tmp_path / "senses.jsonl"), "k": 2,
                   "n_neighbors": 8, "objects": str(tmp_path / "objects.tsv")},
        "profile": {"table": appendix_csv},
        "count": {"inputs": {"p": str(tmp_path / "tokens.jsonl")},
                  "targets": str(tmp_path / "targets.json")},
        "keywords": {"target": str(tmp_path / "tokens.jsonl"),
                     "reference": str(tmp_path / "tokens.jsonl")},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    mismatches = []
    for command in ("topics", "optimize", "senses", "profile", "count", "keywords"):
        snaps = []
        for run in ("a", "b"):
            out = tmp_path / f"{command}-{run}"
            code = main(["--config", str(cfg_path), "--threads", "1",
                         "--out-dir", str(out), command])
            assert code == 0, f"{command} exited {code}"
            snaps.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if snaps[0] != snaps[1]:
            mismatches.append(command)
    report("determinism", not mismatches, f"mismatches={mismatches or 'none'}")
