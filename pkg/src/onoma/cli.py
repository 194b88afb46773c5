"""Command-line entry points binding the pipeline stages together.

All commands read a JSON config (flag overrides allowed), honor one global
seed, and write their artifacts under --out-dir with fixed names. With
--threads 1 every command is deterministic: rerunning a config produces
byte-identical files, SVGs included.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import behavioral_profile as bp
from . import corpus as corpus_mod
from . import hyperopt as ho
from .coherence import topic_npmi
from .sense_induction import induce_senses, profile_clusters
from .svg import SvgDocument, fmt
from .topic_model import cluster_documents, ctfidf, top_topic_words

EXIT_OK = 0
EXIT_STAGE = 1
EXIT_USAGE = 2


class StageError(Exception):
    def __init__(self, stage: str, message: str, code: int = EXIT_STAGE):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.code = code


def _require_file(stage: str, path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise StageError(stage, f"{what} not found: {p}", EXIT_USAGE)
    return p


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
                    encoding="utf-8")


def _load_config(path) -> dict:
    if path is None:
        return {}
    p = _require_file("config", path, "config file")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StageError("config", f"invalid JSON in {p}: {exc}", EXIT_USAGE)
    if not isinstance(cfg, dict):
        raise StageError("config", f"config root must be an object: {p}", EXIT_USAGE)
    return cfg


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise StageError("config", f"section {name!r} must be an object", EXIT_USAGE)
    return sec


# ---------------------------------------------------------------------------
# topic pipeline shared by `topics` and `optimize`
# ---------------------------------------------------------------------------

def _load_vectors(stage: str, sec: dict):
    path = sec.get("vectors")
    if not path:
        raise StageError(stage, "config needs a 'vectors' path", EXIT_USAGE)
    fmt_name = sec.get("format", "jsonl")
    p = _require_file(stage, path, "vector file")
    try:
        return corpus_mod.load_corpus(p, format=fmt_name)
    except corpus_mod.CorpusError as exc:
        raise StageError(stage, str(exc), EXIT_USAGE)


def _tokens_from_corpus(stage: str, corpus: corpus_mod.EmbeddedCorpus):
    docs = []
    for doc in corpus.docs:
        if doc.tokens is None:
            raise StageError(
                stage, f"document {doc.id!r} has no tokens; "
                "topic words need a tokenized corpus"
            )
        docs.append(doc.tokens)
    return corpus_mod.TokenizedCorpus.from_docs(docs)


def _run_topic_pipeline(corpus, tokens, params: dict, seed: int,
                        top_n: int, n_epochs: int, parallel: bool):
    assignment = cluster_documents(
        corpus,
        n_neighbors=int(params["n_neighbors"]),
        n_components=int(params["n_components"]),
        min_cluster_size=int(params["min_cluster_size"]),
        min_samples=int(params["min_samples"]) if params.get("min_samples") else None,
        seed=seed,
        n_epochs=n_epochs,
        parallel=parallel,
    )
    matrix = ctfidf(tokens, assignment)
    words = top_topic_words(matrix, top_n=top_n)
    score = topic_npmi(words, tokens, top_n=top_n)
    return assignment, words, score


def _topic_params(sec: dict) -> dict:
    return {
        "n_neighbors": sec.get("n_neighbors", 15),
        "n_components": sec.get("n_components", 5),
        "min_cluster_size": sec.get("min_cluster_size", 10),
        "min_samples": sec.get("min_samples"),
    }


def cmd_topics(cfg: dict, out_dir: Path, seed: int, threads: int) -> int:
    sec = _section(cfg, "topics")
    corpus = _load_vectors("topics", sec)
    tokens = _tokens_from_corpus("topics", corpus)
    params = _topic_params(sec)
    top_n = int(sec.get("top_n", 10))
    try:
        assignment, words, score = _run_topic_pipeline(
            corpus, tokens, params, seed, top_n,
            int(sec.get("n_epochs", 500)), threads > 1,
        )
    except (ValueError, RuntimeError) as exc:
        raise StageError("topics", str(exc))

    payload = [
        {
            "topic": t,
            "size": words.sizes[t],
            "words": [{"term": term, "weight": w} for term, w in words.words[t]],
        }
        for t in sorted(words.words)
    ]
    _dump_json(payload, out_dir / "topics.json")
    lines = ["id\tlabel\tmembership"]
    membership = (
        assignment.membership
        if assignment.membership is not None
        else np.zeros(len(assignment.labels))
    )
    for doc, label, member in zip(corpus.docs, assignment.labels, membership):
        lines.append(f"{doc.id}\t{int(label)}\t{float(member):.6f}")
    (out_dir / "assignments.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _dump_json(
        {
            "n_topics": assignment.n_topics,
            "n_outliers": int(np.sum(assignment.labels == -1)),
            "npmi": score,
            "params": {k: params[k] for k in params},
            "seed": seed,
        },
        out_dir / "metrics.json",
    )
    print(f"topics={assignment.n_topics} npmi={score:.6f}")
    return EXIT_OK


def cmd_optimize(cfg: dict, out_dir: Path, seed: int, threads: int) -> int:
    sec = {**_section(cfg, "topics"), **_section(cfg, "optimize")}
    corpus = _load_vectors("optimize", sec)
    tokens = _tokens_from_corpus("optimize", corpus)
    budget = int(sec.get("budget", 150))
    n_init = int(sec.get("n_init", 10))
    top_n = int(sec.get("top_n", 10))
    n_epochs = int(sec.get("n_epochs", 500))
    space_cfg = sec.get("space", {})
    try:
        space = ho.SearchSpace(
            **{k: tuple(v) for k, v in space_cfg.items()}
        ) if space_cfg else ho.SearchSpace()
    except (TypeError, ValueError) as exc:
        raise StageError("optimize", f"bad search space: {exc}", EXIT_USAGE)

    def objective(params: dict) -> float:
        _, _, score = _run_topic_pipeline(
            corpus, tokens, params, seed, top_n, n_epochs, threads > 1
        )
        return score

    history_path = out_dir / "history.jsonl"
    prior: list[ho.Trial] = []
    if history_path.is_file():
        for line in history_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            prior.append(ho.Trial(
                index=int(obj["index"]), params=dict(obj["params"]),
                score=float(obj["score"]), failed=bool(obj.get("failed", False)),
            ))
    try:
        best, history = ho.optimize(
            objective, space, budget=budget, n_init=n_init, seed=seed,
            history=prior,
        )
    except (ValueError, RuntimeError) as exc:
        raise StageError("optimize", str(exc))

    with open(history_path, "w", encoding="utf-8") as fh:
        for t in history:
            fh.write(json.dumps(
                {"index": t.index, "params": t.params, "score": t.score,
                 "failed": t.failed},
                sort_keys=True,
            ) + "\n")
    _dump_json(
        {"params": best.params, "score": best.score, "index": best.index},
        out_dir / "best.json",
    )
    print(f"trials={len(history)} best_npmi={best.score:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# senses
# ---------------------------------------------------------------------------

def _senses_svg(model) -> str:
    width = height = 520.0
    margin = 40.0
    pts = model.points
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)

    def to_canvas(p):
        x = margin + (p[0] - lo[0]) / span[0] * (width - 2 * margin)
        y = height - margin - (p[1] - lo[1]) / span[1] * (height - 2 * margin)
        return x, y

    palette = ["#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2"]
    doc = SvgDocument(width, height)
    doc.rect(0, 0, width, height, fill="white")
    for p, label in zip(pts, model.labels):
        x, y = to_canvas(p)
        doc.circle(x, y, 3.0, fill=palette[int(label) % len(palette)],
                   fill_opacity="0.75")
    if model.boundary is not None:
        w, b = model.boundary
        # draw w.x + b = 0 clipped to the data bounding box
        corners = []
        if abs(w[1]) > abs(w[0]) * 1e-12:
            for xv in (lo[0], hi[0]):
                yv = -(b + w[0] * xv) / w[1]
                if lo[1] - 1e-9 <= yv <= hi[1] + 1e-9:
                    corners.append((xv, yv))
        if abs(w[0]) > 0:
            for yv in (lo[1], hi[1]):
                xv = -(b + w[1] * yv) / w[0]
                if lo[0] - 1e-9 <= xv <= hi[0] + 1e-9:
                    corners.append((xv, yv))
        if len(corners) >= 2:
            (x1, y1), (x2, y2) = to_canvas(corners[0]), to_canvas(corners[1])
            doc.line(x1, y1, x2, y2, stroke="#333333", stroke_width="1.5",
                     stroke_dasharray="6,4")
    return doc.render()


def cmd_senses(cfg: dict, out_dir: Path, seed: int, threads: int) -> int:
    sec = _section(cfg, "senses")
    corpus = _load_vectors("senses", sec)
    k = int(sec.get("k", 2))
    n_neighbors = int(sec.get("n_neighbors", 15))
    top_n = int(sec.get("top_n", 5))
    try:
        model = induce_senses(corpus, k, n_neighbors=n_neighbors, seed=seed,
                              metric=sec.get("metric", "euclidean"))
    except (ValueError, RuntimeError) as exc:
        raise StageError("senses", str(exc))

    lines = ["id\tx\ty\tlabel"]
    for doc_id, p, label in zip(model.ids, model.points, model.labels):
        lines.append(f"{doc_id}\t{p[0]!r}\t{p[1]!r}\t{int(label)}")
    (out_dir / "senses.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {
        "k": model.k,
        "centroids": [[float(v) for v in c] for c in model.centroids],
        "boundary": None,
    }
    if model.boundary is not None:
        w, b = model.boundary
        sidecar["boundary"] = {"weights": [float(v) for v in w], "bias": float(b)}
    _dump_json(sidecar, out_dir / "sense_model.json")
    (out_dir / "senses.svg").write_text(_senses_svg(model), encoding="utf-8")

    objects_path = sec.get("objects")
    if objects_path:
        p = _require_file("senses", objects_path, "object annotation file")
        by_id = {}
        for line in p.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise StageError("senses", f"bad object annotation line: {line!r}",
                                 EXIT_USAGE)
            by_id[parts[0]] = parts[1]
        objects = [by_id.get(doc_id) for doc_id in model.ids]
        profile = profile_clusters(model, objects, top_n=top_n)
        payload = {
            str(c): {
                "share": float(profile.shares[c]),
                "share_percent": profile.share_percent(c),
                "top_objects": [[term, count] for term, count in profile.top_objects[c]],
            }
            for c in sorted(profile.shares)
        }
        _dump_json(payload, out_dir / "object_profile.json")
    print(f"senses={model.k}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# profile (correspondence analysis)
# ---------------------------------------------------------------------------

def cmd_profile(cfg: dict, out_dir: Path, seed: int, threads: int) -> int:
    sec = _section(cfg, "profile")
    table_path = sec.get("table")
    if not table_path:
        raise StageError("profile", "config needs a 'table' path", EXIT_USAGE)
    p = _require_file("profile", table_path, "profile table")
    try:
        table = bp.load_profile_table(p)
        ca = bp.correspondence_analysis(table)
    except ValueError as exc:
        raise StageError("profile", str(exc))

    _dump_json(
        {
            "row_names": ca.row_names,
            "col_names": ca.col_names,
            "row_masses": [float(v) for v in ca.row_masses],
            "col_masses": [float(v) for v in ca.col_masses],
            "singular_values": [float(v) for v in ca.singular_values],
            "row_principal": [[float(v) for v in row] for row in ca.row_principal],
            "col_principal": [[float(v) for v in row] for row in ca.col_principal],
            "row_standard": [[float(v) for v in row] for row in ca.row_standard],
            "col_standard": [[float(v) for v in row] for row in ca.col_standard],
            "inertia_shares": [float(v) for v in ca.inertia_shares],
            "total_inertia": ca.total_inertia,
        },
        out_dir / "ca.json",
    )
    report = bp.inertia_report(ca)
    lines = ["dimension,singular_value,inertia,share,cumulative"]
    for row in report:
        lines.append(
            f"{row['dimension']},{row['singular_value']!r},{row['inertia']!r},"
            f"{row['share']!r},{row['cumulative']!r}"
        )
    (out_dir / "inertia.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if ca.n_dims >= 1:
        style_cfg = sec.get("moon_plot", {})
        style = bp.MoonPlotStyle(**style_cfg) if style_cfg else bp.MoonPlotStyle()
        (out_dir / "moon_plot.svg").write_text(bp.moon_plot(ca, style),
                                               encoding="utf-8")
        cum = report[min(1, len(report) - 1)]["cumulative"]
        print(f"dims={ca.n_dims} cumulative_2d={cum:.6f}")
    else:
        print("dims=0 zero inertia; moon plot omitted")
    return EXIT_OK


# ---------------------------------------------------------------------------
# count / keywords
# ---------------------------------------------------------------------------

def cmd_count(cfg: dict, out_dir: Path, seed: int, threads: int) -> int:
    sec = _section(cfg, "count")
    inputs = sec.get("inputs")
    targets_path = sec.get("targets")
    if not inputs or not targets_path:
        raise StageError("count", "config needs 'inputs' and 'targets'", EXIT_USAGE)
    p = _require_file("count", targets_path, "targets file")
    targets_raw = json.loads(p.read_text(encoding="utf-8"))
    targets = {name: set(lemmas) for name, lemmas in targets_raw.items()}
    table = corpus_mod.FrequencyTable(rows={})
    try:
        for partition, path in inputs.items():
            tok_path = _require_file("count", path, f"token file for {partition!r}")
            tokens = corpus_mod.load_token_file(tok_path)
            table = table.merged(
                corpus_mod.count_targets(tokens, targets, partition=partition)
            )
    except corpus_mod.CorpusError as exc:
        raise StageError("count", str(exc), EXIT_USAGE)

    partitions = list(inputs)
    lines = ["target," + ",".join(partitions)]
    for name in targets:
        cells = [str(table.rows[part].get(name, 0)) for part in partitions]
        lines.append(f"{name}," + ",".join(cells))
    (out_dir / "counts.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"targets={len(targets)} partitions={len(partitions)}")
    return EXIT_OK


def cmd_keywords(cfg: dict, out_dir: Path, seed: int, threads: int) -> int:
    sec = _section(cfg, "keywords")
    target_path = sec.get("target")
    ref_path = sec.get("reference")
    if not target_path or not ref_path:
        raise StageError("keywords", "config needs 'target' and 'reference'",
                         EXIT_USAGE)
    min_doc_ratio = float(sec.get("min_doc_ratio", 0.0))
    try:
        target = corpus_mod.load_token_file(_require_file(
            "keywords", target_path, "target token file"))
        reference = corpus_mod.load_token_file(_require_file(
            "keywords", ref_path, "reference token file"))
        ranked = corpus_mod.extract_keywords(target, reference, min_doc_ratio)
    except corpus_mod.CorpusError as exc:
        raise StageError("keywords", str(exc), EXIT_USAGE)
    lines = ["term,keyness"]
    for term, keyness in ranked:
        lines.append(f"{term},{keyness!r}")
    (out_dir / "keywords.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"keywords={len(ranked)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "topics": cmd_topics,
    "optimize": cmd_optimize,
    "senses": cmd_senses,
    "profile": cmd_profile,
    "count": cmd_count,
    "keywords": cmd_keywords,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onoma",
        description="Corpus-semantics pipelines: topics, senses, profiles.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="global seed (default 42)")
    parser.add_argument("--threads", type=int, default=1,
                        help="intra-stage parallelism; 1 guarantees determinism")
    parser.add_argument("--out-dir", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 42))
        out_dir = Path(args.out_dir or cfg.get("out_dir", "out"))
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.threads < 1:
            raise StageError("config", "--threads must be >= 1", EXIT_USAGE)
        return _COMMANDS[args.command](cfg, out_dir, seed, args.threads)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
