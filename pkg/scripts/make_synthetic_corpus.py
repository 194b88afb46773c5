#!/usr/bin/env python3
"""Generate a synthetic planted-topic vector file plus a ready-to-run config.

The corpus has `--topics` direction-separated embedding blobs, each with its
own vocabulary, so `onoma topics` should recover the planted structure with
high adjusted Rand index and positive NPMI.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from onoma.corpus import Document, EmbeddedCorpus, save_corpus


def build(n_topics, per_topic, dim, seed, noise):
    rng = np.random.default_rng(seed)
    centers = np.zeros((n_topics, dim))
    span = max(dim // n_topics, 1)
    for t in range(n_topics):
        centers[t, (t * span) % dim:((t * span) % dim) + span] = 1.0
    shared = [f"shared{j}" for j in range(5)]
    docs, vecs = [], []
    for t in range(n_topics):
        vocab = [f"topic{t}word{j}" for j in range(6)]
        for i in range(per_topic):
            v = centers[t] + rng.normal(0, noise, dim)
            v /= np.linalg.norm(v)
            tokens = [str(w) for w in rng.choice(vocab, size=5)]
            tokens += [str(w) for w in rng.choice(shared, size=2)]
            docs.append(Document(id=f"d{t}-{i}", tokens=tokens))
            vecs.append(v)
    return EmbeddedCorpus(dim=dim, docs=docs,
                          vectors=np.array(vecs, dtype=np.float32))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--topics", type=int, default=4)
    parser.add_argument("--per-topic", type=int, default=45)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--noise", type=float, default=0.08)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out-dir", default="out/synthetic")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = build(args.topics, args.per_topic, args.dim, args.seed, args.noise)
    save_corpus(corpus, out / "vectors.jsonl", "jsonl")
    config = {
        "seed": 42,
        "topics": {
            "vectors": str(out / "vectors.jsonl"),
            "n_neighbors": 10,
            "n_components": 5,
            "min_cluster_size": max(args.per_topic // 4, 5),
        },
        "optimize": {"budget": 25, "n_init": 5},
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"wrote {out}/vectors.jsonl ({len(corpus)} documents) and config.json")
    print(f"try: onoma --config {out}/config.json --out-dir {out}/run topics")


if __name__ == "__main__":
    main()
