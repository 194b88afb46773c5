"""Embedding-driven topic pipeline: reduce, density-cluster, weight terms.

Documents are clustered in a reduced embedding space, each cluster's
documents are concatenated into one class document, and terms are scored
with class-based TF-IDF: W(t, c) = tf(t, c) * ln(1 + A / f(t)) where A is
the average token count per class and f(t) the term's total count over all
classes.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import EmbeddedCorpus, TokenizedCorpus
from .density_cluster import hdbscan_labels
from .manifold import LayoutConfig, umap_reduce
from .rng import stage_seed

__all__ = [
    "TopicAssignment",
    "ClassTermMatrix",
    "TopicWords",
    "cluster_documents",
    "ctfidf",
    "top_topic_words",
]

OUTLIER = -1


@dataclass
class TopicAssignment:
    """Per-document topic id (>= 0) or -1 for outliers."""

    labels: np.ndarray
    membership: np.ndarray | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    @property
    def n_topics(self) -> int:
        return int(self.labels.max()) + 1 if np.any(self.labels >= 0) else 0

    def topic_sizes(self) -> dict[int, int]:
        return {t: int(np.sum(self.labels == t)) for t in range(self.n_topics)}


@dataclass
class ClassTermMatrix:
    topics: list[int]
    vocabulary: dict[str, int]
    weights: np.ndarray  # (n_topics, n_terms)
    term_frequencies: np.ndarray  # (n_topics, n_terms) raw tf per class
    class_token_totals: np.ndarray  # (n_topics,)
    class_doc_counts: np.ndarray  # (n_topics,)
    term_corpus_freq: np.ndarray  # (n_terms,)


@dataclass
class TopicWords:
    """Per topic, (term, weight) descending by weight, ties lexicographic."""

    words: dict[int, list[tuple[str, float]]]
    sizes: dict[int, int]


def cluster_documents(
    corpus: EmbeddedCorpus,
    n_neighbors: int,
    n_components: int,
    min_cluster_size: int,
    min_samples: int | None = None,
    seed: int = 42,
    n_epochs: int = 500,
    metric: str = "cosine",
    parallel: bool = False,
) -> TopicAssignment:
    """Reduce document vectors (cosine metric) and density-cluster them."""
    n = len(corpus)
    if n < n_neighbors + 1:
        raise ValueError(
            f"corpus of {n} documents too small for n_neighbors={n_neighbors}"
        )
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    if min_samples is not None and min_samples < 1:
        raise ValueError("min_samples must be >= 1")
    cfg = LayoutConfig(
        n_components=n_components,
        seed=stage_seed(seed, "topics:umap"),
        n_epochs=n_epochs,
        parallel=parallel,
    )
    reduced = umap_reduce(corpus.vectors, n_neighbors, cfg, metric=metric)
    result = hdbscan_labels(reduced.coordinates, min_cluster_size, min_samples)
    return TopicAssignment(labels=result.labels, membership=result.membership)


def ctfidf(tokens: TokenizedCorpus, assignment: TopicAssignment,
           normalize: bool = False) -> ClassTermMatrix:
    """Class-based TF-IDF weights; outlier documents are excluded.

    normalize=True divides tf by the class token total before weighting
    (variant kept behind a flag; the default uses raw counts).
    """
    if len(tokens.docs) != len(assignment.labels):
        raise ValueError("tokens and assignment are not aligned")
    topics = sorted({int(t) for t in assignment.labels if t != OUTLIER})
    if not topics:
        raise ValueError("no non-outlier documents")
    class_counts = {t: Counter() for t in topics}
    class_docs = {t: 0 for t in topics}
    for toks, label in zip(tokens.docs, assignment.labels):
        if label == OUTLIER:
            continue
        class_counts[int(label)].update(toks)
        class_docs[int(label)] += 1

    vocab: dict[str, int] = {}
    for t in topics:
        for term in class_counts[t]:
            if term not in vocab:
                vocab[term] = len(vocab)

    n_topics, n_terms = len(topics), len(vocab)
    tf = np.zeros((n_topics, n_terms))
    for row, t in enumerate(topics):
        for term, count in class_counts[t].items():
            tf[row, vocab[term]] = count
    class_totals = tf.sum(axis=1)
    term_freq = tf.sum(axis=0)
    avg_tokens = class_totals.sum() / n_topics

    with np.errstate(divide="ignore", invalid="ignore"):
        idf = np.log1p(np.where(term_freq > 0, avg_tokens / term_freq, 0.0))
    base = tf / class_totals[:, None] if normalize else tf
    weights = base * idf[None, :]
    return ClassTermMatrix(
        topics=topics,
        vocabulary=vocab,
        weights=weights,
        term_frequencies=tf,
        class_token_totals=class_totals,
        class_doc_counts=np.array([class_docs[t] for t in topics]),
        term_corpus_freq=term_freq,
    )


def top_topic_words(matrix: ClassTermMatrix, top_n: int = 10) -> TopicWords:
    """Highest-weight terms per topic; zero-weight terms never appear."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    inv_vocab = {i: t for t, i in matrix.vocabulary.items()}
    words: dict[int, list[tuple[str, float]]] = {}
    for row, topic in enumerate(matrix.topics):
        scored = [
            (inv_vocab[col], float(w))
            for col, w in enumerate(matrix.weights[row])
            if w > 0
        ]
        scored.sort(key=lambda kv: (-kv[1], kv[0]))
        words[topic] = scored[:top_n]
    sizes = {t: int(c) for t, c in zip(matrix.topics, matrix.class_doc_counts)}
    return TopicWords(words=words, sizes=sizes)
