"""Normalized PMI topic coherence.

Co-occurrence is boolean at the document level (documents here are
sentence-sized, so no sliding window is needed): count(x) is the number of
documents containing x, joint(x, y) the number containing both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .corpus import TokenizedCorpus
from .topic_model import TopicWords

__all__ = ["CooccurrenceCounts", "npmi_pair", "topic_npmi"]

DEFAULT_EPS = 1e-12


@dataclass
class CooccurrenceCounts:
    n_docs: int
    counts: dict[str, int]
    joint: dict[tuple[str, str], int]

    @classmethod
    def from_corpus(cls, corpus: TokenizedCorpus,
                    terms: set[str] | None = None) -> "CooccurrenceCounts":
        counts: dict[str, int] = {}
        joint: dict[tuple[str, str], int] = {}
        for toks in corpus.docs:
            present = set(toks) if terms is None else set(toks) & terms
            for t in present:
                counts[t] = counts.get(t, 0) + 1
            for x, y in combinations(sorted(present), 2):
                joint[(x, y)] = joint.get((x, y), 0) + 1
        return cls(n_docs=len(corpus.docs), counts=counts, joint=joint)

    def pair_count(self, x: str, y: str) -> int:
        key = (x, y) if x <= y else (y, x)
        return self.joint.get(key, 0)


def npmi_pair(counts: CooccurrenceCounts, x: str, y: str,
              eps: float = DEFAULT_EPS) -> float:
    """NPMI of two terms, clamped to [-1, 1]; eps guards zero joints."""
    n = counts.n_docs
    cx, cy = counts.counts.get(x, 0), counts.counts.get(y, 0)
    if cx <= 0 or cy <= 0:
        raise ValueError(f"terms must have positive counts ({x!r}, {y!r})")
    p_x, p_y = cx / n, cy / n
    p_xy = counts.pair_count(x, y) / n
    val = math.log((p_xy + eps) / (p_x * p_y)) / -math.log(p_xy + eps)
    return min(1.0, max(-1.0, val))


def topic_npmi(topics: TopicWords, corpus: TokenizedCorpus,
               top_n: int = 10, eps: float = DEFAULT_EPS) -> float:
    """Mean over topics of the mean pairwise NPMI of each topic's top words.

    Words absent from the corpus are skipped; topics with fewer than two
    scoreable words are skipped; if no topic is scoreable the coherence is
    undefined and an error is raised.
    """
    if not corpus.docs:
        raise ValueError("corpus is empty")
    needed = {
        w
        for entries in topics.words.values()
        for w, _ in entries[:top_n]
    }
    counts = CooccurrenceCounts.from_corpus(corpus, terms=needed)
    topic_scores = []
    for entries in topics.words.values():
        scoreable = [w for w, _ in entries[:top_n] if counts.counts.get(w, 0) > 0]
        if len(scoreable) < 2:
            continue
        pair_scores = [
            npmi_pair(counts, x, y, eps) for x, y in combinations(scoreable, 2)
        ]
        topic_scores.append(sum(pair_scores) / len(pair_scores))
    if not topic_scores:
        raise ValueError("coherence undefined")
    return sum(topic_scores) / len(topic_scores)
