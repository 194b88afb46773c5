"""Word-sense induction over instance embeddings.

Instances of a word are reduced to 2-D, clustered with k-means (the number
of senses is chosen by the caller), and, for two senses, separated by a
soft-margin linear SVM drawn purely for visualization: the boundary never
relabels points. Per-cluster grammatical-object tallies summarize what each
usage cluster is about.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .corpus import EmbeddedCorpus
from .manifold import LayoutConfig, umap_reduce
from .rng import stage_rng, stage_seed

__all__ = [
    "SenseModel",
    "ObjectProfile",
    "kmeans",
    "linear_boundary",
    "induce_senses",
    "profile_clusters",
]


@dataclass
class SenseModel:
    points: np.ndarray  # (n, 2)
    labels: np.ndarray  # (n,) in 0..k-1
    centroids: np.ndarray  # (k, 2)
    boundary: tuple[np.ndarray, float] | None = None  # (w, b): w.x + b = 0
    ids: list[str] | None = None

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass
class ObjectProfile:
    """Per cluster: top object lemmas and the cluster's share of instances."""

    top_objects: dict[int, list[tuple[str, int]]]
    shares: dict[int, Fraction]

    def share_percent(self, cluster: int) -> int:
        return int(math.floor(float(self.shares[cluster]) * 100.0 + 0.5))


def _sse(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    return float(np.sum((points - centroids[labels]) ** 2))


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int) -> tuple[np.ndarray, np.ndarray, list[float]]:
    n = x.shape[0]
    # k-means++ seeding
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[int(rng.integers(n))]
    closest = np.sum((x - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(closest.sum())
        if total <= 0:
            centroids[c] = x[int(rng.integers(n))]
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r))
            centroids[c] = x[min(idx, n - 1)]
        closest = np.minimum(closest, np.sum((x - centroids[c]) ** 2, axis=1))

    labels = np.full(n, -1, dtype=np.int64)
    history: list[float] = []
    for _ in range(max_iter):
        d2 = np.sum((x[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)  # argmin keeps the lower index on ties
        for c in range(k):
            if not np.any(new_labels == c):
                dist_own = d2[np.arange(n), new_labels]
                thief = int(np.argmax(dist_own))
                new_labels[thief] = c
        for c in range(k):
            centroids[c] = x[new_labels == c].mean(axis=0)
        sse = _sse(x, new_labels, centroids)
        assert not history or sse <= history[-1] + 1e-9, "Lloyd SSE increased"
        history.append(sse)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels, centroids, history


def kmeans(points: np.ndarray, k: int, seed: int = 42, max_iter: int = 300,
           restarts: int = 10) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Best of `restarts` seeded k-means++/Lloyd runs (lowest final SSE).

    Each run iterates Lloyd to an assignment fixpoint or max_iter; an
    emptied cluster steals the point farthest from its current centroid.
    Returns (labels, centroids, sse_history) of the winning run; the
    history never increases within a run.
    """
    x = np.asarray(points, dtype=np.float64)
    if k > x.shape[0]:
        raise ValueError(f"k={k} exceeds number of points {x.shape[0]}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    for run in range(restarts):
        rng = stage_rng(seed, f"kmeans:{run}")
        labels, centroids, history = _lloyd(x, k, rng, max_iter)
        if best is None or history[-1] < best[2][-1]:
            best = (labels, centroids, history)
    return best


def _hinge_objective(x, y, w, b, lam):
    margins = 1.0 - y * (x @ w + b)
    return 0.5 * lam * float(w @ w) + float(np.mean(np.maximum(margins, 0.0)))


def linear_boundary(points: np.ndarray, labels: np.ndarray,
                    lam: float = 1e-3, epochs: int = 2000,
                    seed: int = 42, return_history: bool = False):
    """Soft-margin linear SVM by seeded subgradient descent.

    Per-sample updates with a 1/(1 + lam*t) step schedule; after each epoch
    the running average of the iterates is scored and the best-so-far
    average kept, so the recorded objective never increases and the returned
    hyperplane (w, b with w.x + b = 0) is the best iterate seen.
    Non-separable data simply yields the best soft-margin plane.
    """
    x = np.asarray(points, dtype=np.float64)
    lab = np.asarray(labels)
    classes = np.unique(lab)
    if len(classes) != 2:
        raise ValueError("linear_boundary needs exactly two classes")
    y = np.where(lab == classes[0], -1.0, 1.0)
    n, dim = x.shape
    rng = stage_rng(seed, "svm")
    w = np.zeros(dim)
    b = 0.0
    avg_w = np.zeros(dim)
    avg_b = 0.0
    best: tuple[float, np.ndarray, float] | None = None
    t = 0
    objective_history: list[float] = []
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (1.0 + lam * t)
            violating = y[i] * (x[i] @ w + b) < 1.0
            w *= 1.0 - eta * lam
            if violating:
                w += eta * y[i] * x[i]
                b += eta * y[i]
            avg_w += (w - avg_w) / t
            avg_b += (b - avg_b) / t
        obj = _hinge_objective(x, y, avg_w, avg_b, lam)
        if best is None or obj < best[0]:
            best = (obj, avg_w.copy(), avg_b)
        objective_history.append(best[0])
    _, w_out, b_out = best
    if return_history:
        return (w_out, float(b_out)), objective_history
    return w_out, float(b_out)


def induce_senses(corpus: EmbeddedCorpus, k: int,
                  umap_cfg: LayoutConfig | None = None,
                  n_neighbors: int = 15, seed: int = 42,
                  metric: str = "euclidean") -> SenseModel:
    """2-D reduction, k-means senses, and (for k = 2) a display boundary."""
    n = len(corpus)
    if n < k:
        raise ValueError(f"need at least k={k} instances, got {n}")
    if n < n_neighbors + 1:
        raise ValueError(
            f"need at least n_neighbors + 1 = {n_neighbors + 1} instances, got {n}"
        )
    if umap_cfg is None:
        umap_cfg = LayoutConfig(n_components=2, seed=stage_seed(seed, "senses:umap"))
    elif umap_cfg.n_components != 2:
        raise ValueError("sense induction reduces to 2 components")
    reduced = umap_reduce(corpus.vectors, n_neighbors, umap_cfg, metric=metric)
    labels, centroids, _ = kmeans(reduced.coordinates, k, seed=seed)
    boundary = None
    if k == 2:
        boundary = linear_boundary(reduced.coordinates, labels, seed=seed)
    return SenseModel(
        points=reduced.coordinates,
        labels=labels,
        centroids=centroids,
        boundary=boundary,
        ids=[doc.id for doc in corpus.docs],
    )


def profile_clusters(model: SenseModel, objects: list[str | None],
                     top_n: int = 5) -> ObjectProfile:
    """Top object lemmas per cluster plus each cluster's share of instances."""
    if len(objects) != len(model.labels):
        raise ValueError("objects are not aligned with model points")
    total = len(model.labels)
    top: dict[int, list[tuple[str, int]]] = {}
    shares: dict[int, Fraction] = {}
    for c in range(model.k):
        mask = model.labels == c
        counts = Counter(
            obj for obj, inside in zip(objects, mask) if inside and obj
        )
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        top[c] = ranked[:top_n]
        shares[c] = Fraction(int(mask.sum()), total)
    return ObjectProfile(top_objects=top, shares=shares)
