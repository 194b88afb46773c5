"""Nonlinear dimensionality reduction over a fuzzy neighborhood graph.

The stages mirror the standard manifold-projection recipe: exact k-nearest
neighbors, per-point bandwidth calibration into a fuzzy graph, and a
stochastic attract/repel layout of the graph in the output space. Everything
is deterministic for a fixed seed in sequential mode; initialization is the
scaled principal-component projection rather than a spectral embedding, so
runs are reproducible without a sparse eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import _layout

__all__ = [
    "KnnGraph",
    "FuzzyGraph",
    "LayoutConfig",
    "LowDimEmbedding",
    "CurveFit",
    "knn_exact",
    "build_fuzzy_graph",
    "probabilistic_union",
    "fit_ab",
    "optimize_layout",
    "umap_reduce",
    "pairwise_distances",
]

SMOOTH_K_TOLERANCE = 1e-5


@dataclass
class KnnGraph:
    """Per point, the k nearest other points sorted ascending by distance."""

    k: int
    indices: np.ndarray  # (n, k) int
    distances: np.ndarray  # (n, k) float

    def __post_init__(self):
        n = self.indices.shape[0]
        if self.indices.shape != (n, self.k) or self.distances.shape != (n, self.k):
            raise ValueError("knn arrays must have shape (n, k)")
        if np.any(self.indices == np.arange(n)[:, None]):
            raise ValueError("self-neighbor in knn graph")
        if np.any(self.distances < 0) or np.any(np.diff(self.distances, axis=1) < 0):
            raise ValueError("knn distances must be nonnegative and sorted")

    @property
    def n(self) -> int:
        return self.indices.shape[0]


@dataclass
class FuzzyGraph:
    """Symmetric weighted graph, weights in (0, 1], stored once per edge i<j."""

    n: int
    edges: np.ndarray  # (m, 2) int, each row i < j
    weights: np.ndarray  # (m,) float

    def __post_init__(self):
        if np.any(self.weights <= 0) or np.any(self.weights > 1):
            raise ValueError("fuzzy weights must lie in (0, 1]")

    def weight(self, i: int, j: int) -> float:
        a, b = (i, j) if i < j else (j, i)
        mask = (self.edges[:, 0] == a) & (self.edges[:, 1] == b)
        hit = np.nonzero(mask)[0]
        return float(self.weights[hit[0]]) if len(hit) else 0.0


@dataclass
class LayoutConfig:
    n_components: int = 2
    min_dist: float = 0.1
    spread: float = 1.0
    a: float | None = None
    b: float | None = None
    n_epochs: int = 500
    negative_sample_rate: int = 5
    seed: int = 42
    repulsion_strength: float = 1.0
    initial_alpha: float = 1.0
    parallel: bool = False

    def __post_init__(self):
        if self.n_components < 1:
            raise ValueError("n_components must be positive")
        if self.spread <= 0:
            raise ValueError("spread must be positive")
        if self.min_dist < 0 or self.min_dist >= 4.0 * self.spread:
            raise ValueError("min_dist must satisfy 0 <= min_dist < 4*spread")
        if self.n_epochs < 0:
            raise ValueError("n_epochs must be nonnegative")
        if self.negative_sample_rate < 1:
            raise ValueError("negative_sample_rate must be positive")
        for name in ("a", "b"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive")

    def resolved(self) -> "LayoutConfig":
        """Fill in curve parameters (a, b) from (min_dist, spread) if unset."""
        if self.a is not None and self.b is not None:
            return self
        fit = fit_ab(self.min_dist, self.spread)
        return replace(self, a=fit.a, b=fit.b)


@dataclass
class LowDimEmbedding:
    coordinates: np.ndarray  # (n, n_components)

    def __post_init__(self):
        self.coordinates = np.asarray(self.coordinates, dtype=np.float64)
        if not np.all(np.isfinite(self.coordinates)):
            raise ValueError("embedding coordinates must be finite")

    @property
    def n(self) -> int:
        return self.coordinates.shape[0]

    def save(self, path, ids: list[str] | None = None,
             format: str = "jsonl") -> None:
        """Write the layout as a corpus vector file (JSONL by default)."""
        from .corpus import Document, EmbeddedCorpus, save_corpus

        if ids is None:
            ids = [str(i) for i in range(self.n)]
        corpus = EmbeddedCorpus(
            dim=self.coordinates.shape[1],
            docs=[Document(id=i) for i in ids],
            vectors=self.coordinates.astype(np.float32),
        )
        save_corpus(corpus, path, format)


class CurveFit(NamedTuple):
    a: float
    b: float
    converged: bool


# ---------------------------------------------------------------------------
# k-nearest neighbors
# ---------------------------------------------------------------------------

def pairwise_distances(vectors: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Dense (n, n) distance matrix, euclidean or cosine."""
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if metric == "euclidean":
        out = np.empty((n, n))
        step = 256
        for start in range(0, n, step):
            stop = min(start + step, n)
            diff = x[start:stop, None, :] - x[None, :, :]
            out[start:stop] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return out
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        norms = np.where(norms > 0, norms, 1e-30)
        sim = (x @ x.T) / np.outer(norms, norms)
        return np.clip(1.0 - sim, 0.0, 2.0)
    raise ValueError(f"unknown metric {metric!r}")


def knn_exact(vectors: np.ndarray, k: int, metric: str = "euclidean") -> KnnGraph:
    """Exact k nearest neighbors; ties broken by lower point index."""
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    d = pairwise_distances(x, metric)
    np.fill_diagonal(d, np.inf)
    idx_cols = np.broadcast_to(np.arange(n), (n, n))
    order = np.lexsort((idx_cols, d), axis=1)[:, :k]
    dists = np.take_along_axis(d, order, axis=1)
    return KnnGraph(k=k, indices=order.astype(np.int64), distances=dists)


# ---------------------------------------------------------------------------
# Fuzzy graph construction
# ---------------------------------------------------------------------------

def _smooth_knn(distances: np.ndarray, k: int, local_connectivity: float,
                n_iter: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Per-point (rho, sigma): rho is the local-connectivity distance, sigma
    solves sum_j exp(-max(0, d_ij - rho)/sigma) = log2(k) by bisection within
    [1e-3 * mean distance, max distance]."""
    n = distances.shape[0]
    target = math.log2(k)
    rho = np.zeros(n)
    sigma = np.ones(n)
    mean_dist = float(np.mean(distances))
    lo_clamp = 1e-3 * mean_dist
    hi_clamp = float(np.max(distances))
    for i in range(n):
        nz = distances[i][distances[i] > 0.0]
        if nz.shape[0] >= local_connectivity:
            index = int(math.floor(local_connectivity))
            interp = local_connectivity - index
            if index > 0:
                rho[i] = nz[index - 1]
                if interp > SMOOTH_K_TOLERANCE and index < nz.shape[0]:
                    rho[i] += interp * (nz[index] - nz[index - 1])
            else:
                rho[i] = interp * nz[0]
        elif nz.shape[0] > 0:
            rho[i] = float(np.max(nz))

        if hi_clamp <= 0.0:
            sigma[i] = 1.0
            continue

        def mass(s: float) -> float:
            gaps = np.maximum(distances[i] - rho[i], 0.0)
            return float(np.sum(np.exp(-gaps / s)))

        lo, hi = lo_clamp, hi_clamp
        if mass(hi) < target:
            sigma[i] = hi
        elif mass(lo) > target:
            sigma[i] = lo
        else:
            for _ in range(n_iter):
                mid = 0.5 * (lo + hi)
                if mass(mid) > target:
                    hi = mid
                else:
                    lo = mid
            sigma[i] = 0.5 * (lo + hi)
    return rho, sigma


def probabilistic_union(w1: float, w2: float) -> float:
    """Fuzzy-union of two directed memberships: w1 + w2 - w1*w2."""
    return min(w1 + w2 - w1 * w2, 1.0)


def build_fuzzy_graph(knn: KnnGraph, local_connectivity: float = 1.0) -> FuzzyGraph:
    """Fuzzy membership graph from a knn graph.

    Directed weights w = exp(-max(0, d - rho)/sigma) are symmetrized with the
    probabilistic union, which keeps symmetry exact and every weight within
    (0, 1]. Each point's nearest neighbor edge has directed weight 1, so
    local connectivity is preserved.
    """
    n, k = knn.n, knn.k
    rho, sigma = _smooth_knn(knn.distances, k, local_connectivity)
    directed: dict[tuple[int, int], float] = {}
    for i in range(n):
        for pos in range(k):
            j = int(knn.indices[i, pos])
            gap = max(knn.distances[i, pos] - rho[i], 0.0)
            w = 1.0 if gap <= 0.0 else math.exp(-gap / sigma[i])
            directed[(i, j)] = w
    merged: dict[tuple[int, int], float] = {}
    for (i, j), w1 in directed.items():
        key = (i, j) if i < j else (j, i)
        if key in merged:
            continue
        w2 = directed.get((j, i), 0.0)
        if (i, j) != key:
            w1, w2 = w2, w1
        merged[key] = probabilistic_union(w1, w2)
    keys = sorted(merged)
    edges = np.array(keys, dtype=np.int64).reshape(len(keys), 2)
    weights = np.array([merged[key] for key in keys])
    return FuzzyGraph(n=n, edges=edges, weights=weights)


# ---------------------------------------------------------------------------
# Output-curve calibration
# ---------------------------------------------------------------------------

def _curve_residuals(a: float, b: float, x: np.ndarray, y: np.ndarray):
    xb = x ** (2.0 * b)
    denom = 1.0 + a * xb
    f = 1.0 / denom
    r = f - y
    da = -xb / denom**2
    db = -2.0 * a * xb * np.log(x) / denom**2
    return r, np.column_stack([da, db])


def fit_ab(min_dist: float, spread: float) -> CurveFit:
    """Least-squares (a, b) so 1/(1 + a x^(2b)) tracks the target curve
    (1 below min_dist, shifted exponential decay above).

    Levenberg-Marquardt from (1, 1), at most 200 iterations over 300 grid
    points in (0, 3*spread]. Non-convergence returns the best iterate with
    converged=False.
    """
    if spread <= 0:
        raise ValueError("spread must be positive")
    x = 3.0 * spread * np.arange(1, 301) / 300.0
    y = np.where(x < min_dist, 1.0, np.exp(-(x - min_dist) / spread))
    a, b = 1.0, 1.0
    lam = 1e-3
    r, jac = _curve_residuals(a, b, x, y)
    cost = float(r @ r)
    converged = False
    for _ in range(200):
        jtj = jac.T @ jac
        g = jac.T @ r
        try:
            delta = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj)), -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        a_new = max(a + delta[0], 1e-8)
        b_new = max(b + delta[1], 1e-8)
        r_new, jac_new = _curve_residuals(a_new, b_new, x, y)
        cost_new = float(r_new @ r_new)
        if cost_new < cost:
            if abs(cost - cost_new) <= 1e-14 * (1.0 + cost):
                a, b, cost = a_new, b_new, cost_new
                converged = True
                break
            a, b, r, jac, cost = a_new, b_new, r_new, jac_new, cost_new
            lam = max(lam / 3.0, 1e-12)
        else:
            lam *= 2.0
            if lam > 1e12:
                break
    return CurveFit(a=float(a), b=float(b), converged=converged)


# ---------------------------------------------------------------------------
# Layout optimization
# ---------------------------------------------------------------------------

def _make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    # an edge of weight w is visited ~ n_epochs * w / max(w) times
    return float(np.max(weights)) / weights


def optimize_layout(graph: FuzzyGraph, init: np.ndarray,
                    cfg: LayoutConfig) -> LowDimEmbedding:
    """Stochastic attract/repel refinement of init over the fuzzy graph.

    Edges are sampled proportionally to weight via epoch scheduling; each
    positive sample triggers negative_sample_rate uniformly drawn repulsion
    partners. The learning rate decays linearly to zero and per-component
    gradients are clipped to [-4, 4].
    """
    init = np.asarray(init, dtype=np.float64)
    if init.shape != (graph.n, cfg.n_components):
        raise ValueError(
            f"init shape {init.shape} != ({graph.n}, {cfg.n_components})"
        )
    if not np.all(np.isfinite(init)):
        raise ValueError("init must be finite")
    if len(graph.weights) == 0:
        raise ValueError("graph has no edges")
    embedding = init.copy()
    if cfg.n_epochs == 0:
        return LowDimEmbedding(coordinates=embedding)
    cfg = cfg.resolved()
    # both directions of every undirected edge take part in scheduling
    head = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
    tail = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
    weights = np.concatenate([graph.weights, graph.weights])
    order = np.lexsort((tail, head))
    head, tail, weights = head[order], tail[order], weights[order]
    _layout.run_layout(
        embedding, head, tail, _make_epochs_per_sample(weights, cfg.n_epochs),
        cfg.n_epochs, cfg.a, cfg.b, cfg.repulsion_strength,
        cfg.negative_sample_rate, cfg.initial_alpha, cfg.seed,
        parallel=cfg.parallel,
    )
    return LowDimEmbedding(coordinates=embedding)


def _pca_init(vectors: np.ndarray, n_components: int) -> np.ndarray:
    x = np.asarray(vectors, dtype=np.float64)
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    avail = min(n_components, vt.shape[0])
    comps = vt[:avail]
    # deterministic sign: largest-magnitude loading positive
    for c in range(avail):
        pivot = int(np.argmax(np.abs(comps[c])))
        if comps[c, pivot] < 0:
            comps[c] = -comps[c]
    scores = centered @ comps.T
    if avail < n_components:
        scores = np.column_stack(
            [scores, np.zeros((x.shape[0], n_components - avail))]
        )
    out = np.zeros_like(scores)
    for axis in range(scores.shape[1]):
        col = scores[:, axis]
        lo, hi = float(col.min()), float(col.max())
        if hi > lo:
            out[:, axis] = -10.0 + 20.0 * (col - lo) / (hi - lo)
    return out


def umap_reduce(vectors: np.ndarray, n_neighbors: int, cfg: LayoutConfig,
                metric: str = "euclidean") -> LowDimEmbedding:
    """knn -> fuzzy graph -> PCA init scaled to [-10, 10] -> layout."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.shape[0] < n_neighbors + 1:
        raise ValueError(
            f"need at least n_neighbors + 1 = {n_neighbors + 1} points, got {x.shape[0]}"
        )
    knn = knn_exact(x, n_neighbors, metric)
    graph = build_fuzzy_graph(knn)
    init = _pca_init(x, cfg.n_components)
    return optimize_layout(graph, init, cfg)
