"""Hierarchical density clustering with outlier labeling.

Pipeline: per-point core distances -> minimum spanning tree under the
mutual-reachability metric -> condensed cluster hierarchy -> excess-of-mass
cluster extraction. Everything runs on a dense distance matrix (desk-scale
inputs), so results are exact and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .manifold import pairwise_distances

__all__ = [
    "Mst",
    "CondensedTree",
    "ClusterLabels",
    "core_distances",
    "mutual_reachability_mst",
    "condense_tree",
    "extract_clusters",
    "hdbscan_labels",
]


@dataclass
class Mst:
    """Spanning tree edges (i, j, weight), n - 1 of them."""

    n: int
    edges: np.ndarray  # (n-1, 2) int
    weights: np.ndarray  # (n-1,) float

    def total_weight(self) -> float:
        return float(np.sum(self.weights))


@dataclass
class CondensedTree:
    """Condensed hierarchy rows (parent, child, lambda, child_size).

    Children with id < n_points are points falling out of their parent
    cluster at the given lambda; children >= n_points are cluster nodes
    born by a split. The root cluster has id n_points.
    """

    n_points: int
    parent: np.ndarray  # (m,) int
    child: np.ndarray  # (m,) int
    lam: np.ndarray  # (m,) float, 1/edge-weight at the event
    child_size: np.ndarray  # (m,) int

    @property
    def root(self) -> int:
        return self.n_points

    def cluster_ids(self) -> list[int]:
        ids = {self.root}
        ids.update(int(c) for c in self.child if c >= self.n_points)
        return sorted(ids)

    def cluster_birth(self) -> dict[int, float]:
        """Lambda at which each cluster node appears (0 for the root)."""
        births = {self.root: 0.0}
        for p, c, lam in zip(self.parent, self.child, self.lam):
            if c >= self.n_points:
                births[int(c)] = float(lam)
        return births

    def cluster_children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {cid: [] for cid in self.cluster_ids()}
        for p, c in zip(self.parent, self.child):
            if c >= self.n_points:
                kids[int(p)].append(int(c))
        return kids

    def cluster_nodes(self) -> list[dict]:
        """Node table: id, parent (-1 for root), birth/death lambdas, size."""
        births = self.cluster_birth()
        parent_of = {int(c): int(p) for p, c in zip(self.parent, self.child)
                     if c >= self.n_points}
        sizes = {int(c): int(s) for c, s in zip(self.child, self.child_size)
                 if c >= self.n_points}
        sizes[self.root] = self.n_points
        nodes = []
        for cid in self.cluster_ids():
            events = self.lam[self.parent == cid]
            death = float(np.max(events)) if len(events) else births[cid]
            nodes.append({
                "id": cid,
                "parent": parent_of.get(cid, -1),
                "lambda_birth": births[cid],
                "lambda_death": death,
                "size": sizes[cid],
            })
        return nodes

    def stability(self) -> dict[int, float]:
        """Excess-of-mass stability per cluster node.

        Every departure (point fall-out or child split) contributes
        (lambda_event - lambda_birth) * size; infinite birth lambdas
        contribute zero to avoid inf - inf.
        """
        births = self.cluster_birth()
        stab = {cid: 0.0 for cid in self.cluster_ids()}
        for p, lam, size in zip(self.parent, self.lam, self.child_size):
            birth = births[int(p)]
            if math.isinf(birth):
                continue
            stab[int(p)] += (float(lam) - birth) * int(size)
        return stab


@dataclass
class ClusterLabels:
    labels: np.ndarray  # (n,) int, -1 = outlier
    membership: np.ndarray  # (n,) float in [0, 1], 0 for outliers
    selected_nodes: list[int] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if np.any(self.labels >= 0) else 0


def core_distances(vectors: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance from each point to its min_samples-th nearest other point."""
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= min_samples < n:
        raise ValueError(f"min_samples must satisfy 1 <= min_samples < n={n}")
    d = pairwise_distances(x)
    np.fill_diagonal(d, np.inf)
    part = np.sort(d, axis=1)
    return part[:, min_samples - 1]


def mutual_reachability_mst(vectors: np.ndarray, core: np.ndarray) -> Mst:
    """Prim's MST over d*(a, b) = max(core_a, core_b, d(a, b)).

    The dense matrix is built once; ties resolve toward the lower point
    index, which fixes the edge list (total weight is tie-invariant).
    """
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    core = np.asarray(core, dtype=np.float64)
    d = pairwise_distances(x)
    dstar = np.maximum(d, np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(dstar, np.inf)

    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dstar[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    best[0] = np.inf
    edges = np.empty((n - 1, 2), dtype=np.int64)
    weights = np.empty(n - 1)
    for step in range(n - 1):
        v = int(np.argmin(best))  # argmin takes the lowest index on ties
        p = int(parent[v])
        edges[step] = (min(p, v), max(p, v))
        weights[step] = best[v]
        in_tree[v] = True
        improved = (dstar[v] < best) & ~in_tree
        best[improved] = dstar[v][improved]
        parent[improved] = v
        best[v] = np.inf
    return Mst(n=n, edges=edges, weights=weights)


def _single_linkage(mst: Mst):
    """Merge events as (left_id, right_id, distance) with new ids n, n+1, ..."""
    n = mst.n
    order = np.lexsort((mst.edges[:, 1], mst.edges[:, 0], mst.weights))
    uf_parent = np.arange(2 * n - 1, dtype=np.int64)
    size = np.ones(2 * n - 1, dtype=np.int64)
    size[n:] = 0

    def find(v: int) -> int:
        root = v
        while uf_parent[root] != root:
            root = uf_parent[root]
        while uf_parent[v] != root:
            uf_parent[v], v = root, uf_parent[v]
        return root

    merges = []
    nxt = n
    for e in order:
        i, j = int(mst.edges[e, 0]), int(mst.edges[e, 1])
        ri, rj = find(i), find(j)
        merges.append((ri, rj, float(mst.weights[e])))
        size[nxt] = size[ri] + size[rj]
        uf_parent[ri] = uf_parent[rj] = nxt
        nxt += 1
    return merges, size


def condense_tree(mst: Mst, min_cluster_size: int) -> CondensedTree:
    """Collapse the single-linkage dendrogram to min_cluster_size splits.

    Descending the dendrogram: a split where both sides hold at least
    min_cluster_size points creates two new cluster nodes; a smaller side
    spills its points out of the current cluster at lambda = 1/edge-weight.
    """
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    n = mst.n
    merges, size = _single_linkage(mst)
    children = {n + idx: (l, r, d) for idx, (l, r, d) in enumerate(merges)}

    def leaves(node: int):
        stack, out = [node], []
        while stack:
            v = stack.pop()
            if v < n:
                out.append(v)
            else:
                l, r, _ = children[v]
                stack.extend((r, l))
        return out

    root_sl = 2 * n - 2
    relabel = {root_sl: n}
    next_label = n + 1
    rows_parent, rows_child, rows_lam, rows_size = [], [], [], []

    def emit(parent, child, lam, csize):
        rows_parent.append(parent)
        rows_child.append(child)
        rows_lam.append(lam)
        rows_size.append(csize)

    stack = [root_sl] if n > 1 else []
    while stack:
        node = stack.pop()
        cluster = relabel[node]
        left, right, dist = children[node]
        lam = 1.0 / dist if dist > 0.0 else np.inf
        lsize = int(size[left]) if left >= n else 1
        rsize = int(size[right]) if right >= n else 1
        big_l, big_r = lsize >= min_cluster_size, rsize >= min_cluster_size
        if big_l and big_r:
            for side, ssize in ((left, lsize), (right, rsize)):
                relabel[side] = next_label
                emit(cluster, next_label, lam, ssize)
                next_label += 1
                if side >= n:
                    stack.append(side)
        else:
            for side, big in ((left, big_l), (right, big_r)):
                if big:
                    relabel[side] = cluster
                    if side >= n:
                        stack.append(side)
                else:
                    for leaf in leaves(side):
                        emit(cluster, leaf, lam, 1)
    if n == 1:
        emit(n, 0, np.inf, 1)
    return CondensedTree(
        n_points=n,
        parent=np.array(rows_parent, dtype=np.int64),
        child=np.array(rows_child, dtype=np.int64),
        lam=np.array(rows_lam, dtype=np.float64),
        child_size=np.array(rows_size, dtype=np.int64),
    )


def extract_clusters(tree: CondensedTree) -> ClusterLabels:
    """Excess-of-mass selection over the condensed tree.

    Bottom-up: a node is kept iff its stability is at least the summed
    selected stability of its children; the root competes like any other
    node, so a structureless corpus yields one all-inclusive cluster.
    Points falling out above every selected cluster are outliers. A point
    claimed by the root must additionally have stayed strictly past the
    root's first event (infinite-density fall-outs always qualify); this
    keeps a lone far point out of an otherwise solid cluster.
    """
    n = tree.n_points
    stability = tree.stability()
    kids = tree.cluster_children()
    selected: set[int] = set()
    subtree_value: dict[int, float] = {}
    for cid in sorted(stability, reverse=True):
        child_sum = sum(subtree_value[c] for c in kids[cid])
        own = stability[cid]
        if not kids[cid] or own >= child_sum:
            # drop any previously selected descendants
            drop = []
            stack = list(kids[cid])
            while stack:
                c = stack.pop()
                if c in selected:
                    drop.append(c)
                stack.extend(kids[c])
            selected.difference_update(drop)
            selected.add(cid)
            subtree_value[cid] = own
        else:
            subtree_value[cid] = child_sum

    parent_of = {int(c): int(p) for p, c in zip(tree.parent, tree.child) if c >= n}

    lam_point = np.zeros(n)
    fallout_parent = np.full(n, -1, dtype=np.int64)
    for p, c, lam in zip(tree.parent, tree.child, tree.lam):
        if c < n:
            fallout_parent[int(c)] = int(p)
            lam_point[int(c)] = float(lam)
    root_top_lambda = float(np.min(tree.lam)) if len(tree.lam) else np.inf

    owner = np.full(n, -1, dtype=np.int64)
    for point in range(n):
        node = int(fallout_parent[point])
        while node != -1:
            if node in selected:
                lam = lam_point[point]
                if node == tree.root and not (
                    lam > root_top_lambda or math.isinf(lam)
                ):
                    break
                owner[point] = node
                break
            node = parent_of.get(node, -1)

    # compact labels over clusters that actually kept members
    live = sorted(cid for cid in selected if np.any(owner == cid))
    cluster_of = {cid: idx for idx, cid in enumerate(live)}
    labels = np.full(n, -1, dtype=np.int64)
    membership = np.zeros(n)
    for cid, label in cluster_of.items():
        mask = owner == cid
        labels[mask] = label
        lam_max = float(np.max(lam_point[mask]))
        vals = lam_point[mask]
        if math.isinf(lam_max):
            membership[mask] = np.where(np.isinf(vals), 1.0, 0.0)
        elif lam_max > 0:
            membership[mask] = np.clip(vals / lam_max, 0.0, 1.0)
        else:
            membership[mask] = 1.0
    return ClusterLabels(labels=labels, membership=membership,
                         selected_nodes=sorted(selected))


def hdbscan_labels(vectors: np.ndarray, min_cluster_size: int,
                   min_samples: int | None = None) -> ClusterLabels:
    """Full pipeline on raw vectors; min_samples defaults to min_cluster_size."""
    if min_samples is None:
        min_samples = min_cluster_size
    x = np.asarray(vectors, dtype=np.float64)
    min_samples = min(min_samples, x.shape[0] - 1)
    core = core_distances(x, min_samples)
    mst = mutual_reachability_mst(x, core)
    tree = condense_tree(mst, min_cluster_size)
    return extract_clusters(tree)
