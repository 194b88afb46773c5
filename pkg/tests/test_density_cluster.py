import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onoma.density_cluster import (
    condense_tree,
    core_distances,
    extract_clusters,
    hdbscan_labels,
    mutual_reachability_mst,
)
from onoma.manifold import pairwise_distances


def kruskal_oracle_weight(x, core):
    """Total MST weight on the full mutual-reachability matrix, by Kruskal."""
    n = x.shape[0]
    d = pairwise_distances(x)
    dstar = np.maximum(d, np.maximum(core[:, None], core[None, :]))
    edges = sorted(
        (dstar[i, j], i, j) for i in range(n) for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    total, used = 0.0, 0
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            total += w
            used += 1
            if used == n - 1:
                break
    return total


def exhaustive_antichain_max(tree):
    """Maximum total stability over antichains of condensed cluster nodes."""
    stability = tree.stability()
    kids = tree.cluster_children()
    ids = sorted(stability)
    ancestors = {cid: set() for cid in ids}
    for parent, children in kids.items():
        stack = list(children)
        while stack:
            c = stack.pop()
            ancestors[c].add(parent)
            ancestors[c].update(ancestors[parent])
            stack.extend(kids[c])
    best = 0.0
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            chosen = set(combo)
            if any(ancestors[c] & chosen for c in combo):
                continue
            best = max(best, sum(stability[c] for c in combo))
    return best


class TestCoreDistances:
    def test_line_points(self):
        core = core_distances(np.array([[0.0], [1.0], [3.0]]), 1)
        assert core.tolist() == [1.0, 1.0, 2.0]

    def test_max_min_samples_gives_furthest(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 2))
        core = core_distances(x, 7)
        d = pairwise_distances(x)
        np.fill_diagonal(d, -np.inf)
        assert np.allclose(core, d.max(axis=1))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(50, 3))
        core = core_distances(x, 4)
        d = pairwise_distances(x)
        for i in range(50):
            others = sorted(d[i, j] for j in range(50) if j != i)
            assert core[i] == pytest.approx(others[3])

    def test_min_samples_bounds(self):
        with pytest.raises(ValueError):
            core_distances(np.zeros((3, 1)), 3)


class TestMst:
    def test_hand_computed_line(self):
        x = np.array([[0.0], [1.0], [3.0]])
        core = core_distances(x, 1)
        mst = mutual_reachability_mst(x, core)
        edges = {tuple(e) for e in mst.edges.tolist()}
        assert edges == {(0, 1), (1, 2)}
        assert mst.total_weight() == pytest.approx(3.0)

    def test_zero_cores_reduce_to_euclidean(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(20, 2))
        with_zero = mutual_reachability_mst(x, np.zeros(20))
        assert with_zero.total_weight() == pytest.approx(
            kruskal_oracle_weight(x, np.zeros(20))
        )

    def test_matches_kruskal_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(5, 50))
            x = rng.normal(size=(n, 3))
            core = core_distances(x, min(3, n - 1))
            mst = mutual_reachability_mst(x, core)
            assert mst.total_weight() == pytest.approx(
                kruskal_oracle_weight(x, core), abs=1e-9
            )

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_weight_invariant_under_permutation(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(25, 2))
        perm = rng.permutation(25)
        core = core_distances(x, 3)
        w1 = mutual_reachability_mst(x, core).total_weight()
        w2 = mutual_reachability_mst(x[perm], core[perm]).total_weight()
        assert w1 == pytest.approx(w2, rel=1e-12)


class TestCondenseTree:
    def test_two_blobs_split_into_two_nodes(self):
        rng = np.random.default_rng(42)
        x = np.concatenate([
            rng.normal(0, 0.3, size=(10, 2)),
            rng.normal(20, 0.3, size=(10, 2)),
        ])
        core = core_distances(x, 3)
        tree = condense_tree(mutual_reachability_mst(x, core), 5)
        root_children = [
            int(c) for p, c in zip(tree.parent, tree.child)
            if p == tree.root and c >= tree.n_points
        ]
        assert len(root_children) == 2

    def test_min_cluster_size_above_n_leaves_root_only(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 2))
        core = core_distances(x, 2)
        tree = condense_tree(mutual_reachability_mst(x, core), 20)
        assert tree.cluster_ids() == [tree.root]
        assert sorted(int(c) for c in tree.child) == list(range(8))

    def test_chain_gap_fallout_lambda(self):
        pts = np.array([[float(i)] for i in range(10)] + [[9.0 + 6.0]])
        core = core_distances(pts, 1)
        tree = condense_tree(mutual_reachability_mst(pts, core), 5)
        gap_rows = [
            (int(c), float(lam))
            for p, c, lam in zip(tree.parent, tree.child, tree.lam)
            if c == 10
        ]
        assert gap_rows == [(10, pytest.approx(1.0 / 6.0))]

    def test_min_cluster_size_validated(self):
        with pytest.raises(ValueError):
            condense_tree(mutual_reachability_mst(np.zeros((3, 1)), np.zeros(3)), 1)


class TestExtractClusters:
    def test_two_gaussian_blobs(self):
        rng = np.random.default_rng(42)
        x = np.concatenate([
            rng.normal(0, 0.5, size=(30, 2)),
            rng.normal(10, 0.5, size=(30, 2)),
        ])
        res = hdbscan_labels(x, 5)
        assert res.n_clusters == 2
        assert int(np.sum(res.labels == -1)) == 0

    def test_uniform_blob_selects_root(self):
        rng = np.random.default_rng(7)
        res = hdbscan_labels(rng.uniform(0, 1, size=(40, 2)), 5)
        assert res.n_clusters == 1

    def test_distant_singleton_is_outlier(self):
        rng = np.random.default_rng(42)
        x = np.concatenate([rng.normal(0, 0.5, size=(30, 2)), [[50.0, 50.0]]])
        res = hdbscan_labels(x, 5)
        assert res.labels[-1] == -1
        assert res.membership[-1] == 0.0

    def test_identical_points_form_one_full_cluster(self):
        res = hdbscan_labels(np.ones((20, 3)), 5)
        assert res.n_clusters == 1
        assert int(np.sum(res.labels == -1)) == 0
        assert np.all(res.membership == 1.0)

    def test_matches_exhaustive_antichain_oracle(self):
        rng = np.random.default_rng(3)
        checked = 0
        for _ in range(60):
            n = int(rng.integers(10, 40))
            centers = rng.uniform(0, 10, size=(int(rng.integers(1, 4)), 2))
            x = np.concatenate([
                rng.normal(c, 0.4, size=(n, 2)) for c in centers
            ])
            core = core_distances(x, 3)
            tree = condense_tree(mutual_reachability_mst(x, core), 4)
            if len(tree.cluster_ids()) > 12:
                continue
            checked += 1
            res = extract_clusters(tree)
            stability = tree.stability()
            total = sum(stability[c] for c in res.selected_nodes)
            assert total == pytest.approx(exhaustive_antichain_max(tree), rel=1e-9)
        assert checked >= 20

    def test_labels_contiguous_and_min_size(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            x = rng.normal(size=(int(rng.integers(12, 60)), 2))
            mcs = 5
            res = hdbscan_labels(x, mcs)
            labels = res.labels[res.labels >= 0]
            if len(labels):
                assert sorted(set(labels.tolist())) == list(range(res.n_clusters))
                for lab in range(res.n_clusters):
                    assert int(np.sum(res.labels == lab)) >= mcs
            assert np.all(res.membership[res.labels == -1] == 0.0)

    @given(st.floats(min_value=1e-3, max_value=1e3),
           st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_scale_invariance(self, scale, seed):
        rng = np.random.default_rng(seed)
        x = np.concatenate([
            rng.normal(0, 0.4, size=(15, 2)),
            rng.normal(8, 0.4, size=(15, 2)),
        ])
        base = hdbscan_labels(x, 5)
        scaled = hdbscan_labels(x * scale, 5)
        assert np.array_equal(base.labels, scaled.labels)


class TestCondensedTreeNodes:
    def test_node_table_invariants(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            x = np.concatenate([
                rng.normal(0, 0.4, size=(int(rng.integers(8, 20)), 2)),
                rng.normal(9, 0.4, size=(int(rng.integers(8, 20)), 2)),
            ])
            core = core_distances(x, 3)
            tree = condense_tree(mutual_reachability_mst(x, core), 4)
            nodes = tree.cluster_nodes()
            by_id = {n["id"]: n for n in nodes}
            for node in nodes:
                assert node["lambda_death"] >= node["lambda_birth"] >= 0.0
                children = [m for m in nodes if m["parent"] == node["id"]]
                assert sum(c["size"] for c in children) <= node["size"]
            root = by_id[tree.root]
            assert root["parent"] == -1
            assert root["size"] == tree.n_points
