import json

import numpy as np
import pytest

from dagscope.baselines import (
    NO_DIRECTED_PATHS,
    varsort_regress,
    varsort_report,
    varsortability,
    varsortability_values,
)
from dagscope.data import Dataset
from dagscope.simulate import SemSpec, chain_adjacency, simulate


def _brute_varsortability(adj, variances):
    """Second route: explicit per-pair reachability scan."""
    d = len(adj)

    def reach(i, j):
        seen = set()
        stack = [i]
        while stack:
            u = stack.pop()
            for v in range(d):
                if adj[u][v]:
                    if v == j:
                        return True
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
        return False

    num = den = 0.0
    for i in range(d):
        for j in range(d):
            if i != j and reach(i, j):
                den += 1.0
                if abs(variances[i] - variances[j]) <= 1e-12:
                    num += 0.5
                elif variances[i] < variances[j]:
                    num += 1.0
    return None if den == 0.0 else num / den


class TestVarsortRegress:
    def test_two_column_scaled_copy(self):
        rng = np.random.default_rng(0)
        x1 = rng.normal(size=500)
        X = np.column_stack([2.0 * x1, x1])
        report = varsort_regress(X)
        assert report.variance_order == (1, 0)
        assert report.baseline_graph.adjacency[1, 0]
        assert not report.baseline_graph.adjacency[0, 1]
        assert np.isclose(report.baseline_weights.weights[1, 0], 2.0, rtol=1e-10)

    def test_chain_recovery_large_sample(self):
        truth = simulate(
            SemSpec(d=3, n=5000, seed=0, adjacency=chain_adjacency(3), weight_range=(1.0, 1.0))
        )
        report = varsort_regress(truth.dataset)
        assert np.array_equal(report.baseline_graph.adjacency, truth.graph.support(0.0))

    def test_independent_noise_gives_empty_graph(self):
        truth = simulate(SemSpec(d=4, n=5000, seed=1, edges=0))
        report = varsort_regress(truth.dataset)
        assert report.baseline_graph.edge_count == 0

    def test_edges_point_up_the_variance_order(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(300, 5)) * np.array([3.0, 1.0, 2.0, 0.5, 1.5])
        report = varsort_regress(X, omega=0.01)
        rank = {node: pos for pos, node in enumerate(report.variance_order)}
        for i, j in zip(*np.nonzero(report.baseline_graph.adjacency)):
            assert rank[int(i)] < rank[int(j)]

    def test_variance_order_ascending(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(1000, 3)) * np.array([2.0, 0.5, 1.0])
        report = varsort_regress(X)
        variances = (X - X.mean(axis=0)).var(axis=0)
        assert report.variance_order == tuple(np.argsort(variances))

    def test_collinear_predecessor_dropped(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=400)
        e = rng.normal(size=400)
        target = a + e
        target *= 3.0 / target.std()
        X = np.column_stack([a, 2.0 * a, target])
        report = varsort_regress(X)
        assert len(report.dropped) == 1
        tgt, pred = report.dropped[0]
        assert tgt == 2 and pred in (0, 1)

    def test_dataset_names_carried(self):
        rng = np.random.default_rng(5)
        ds = Dataset.from_samples(rng.normal(size=(50, 2)), names=("a", "b"))
        report = varsort_regress(ds)
        assert report.baseline_weights.names == ("a", "b")

    def test_omega_validation(self):
        rng = np.random.default_rng(6)
        with pytest.raises(ValueError):
            varsort_regress(rng.normal(size=(50, 2)), omega=0.0)


class TestVarsortabilityValues:
    def test_chain_sorted_variances(self):
        adj = chain_adjacency(3)
        assert varsortability_values(adj, np.array([1.0, 2.0, 3.0])) == 1.0

    def test_chain_anti_sorted_variances(self):
        adj = chain_adjacency(3)
        assert varsortability_values(adj, np.array([3.0, 2.0, 1.0])) == 0.0

    def test_tie_counts_one_half(self):
        adj = np.array([[0, 1], [0, 0]])
        assert varsortability_values(adj, np.array([1.0, 1.0])) == 0.5

    def test_empty_graph_undefined(self):
        assert varsortability_values(np.zeros((3, 3)), np.ones(3)) is None

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            adj = np.triu(rng.random(size=(5, 5)) < 0.4, k=1)
            perm = rng.permutation(5)
            adj = adj[np.ix_(perm, perm)]
            variances = rng.uniform(0.1, 5.0, size=5)
            got = varsortability_values(adj, variances)
            want = _brute_varsortability(adj.tolist(), variances.tolist())
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-12)

    def test_relabel_invariance(self):
        rng = np.random.default_rng(8)
        adj = np.triu(rng.random(size=(4, 4)) < 0.5, k=1)
        variances = rng.uniform(0.1, 4.0, size=4)
        base = varsortability_values(adj, variances)
        perm = np.array([2, 0, 3, 1])
        permuted = varsortability_values(adj[np.ix_(perm, perm)], variances[perm])
        assert permuted == base

    def test_truth_wrapper_delegates(self):
        truth = simulate(SemSpec(d=4, n=500, seed=9, edges=4))
        direct = varsortability_values(truth.graph.support(0.0), truth.dataset.col_stds**2)
        assert varsortability(truth) == direct


class TestVarsortReport:
    def test_without_truth(self):
        rng = np.random.default_rng(10)
        report = varsort_report(rng.normal(size=(100, 3)))
        assert report.varsortability is None
        assert report.varsortability_reason is None

    def test_with_truth(self):
        truth = simulate(SemSpec(d=3, n=300, seed=11, edges=2))
        report = varsort_report(truth.dataset, truth=truth)
        assert report.varsortability is not None
        assert 0.0 <= report.varsortability <= 1.0
        assert report.varsortability_reason is None

    def test_empty_truth_reports_reason(self):
        truth = simulate(SemSpec(d=3, n=300, seed=12, edges=0))
        report = varsort_report(truth.dataset, truth=truth)
        assert report.varsortability is None
        assert report.varsortability_reason == NO_DIRECTED_PATHS

    def test_json_serializable(self):
        truth = simulate(SemSpec(d=3, n=300, seed=13, edges=2))
        report = varsort_report(truth.dataset, truth=truth)
        blob = json.dumps(report.to_json_dict())
        back = json.loads(blob)
        assert back["variance_order"] == list(report.variance_order)
        assert "baseline_adjacency" in back and "varsortability" in back
