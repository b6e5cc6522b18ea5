import numpy as np
import pytest

from dagscope.data import BinaryDag, CyclicGraphError, WeightedGraph, default_names
from dagscope.graphs import (
    GraphMetrics,
    ThresholdPolicy,
    orientation_of_pair,
    structural_metrics,
    threshold,
)


def _wg(weights):
    W = np.asarray(weights, dtype=float)
    return WeightedGraph(weights=W, names=default_names(W.shape[0]))


def _has_cycle_matrix_power(adj):
    # independent cycle oracle: the diagonal of sum_k A^k is nonzero exactly
    # when some node reaches itself
    A = adj.astype(np.int64)
    total = np.zeros_like(A)
    P = np.eye(A.shape[0], dtype=np.int64)
    for _ in range(A.shape[0]):
        P = np.clip(P @ A, 0, 1)
        total += P
    return bool(np.any(np.diag(total) > 0))


class TestThresholdPolicy:
    def test_validation(self):
        with pytest.raises(ValueError):
            ThresholdPolicy(omega=0.0)
        with pytest.raises(ValueError):
            ThresholdPolicy(post_repair="prune")


class TestThreshold:
    def test_single_edge_survives(self):
        dag = threshold(_wg([[0.0, 0.5], [0.0, 0.0]]))
        assert dag.adjacency[0, 1] and not dag.adjacency[1, 0]

    def test_cutoff_is_strict(self):
        dag = threshold(_wg([[0.0, 0.3], [0.0, 0.0]]), ThresholdPolicy(omega=0.3))
        assert dag.edge_count == 0

    def test_negative_weights_count_by_magnitude(self):
        dag = threshold(_wg([[0.0, -0.8], [0.0, 0.0]]))
        assert dag.adjacency[0, 1]

    def test_two_cycle_repair_drops_weaker_edge(self):
        # both entries survive the cutoff, forming a 2-cycle; the repair
        # removes the 0.31 edge, the smaller magnitude on the cycle
        dag = threshold(_wg([[0.0, 0.9], [0.31, 0.0]]))
        assert dag.adjacency[0, 1] and not dag.adjacency[1, 0]

    def test_three_cycle_repair_hand_trace(self):
        W = np.zeros((3, 3))
        W[0, 1] = 0.4
        W[1, 2] = 0.5
        W[2, 0] = 0.6
        dag = threshold(_wg(W))
        assert not dag.adjacency[0, 1]
        assert dag.adjacency[1, 2] and dag.adjacency[2, 0]

    def test_repair_tie_breaks_by_scan_order(self):
        dag = threshold(_wg([[0.0, 0.5], [0.5, 0.0]]))
        assert not dag.adjacency[0, 1]
        assert dag.adjacency[1, 0]

    def test_no_repair_mode_raises_with_cycle(self):
        policy = ThresholdPolicy(post_repair="none")
        with pytest.raises(CyclicGraphError) as excinfo:
            threshold(_wg([[0.0, 0.9], [0.31, 0.0]]), policy)
        assert excinfo.value.cycle is not None

    def test_repair_leaves_off_cycle_edges_alone(self):
        # node 3 hangs off the 2-cycle; only a cycle edge may be removed
        W = np.zeros((4, 4))
        W[0, 1] = 0.9
        W[1, 0] = 0.4
        W[1, 3] = 0.35
        W[2, 3] = 0.8
        dag = threshold(_wg(W))
        assert dag.adjacency[0, 1] and not dag.adjacency[1, 0]
        assert dag.adjacency[1, 3] and dag.adjacency[2, 3]

    def test_omega_monotone_on_acyclic_weights(self):
        rng = np.random.default_rng(0)
        W = np.triu(rng.normal(size=(5, 5)), k=1)
        loose = threshold(_wg(W), ThresholdPolicy(omega=0.2))
        tight = threshold(_wg(W), ThresholdPolicy(omega=0.8))
        assert np.all(loose.adjacency | ~tight.adjacency)

    def test_repair_always_returns_dag_subset(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            W = rng.normal(scale=0.5, size=(5, 5))
            np.fill_diagonal(W, 0.0)
            graph = _wg(W)
            before = graph.support(0.2)
            dag = threshold(graph, ThresholdPolicy(omega=0.2))
            assert not _has_cycle_matrix_power(dag.adjacency)
            assert np.all(before | ~dag.adjacency)

    def test_default_policy(self):
        dag = threshold(_wg([[0.0, 0.31], [0.0, 0.0]]))
        assert dag.adjacency[0, 1]


class TestStructuralMetrics:
    def test_identical_graphs(self):
        chain = BinaryDag.from_adjacency(np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=bool))
        m = structural_metrics(chain, chain)
        assert m.shd == 0 and m.reversed_edges == 0
        assert m.missing_edges == 0 and m.extra_edges == 0

    def test_reversal_counts_once(self):
        truth = BinaryDag.from_adjacency(np.array([[0, 1], [0, 0]], dtype=bool))
        estimate = BinaryDag.from_adjacency(np.array([[0, 0], [1, 0]], dtype=bool))
        m = structural_metrics(estimate, truth)
        assert m.shd == 1 and m.reversed_edges == 1
        assert m.missing_edges == 0 and m.extra_edges == 0

    def test_mixed_example(self):
        # truth 0 -> 1 -> 2; estimate keeps 0 -> 1, reverses 1 -> 2, and adds
        # 0 -> 2: one reversed + one extra
        truth = BinaryDag.from_adjacency(np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=bool))
        est = BinaryDag.from_adjacency(np.array([[0, 1, 1], [0, 0, 0], [0, 1, 0]], dtype=bool))
        m = structural_metrics(est, truth)
        assert m.shd == 2
        assert m.reversed_edges == 1 and m.extra_edges == 1 and m.missing_edges == 0
        assert m.inbound_counts == (0, 2, 1)

    def test_empty_estimate_all_missing(self):
        truth = BinaryDag.from_adjacency(np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=bool))
        empty = BinaryDag.from_adjacency(np.zeros((3, 3), dtype=bool))
        m = structural_metrics(empty, truth)
        assert m.shd == 2 and m.missing_edges == 2
        assert m.inbound_counts == (0, 0, 0)

    def test_swap_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            perm = rng.permutation(4)
            a = np.zeros((4, 4), dtype=bool)
            b = np.zeros((4, 4), dtype=bool)
            for i in range(4):
                for j in range(i + 1, 4):
                    if rng.random() < 0.4:
                        a[perm[i], perm[j]] = True
                    if rng.random() < 0.4:
                        b[perm[j], perm[i]] = True
            da = BinaryDag.from_adjacency(a)
            db = BinaryDag.from_adjacency(b)
            ab = structural_metrics(da, db)
            ba = structural_metrics(db, da)
            assert ab.shd == ba.shd
            assert ab.reversed_edges == ba.reversed_edges
            assert ab.missing_edges == ba.extra_edges
            assert ab.extra_edges == ba.missing_edges

    def test_shape_mismatch(self):
        two = BinaryDag.from_adjacency(np.zeros((2, 2), dtype=bool))
        three = BinaryDag.from_adjacency(np.zeros((3, 3), dtype=bool))
        with pytest.raises(ValueError):
            structural_metrics(two, three)

    def test_json_dict(self):
        m = GraphMetrics(shd=3, reversed_edges=1, missing_edges=1, extra_edges=1,
                         inbound_counts=(0, 1, 2))
        d = m.to_json_dict()
        assert d["shd"] == 3 and d["inbound_counts"] == [0, 1, 2]


class TestOrientationOfPair:
    def test_dag_directions(self):
        chain = BinaryDag.from_adjacency(np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=bool))
        assert orientation_of_pair(chain, 0, 1) == "i_to_j"
        assert orientation_of_pair(chain, 1, 0) == "j_to_i"
        assert orientation_of_pair(chain, 0, 2) == "none"

    def test_raw_matrix_both(self):
        W = np.array([[0.0, 0.5], [0.4, 0.0]])
        assert orientation_of_pair(W, 0, 1) == "both"

    def test_same_node_rejected(self):
        with pytest.raises(ValueError):
            orientation_of_pair(np.zeros((2, 2)), 1, 1)
