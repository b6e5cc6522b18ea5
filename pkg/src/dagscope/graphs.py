"""Thresholding continuous weights into graphs, plus structural metrics.

Everything here is a pure function of its inputs.  The repair rule and the
SHD convention (a reversed edge counts once) are the two places where a
convention had to be picked; both are documented on the functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acyclicity import is_dag
from .data import BinaryDag, WeightedGraph

__all__ = [
    "ThresholdPolicy",
    "GraphMetrics",
    "threshold",
    "structural_metrics",
    "orientation_of_pair",
]

_REPAIR_MODES = ("none", "greedy_min_weight_removal")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Absolute-value cutoff plus what to do if the result is cyclic."""

    omega: float = 0.3
    post_repair: str = "greedy_min_weight_removal"

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.post_repair not in _REPAIR_MODES:
            raise ValueError(f"post_repair must be one of {_REPAIR_MODES}, got {self.post_repair!r}")


@dataclass(frozen=True)
class GraphMetrics:
    """Structural comparison of an estimated DAG against a reference DAG.

    ``shd`` counts one per wrong unordered pair: an edge present in exactly
    one graph is missing or extra, an edge present in both but with opposite
    orientation is reversed and counts once.  ``inbound_counts`` are the
    in-degrees of the estimate's nodes.
    """

    shd: int
    reversed_edges: int
    missing_edges: int
    extra_edges: int
    inbound_counts: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "shd": self.shd,
            "reversed_edges": self.reversed_edges,
            "missing_edges": self.missing_edges,
            "extra_edges": self.extra_edges,
            "inbound_counts": list(self.inbound_counts),
        }


def _reachable(adj: np.ndarray, start: int, goal: int) -> bool:
    """True when a directed path start -> ... -> goal exists."""
    d = adj.shape[0]
    seen = np.zeros(d, dtype=bool)
    stack = [start]
    seen[start] = True
    while stack:
        u = stack.pop()
        for v in np.nonzero(adj[u])[0]:
            if v == goal:
                return True
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return False


def _greedy_repair(W: np.ndarray, adj: np.ndarray) -> np.ndarray:
    """Delete minimum-|weight| edges lying on cycles until acyclic.

    Each round scans the current edges in (row, col) order and removes the
    smallest-|w| edge that sits on at least one cycle (the edge u -> v is on
    a cycle exactly when v can still reach u).  Ties fall to the first edge
    in scan order, which makes the repair deterministic.
    """
    adj = adj.copy()
    while True:
        acyclic, _ = is_dag(adj)
        if acyclic:
            return adj
        best = None
        for u, v in zip(*np.nonzero(adj)):
            u, v = int(u), int(v)
            if not _reachable(adj, v, u):
                continue
            weight = abs(W[u, v])
            if best is None or weight < best[0]:
                best = (weight, u, v)
        # a cyclic graph always has at least one edge on a cycle
        adj[best[1], best[2]] = False


def threshold(graph: WeightedGraph, policy: ThresholdPolicy | None = None) -> BinaryDag:
    """Keep edges with |w| > omega and return a verified DAG.

    A cyclic result is repaired greedily (minimum-|w| edge on a cycle goes
    first) or, with ``post_repair="none"``, rejected with the offending
    cycle attached to the error.
    """
    if policy is None:
        policy = ThresholdPolicy()
    adj = graph.support(policy.omega)
    acyclic, _ = is_dag(adj)
    if not acyclic:
        if policy.post_repair == "none":
            return BinaryDag.from_adjacency(adj)  # raises with the cycle
        adj = _greedy_repair(graph.weights, adj)
    return BinaryDag.from_adjacency(adj)


def structural_metrics(estimate: BinaryDag, truth: BinaryDag) -> GraphMetrics:
    """SHD and its breakdown, comparing the estimate against the truth."""
    A = estimate.adjacency
    B = truth.adjacency
    if A.shape != B.shape:
        raise ValueError(f"node count mismatch: estimate {A.shape[0]}, truth {B.shape[0]}")
    d = A.shape[0]
    reversed_edges = missing = extra = 0
    for i in range(d):
        for j in range(i + 1, d):
            est = A[i, j] or A[j, i]
            tru = B[i, j] or B[j, i]
            if est and tru:
                if A[i, j] != B[i, j]:
                    reversed_edges += 1
            elif tru:
                missing += 1
            elif est:
                extra += 1
    inbound = tuple(int(c) for c in A.sum(axis=0))
    return GraphMetrics(
        shd=reversed_edges + missing + extra,
        reversed_edges=reversed_edges,
        missing_edges=missing,
        extra_edges=extra,
        inbound_counts=inbound,
    )


def orientation_of_pair(estimate: BinaryDag | np.ndarray, i: int, j: int) -> str:
    """How the pair (i, j) is connected: "i_to_j", "j_to_i", "none" or "both".

    Accepts a raw boolean adjacency as well, so pre-threshold overfit
    matrices (which may carry both directions and thus cannot be a DAG) can
    be inspected with the same call.
    """
    if i == j:
        raise ValueError("need two distinct nodes")
    adj = estimate.adjacency if isinstance(estimate, BinaryDag) else np.asarray(estimate) != 0
    forward = bool(adj[i, j])
    backward = bool(adj[j, i])
    if forward and backward:
        return "both"
    if forward:
        return "i_to_j"
    if backward:
        return "j_to_i"
    return "none"
