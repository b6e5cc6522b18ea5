"""Differentiable acyclicity measure and the exact combinatorial DAG oracle.

The smooth measure is ``h(W) = trace(e^{W∘W}) - d`` where ``∘`` is the
Hadamard product: it is nonnegative and vanishes exactly when the support of
``W`` is acyclic.  ``h`` penalizes edge *magnitude*, not just structure, so
``h(cW) != h(W)`` on cyclic supports.  The depth-first-search oracle
(:func:`is_dag`) is the independent check used to validate the equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class AcyclicityResult:
    """Value and gradient of the smooth acyclicity measure at one point.

    Unpacks as ``value, gradient = h_and_grad(W)``.
    """

    value: float
    gradient: np.ndarray

    def __iter__(self):
        yield self.value
        yield self.gradient


def _check_square(M: np.ndarray, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {M.shape}")
    return M


def matrix_exp(M: np.ndarray) -> np.ndarray:
    """Matrix exponential e^M (scaling-and-squaring with a Pade core).

    Delegates to :func:`scipy.linalg.expm`; relative accuracy is near machine
    precision for the moderate norms seen here.
    """
    return scipy.linalg.expm(_check_square(M, "matrix_exp input"))


def h_and_grad(W: np.ndarray) -> AcyclicityResult:
    """Evaluate h(W) = trace(e^{W∘W}) - d and its gradient.

    The gradient is ``(e^{W∘W})^T ∘ 2W``, so it vanishes wherever W does.
    Tiny negative traces from rounding are clamped to 0.
    """
    W = _check_square(W, "W")
    E = matrix_exp(W * W)
    value = max(float(np.trace(E)) - W.shape[0], 0.0)
    grad = E.T * W * 2.0
    return AcyclicityResult(value=value, gradient=grad)


def is_dag(adjacency: np.ndarray) -> tuple[bool, list[int] | None]:
    """Exact DAG check by depth-first search.

    Returns ``(True, topological_order)`` when the directed graph given by the
    boolean ``adjacency`` (entry ``[i, j]`` = edge i -> j) has no cycle, and
    ``(False, None)`` otherwise.  Self-loops count as cycles.
    """
    A = np.asarray(adjacency)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    A = A != 0
    d = A.shape[0]
    WHITE, GRAY, BLACK = 0, 1, 2
    color = [WHITE] * d
    finished: list[int] = []

    for root in range(d):
        if color[root] != WHITE:
            continue
        # iterative DFS; stack holds (node, iterator over successors)
        stack = [(root, iter(np.flatnonzero(A[root])))]
        color[root] = GRAY
        while stack:
            node, succ = stack[-1]
            advanced = False
            for nxt in succ:
                nxt = int(nxt)
                if color[nxt] == GRAY:
                    return False, None
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, iter(np.flatnonzero(A[nxt]))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                finished.append(node)
                stack.pop()
    finished.reverse()
    return True, finished


def find_cycle(adjacency: np.ndarray) -> list[int] | None:
    """Return one directed cycle as a node list [v0, ..., vk, v0], or None."""
    A = np.asarray(adjacency) != 0
    d = A.shape[0]
    color = [0] * d
    parent: dict[int, int] = {}

    for root in range(d):
        if color[root]:
            continue
        stack = [(root, iter(np.flatnonzero(A[root])))]
        color[root] = 1
        while stack:
            node, succ = stack[-1]
            advanced = False
            for nxt in succ:
                nxt = int(nxt)
                if color[nxt] == 1:
                    # back edge node -> nxt closes a cycle
                    cycle = [node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    cycle.append(cycle[0])
                    return cycle
                if color[nxt] == 0:
                    color[nxt] = 1
                    parent[nxt] = node
                    stack.append((nxt, iter(np.flatnonzero(A[nxt]))))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
    return None
