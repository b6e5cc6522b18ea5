"""Variance-ordering baseline and the variance-sortedness diagnostic.

Both tools exist to quantify how much of a structure learner's apparent
accuracy is explained by marginal variances alone.  The baseline ignores
every conditional-independence signal in the data: it sorts variables by
variance and regresses each on all lower-variance ones.  The varsortability
score measures how well the true causal order agrees with the variance
order; on data where it is close to 1, the baseline is expected to look
competitive.

After standardization all variances are equal, so the baseline's order
degenerates to the tie-break rule (original column index, ascending) and its
output is arbitrary; callers should treat baseline results on standardized
data accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import BinaryDag, Dataset, WeightedGraph, check_samples, default_names
from .simulate import GroundTruthSem

__all__ = [
    "VarsortReport",
    "varsort_regress",
    "varsortability",
    "varsortability_values",
    "varsort_report",
    "NO_DIRECTED_PATHS",
]

# reason reported when varsortability is undefined
NO_DIRECTED_PATHS = "no directed paths"

_VARIANCE_TIE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class VarsortReport:
    """Everything the baseline produces for one dataset.

    ``variance_order`` lists column indices by ascending variance.
    ``dropped`` records (target, predecessor) pairs eliminated from a
    regression because the predecessor block was rank deficient.
    ``varsortability`` is None (with a reason) when the truth DAG has no
    directed paths.
    """

    variance_order: tuple[int, ...]
    baseline_graph: BinaryDag
    baseline_weights: WeightedGraph
    dropped: tuple[tuple[int, int], ...] = ()
    varsortability: float | None = None
    varsortability_reason: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "variance_order": list(self.variance_order),
            "baseline_adjacency": np.asarray(self.baseline_graph.adjacency, dtype=int).tolist(),
            "topological_order": list(self.baseline_graph.topological_order),
            "baseline_weights": self.baseline_weights.to_json_dict(),
            "dropped": [list(p) for p in self.dropped],
            "varsortability": self.varsortability,
            "varsortability_reason": self.varsortability_reason,
        }


def _ols_drop_dependent(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Least squares with rank handling: a pivoted QR factorization keeps a
    maximal independent column subset, dependent columns get coefficient 0
    and are reported."""
    q, r, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0:
        return np.zeros(A.shape[1]), []
    tol = max(A.shape) * np.finfo(np.float64).eps * diag.max()
    rank = int(np.count_nonzero(diag > tol))
    kept = piv[:rank]
    dropped = sorted(int(c) for c in piv[rank:])
    coef = np.zeros(A.shape[1])
    if rank:
        coef[kept] = np.linalg.lstsq(A[:, kept], y, rcond=None)[0]
    return coef, dropped


def varsort_regress(data: Dataset | np.ndarray, omega: float = 0.3) -> VarsortReport:
    """Order columns by ascending variance, regress each on all
    lower-variance ones, keep coefficients with |w| > omega as edges.

    The output is acyclic by construction since all edges point from lower
    to higher variance rank.  Variance ties are broken by column index.
    """
    if omega <= 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    if isinstance(data, Dataset):
        X = data.samples
        names = data.names
    else:
        X = check_samples(data)
        names = default_names(X.shape[1])
    Xc = X - X.mean(axis=0)
    d = X.shape[1]
    variances = Xc.var(axis=0)
    order = tuple(int(i) for i in np.argsort(variances, kind="stable"))

    W = np.zeros((d, d))
    dropped: list[tuple[int, int]] = []
    for rank in range(1, d):
        target = order[rank]
        predecessors = list(order[:rank])
        coef, bad = _ols_drop_dependent(Xc[:, predecessors], Xc[:, target])
        for b in bad:
            dropped.append((target, predecessors[b]))
        for m, source in enumerate(predecessors):
            W[source, target] = coef[m]

    adjacency = np.abs(W) > omega
    graph = BinaryDag.from_adjacency(adjacency)
    return VarsortReport(
        variance_order=order,
        baseline_graph=graph,
        baseline_weights=WeightedGraph(weights=W, names=names),
        dropped=tuple(dropped),
    )


def _path_closure(adj: np.ndarray) -> np.ndarray:
    """closure[i, j] is True when a directed path i -> ... -> j exists."""
    closure = adj.copy()
    d = adj.shape[0]
    for k in range(d):
        closure |= closure[:, k : k + 1] & closure[k : k + 1, :]
    return closure


def varsortability_values(adjacency: np.ndarray, variances: np.ndarray) -> float | None:
    """Varsortability from a truth adjacency and per-column variances.

    Fraction of directed-path-connected ordered pairs (i, j) with
    Var(X_i) < Var(X_j); ties within 1e-12 count one half.  None when the
    DAG contains no directed path at all (the measure is undefined there).
    """
    adj = np.asarray(adjacency) != 0
    closure = _path_closure(adj)
    np.fill_diagonal(closure, False)
    pairs = np.argwhere(closure)
    if pairs.shape[0] == 0:
        return None
    variances = np.asarray(variances, dtype=np.float64)
    score = 0.0
    for i, j in pairs:
        lo, hi = variances[i], variances[j]
        if abs(lo - hi) <= _VARIANCE_TIE_ATOL:
            score += 0.5
        elif lo < hi:
            score += 1.0
    return score / pairs.shape[0]


def varsortability(truth: GroundTruthSem) -> float | None:
    """Varsortability of a simulated instance: truth DAG paths against the
    generated columns' population variances."""
    return varsortability_values(truth.graph.support(0.0), truth.dataset.col_stds**2)


def varsort_report(
    data: Dataset | np.ndarray, omega: float = 0.3, truth: GroundTruthSem | None = None
) -> VarsortReport:
    """Baseline regression plus, when the truth is available, the
    varsortability of the generating process."""
    report = varsort_regress(data, omega)
    if truth is None:
        return report
    value = varsortability(truth)
    reason = NO_DIRECTED_PATHS if value is None else None
    return VarsortReport(
        variance_order=report.variance_order,
        baseline_graph=report.baseline_graph,
        baseline_weights=report.baseline_weights,
        dropped=report.dropped,
        varsortability=value,
        varsortability_reason=reason,
    )
