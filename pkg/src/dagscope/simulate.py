"""Synthetic linear-SEM datasets with controllable DAGs, weights and noise.

Every draw is keyed off a single 64-bit seed through named PCG64 substreams:
stream ``(seed, 0)`` drives the graph (permutation, edge mask, weights) and
stream ``(seed, 1, j)`` drives the noise of column ``j``.  Growing a spec by
a node therefore never perturbs the noise of earlier columns, and identical
specs reproduce datasets bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .acyclicity import is_dag
from .data import BinaryDag, Dataset, WeightedGraph, default_names

__all__ = [
    "SemSpec",
    "ToyPairSpec",
    "GroundTruthSem",
    "simulate",
    "simulate_toy_pair",
    "reconstruct",
    "effective_noise_covariance",
    "find_flip_seed",
    "FlipSearchResult",
    "fig1_like_spec",
    "chain_adjacency",
    "FIG1_TARGET_STDS",
]

_GRAPH_TAG = 0
_NOISE_TAG = 1

# column standard deviations of the 4-node illustrative setup
FIG1_TARGET_STDS = (0.86, 1.56, 1.07, 0.76)


def _rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


@dataclass(frozen=True, eq=False)
class SemSpec:
    """Parameters of one synthetic linear SEM draw.

    Either ``edges`` (expected edge count of an Erdos-Renyi DAG) or an
    explicit acyclic ``adjacency`` must be given.  ``noise_scale`` is the
    half-width (uniform) or standard deviation (gaussian), scalar or one
    value per node.  ``target_stds``, when set, post-scales columns (and the
    weights and noise, consistently) so the generated dataset hits those
    population standard deviations exactly.
    """

    d: int
    n: int
    seed: int
    edges: int | None = None
    adjacency: np.ndarray | None = None
    weight_range: tuple[float, float] = (0.5, 2.0)
    noise: str = "uniform"
    noise_scale: float | tuple[float, ...] = 1.0
    target_stds: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"need d >= 2, got {self.d}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.noise not in ("uniform", "gaussian"):
            raise ValueError(f"unknown noise kind {self.noise!r}")
        low, high = self.weight_range
        if not (0 < low <= high):
            raise ValueError(f"weight_range must satisfy 0 < low <= high, got {self.weight_range}")
        scale = self.noise_scale
        if np.isscalar(scale):
            scale = (float(scale),) * self.d
        else:
            scale = tuple(float(s) for s in scale)
        if len(scale) != self.d or any(s <= 0 for s in scale):
            raise ValueError("noise_scale must be positive, scalar or one value per node")
        object.__setattr__(self, "noise_scale", scale)
        if self.adjacency is not None:
            adj = np.asarray(self.adjacency) != 0
            if adj.shape != (self.d, self.d):
                raise ValueError(f"adjacency must be {self.d}x{self.d}, got {adj.shape}")
            acyclic, _ = is_dag(adj)
            if not acyclic:
                raise ValueError("explicit adjacency contains a cycle")
            adj.setflags(write=False)
            object.__setattr__(self, "adjacency", adj)
        elif self.edges is None:
            raise ValueError("give either an edge count or an explicit adjacency")
        elif self.edges < 0:
            raise ValueError("edge count must be nonnegative")
        if self.target_stds is not None:
            t = tuple(float(v) for v in self.target_stds)
            if len(t) != self.d or any(v <= 0 for v in t):
                raise ValueError("target_stds must be positive, one per node")
            object.__setattr__(self, "target_stds", t)

    def to_json_dict(self) -> dict:
        return {
            "kind": "sem",
            "d": self.d,
            "n": self.n,
            "seed": self.seed,
            "edges": self.edges,
            "adjacency": None if self.adjacency is None else np.asarray(self.adjacency, dtype=int).tolist(),
            "weight_range": list(self.weight_range),
            "noise": self.noise,
            "noise_scale": list(self.noise_scale),
            "target_stds": None if self.target_stds is None else list(self.target_stds),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SemSpec":
        return cls(
            d=int(obj["d"]),
            n=int(obj["n"]),
            seed=int(obj["seed"]),
            edges=None if obj.get("edges") is None else int(obj["edges"]),
            adjacency=None if obj.get("adjacency") is None else np.asarray(obj["adjacency"]),
            weight_range=tuple(obj.get("weight_range", (0.5, 2.0))),
            noise=obj.get("noise", "uniform"),
            noise_scale=tuple(obj.get("noise_scale", (1.0,))),
            target_stds=None if obj.get("target_stds") is None else tuple(obj["target_stds"]),
        )


@dataclass(frozen=True)
class ToyPairSpec:
    """Two-variable toy setup: X0 is pure noise and X1 = gamma * X0 exactly.

    The pair is symmetric (X0 = gamma^{-1} X1 describes the same data), so
    no orientation is "correct"; the generative direction X0 -> X1 is
    recorded with the ``symmetric`` flag set.
    """

    gamma: float
    n: int
    seed: int

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")

    def to_json_dict(self) -> dict:
        return {"kind": "toy_pair", "gamma": self.gamma, "n": self.n, "seed": self.seed}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ToyPairSpec":
        return cls(gamma=float(obj["gamma"]), n=int(obj["n"]), seed=int(obj["seed"]))


@dataclass(frozen=True, eq=False)
class GroundTruthSem:
    """A simulated dataset together with the process that generated it."""

    spec: SemSpec | ToyPairSpec
    graph: WeightedGraph
    dataset: Dataset
    noise: np.ndarray
    noise_stds: np.ndarray
    order: tuple[int, ...]
    symmetric: bool = False

    def binary(self) -> BinaryDag:
        """True structure as a verified BinaryDag."""
        return BinaryDag.from_adjacency(self.graph.support(0.0))


def _random_dag(rng: np.random.Generator, d: int, edges: int) -> tuple[np.ndarray, list[int]]:
    """Erdos-Renyi DAG: uniform node order, each forward edge kept with the
    probability that hits the requested edge count in expectation."""
    perm = [int(v) for v in rng.permutation(d)]
    pairs = d * (d - 1) // 2
    p = min(1.0, edges / pairs) if pairs else 0.0
    adj = np.zeros((d, d), dtype=bool)
    for a in range(d):
        for b in range(a + 1, d):
            if rng.random() < p:
                adj[perm[a], perm[b]] = True
    return adj, perm


def _draw_weights(rng: np.random.Generator, adj: np.ndarray, low: float, high: float) -> np.ndarray:
    W = np.zeros(adj.shape, dtype=np.float64)
    for i, j in zip(*np.nonzero(adj)):
        magnitude = rng.uniform(low, high)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        W[i, j] = sign * magnitude
    return W


def simulate(spec: SemSpec) -> GroundTruthSem:
    """Draw a ground-truth SEM and a centered dataset from it."""
    d, n = spec.d, spec.n
    rng_g = _rng(spec.seed, _GRAPH_TAG)
    if spec.adjacency is not None:
        adj = np.asarray(spec.adjacency) != 0
        _, order = is_dag(adj)
    else:
        adj, order = _random_dag(rng_g, d, spec.edges)
    low, high = spec.weight_range
    W = _draw_weights(rng_g, adj, low, high)

    noise = np.empty((n, d), dtype=np.float64)
    noise_stds = np.empty(d, dtype=np.float64)
    for j in range(d):
        rng_j = _rng(spec.seed, _NOISE_TAG, j)
        s = spec.noise_scale[j]
        if spec.noise == "uniform":
            noise[:, j] = rng_j.uniform(-s, s, n)
            noise_stds[j] = s / np.sqrt(3.0)
        else:
            noise[:, j] = rng_j.normal(0.0, s, n)
            noise_stds[j] = s

    X = np.zeros((n, d), dtype=np.float64)
    for j in order:
        X[:, j] = X @ W[:, j] + noise[:, j]

    if spec.target_stds is not None:
        c = np.asarray(spec.target_stds) / X.std(axis=0)
        X = X * c
        W = W * (c[None, :] / c[:, None])
        noise = noise * c
        noise_stds = noise_stds * c

    dataset = Dataset.from_samples(X - X.mean(axis=0), default_names(d))
    noise.setflags(write=False)
    noise_stds.setflags(write=False)
    return GroundTruthSem(
        spec=spec,
        graph=WeightedGraph(weights=W, names=default_names(d)),
        dataset=dataset,
        noise=noise,
        noise_stds=noise_stds,
        order=tuple(int(v) for v in order),
    )


def simulate_toy_pair(spec: ToyPairSpec) -> GroundTruthSem:
    """Two centered columns with X1 = gamma * X0 exactly (X0 standard normal)."""
    rng = _rng(spec.seed, _NOISE_TAG, 0)
    x0 = rng.normal(0.0, 1.0, spec.n)
    x0 = x0 - x0.mean()
    x1 = spec.gamma * x0
    X = np.column_stack([x0, x1])
    W = np.array([[0.0, spec.gamma], [0.0, 0.0]])
    noise = np.column_stack([x0, np.zeros(spec.n)])
    noise.setflags(write=False)
    noise_stds = np.array([1.0, 0.0])
    noise_stds.setflags(write=False)
    return GroundTruthSem(
        spec=spec,
        graph=WeightedGraph(weights=W, names=default_names(2)),
        dataset=Dataset.from_samples(X, default_names(2)),
        noise=noise,
        noise_stds=noise_stds,
        order=(0, 1),
        symmetric=True,
    )


def reconstruct(truth: GroundTruthSem) -> np.ndarray:
    """Replay the SEM from the stored weights and noise, then center.

    Matches the stored dataset to ~1e-12; used to check that the recorded
    process really generated the data.
    """
    W = truth.graph.weights
    X = np.zeros_like(truth.noise)
    for j in truth.order:
        X[:, j] = X @ W[:, j] + truth.noise[:, j]
    return X - X.mean(axis=0)


def effective_noise_covariance(
    truth: GroundTruthSem, column_factors: Sequence[float] | None = None
) -> np.ndarray:
    """Diagonal noise covariance of the (optionally rescaled) process.

    If the dataset columns are multiplied by ``column_factors`` (for example
    ``1/std`` under standardization), the noise terms of the induced SEM are
    scaled the same way.
    """
    stds = np.asarray(truth.noise_stds, dtype=np.float64)
    if column_factors is not None:
        stds = stds * np.asarray(column_factors, dtype=np.float64)
    return np.diag(stds**2)


def fig1_like_spec(seed: int, n: int = 1000) -> SemSpec:
    """4-node, 4-edge uniform-noise setup post-scaled to the illustrative
    column standard deviations (0.86, 1.56, 1.07, 0.76)."""
    return SemSpec(
        d=4,
        n=n,
        seed=seed,
        edges=4,
        weight_range=(0.5, 2.0),
        noise="uniform",
        noise_scale=1.0,
        target_stds=FIG1_TARGET_STDS,
    )


def chain_adjacency(d: int) -> np.ndarray:
    """0 -> 1 -> ... -> d-1."""
    adj = np.zeros((d, d), dtype=bool)
    for i in range(d - 1):
        adj[i, i + 1] = True
    return adj


@dataclass(frozen=True, eq=False)
class FlipSearchResult:
    """A seed whose centered fit matches truth while the standardized fit differs."""

    seed: int
    truth: GroundTruthSem
    centered_fit: object
    standardized_fit: object
    centered_graph: BinaryDag
    standardized_graph: BinaryDag
    centered_metrics: object
    standardized_metrics: object


def find_flip_seed(
    base_spec: SemSpec,
    solver_config=None,
    max_seeds: int = 50,
    omega: float = 0.3,
    require_reversed: bool = False,
) -> FlipSearchResult | None:
    """Search seeds 0..max_seeds-1 for an instance where fitting the centered
    data recovers the truth exactly (SHD 0 at threshold omega) while fitting
    the standardized data does not (SHD >= 1).

    With ``require_reversed`` the standardized fit must additionally contain
    at least one reversed edge.  Returns None when no seed qualifies.
    """
    from .graphs import ThresholdPolicy, structural_metrics, threshold
    from .solver import SolverConfig, fit

    if solver_config is None:
        solver_config = SolverConfig()
    policy = ThresholdPolicy(omega=omega, post_repair="greedy_min_weight_removal")

    from .data import center_and_scale

    for seed in range(max_seeds):
        truth = simulate(replace(base_spec, seed=seed))
        truth_dag = truth.binary()

        fit_c = fit(truth.dataset, solver_config)
        graph_c = threshold(fit_c.weights, policy)
        metrics_c = structural_metrics(graph_c, truth_dag)
        if metrics_c.shd != 0:
            continue

        standardized = center_and_scale(truth.dataset, "standardize")
        fit_s = fit(standardized, solver_config)
        graph_s = threshold(fit_s.weights, policy)
        metrics_s = structural_metrics(graph_s, truth_dag)
        if metrics_s.shd >= 1 and (not require_reversed or metrics_s.reversed_edges >= 1):
            return FlipSearchResult(
                seed=seed,
                truth=truth,
                centered_fit=fit_c,
                standardized_fit=fit_s,
                centered_graph=graph_c,
                standardized_graph=graph_s,
                centered_metrics=metrics_c,
                standardized_metrics=metrics_s,
            )
    return None
