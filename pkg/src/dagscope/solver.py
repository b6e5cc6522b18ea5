"""Augmented-Lagrangian solver for score-based DAG learning.

The constrained program  min_W  loss(W; X) + lam * ||W||_1  subject to
h(W) = 0  is solved as a sequence of smooth box-constrained problems

    min_W  loss(W; X) + lam * ||W||_1 + (rho/2) * h(W)^2 + alpha * h(W)

with alpha and rho increased between inner solves.  The L1 term is made
smooth by the split W = W+ - W- with W+, W- >= 0, at the cost of doubling
the variable count; diagonal cells are pinned to zero through their bounds.
Each inner problem goes to a limited-memory quasi-Newton method with
gradient projection (L-BFGS-B).

The trace records every inner solve: index 0 is the state after the first
inner solve, which is where the symmetric "explain it both ways" overfit is
visible before the acyclicity penalty starts to bite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .acyclicity import h_and_grad
from .data import Dataset, WeightedGraph, check_samples, default_names
from .losses import LossDomainError, LossSpec, bind_loss, combine_split

__all__ = [
    "InnerConfig",
    "SolverConfig",
    "TraceStep",
    "SolveTrace",
    "SolveResult",
    "OuterState",
    "SolverError",
    "fit",
    "inner_minimize",
    "outer_update",
    "split_bounds",
]

# Penalty terms use min(h, _H_CLAMP) so rho/2 * h^2 cannot overflow while the
# line search explores wild iterates; h below the clamp is reported verbatim.
_H_CLAMP = 1e8
# Finite stand-in for an objective value outside the loss domain.
_BIG_OBJECTIVE = 1e18


class SolverError(RuntimeError):
    """Fatal solver failure, carrying a diagnostics dict (W, alpha, rho, step)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


@dataclass(frozen=True)
class InnerConfig:
    """L-BFGS-B settings for one inner solve."""

    memory: int = 10
    max_iterations: int = 500
    gradient_tolerance: float = 1e-7

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_tolerance <= 0:
            raise ValueError("gradient_tolerance must be > 0")


@dataclass(frozen=True, eq=False)
class SolverConfig:
    """Outer-loop schedule plus loss choice.

    Defaults mirror the reference augmented-Lagrangian schedule: rho starts
    at 1 and is multiplied by 10 whenever h fails to shrink by the progress
    ratio, alpha accumulates rho * h after each accepted inner solve, and the
    loop stops at h <= h_tolerance.  ``w_init`` is a d x d warm-start matrix
    (zeros when None).  ``seed`` is carried into manifests for bookkeeping;
    the solver itself is deterministic and never draws randomness.
    """

    loss: LossSpec = field(default_factory=LossSpec)
    rho_init: float = 1.0
    rho_max: float = 1e16
    rho_multiplier: float = 10.0
    alpha_init: float = 0.0
    h_tolerance: float = 1e-8
    progress_ratio: float = 0.25
    max_outer: int = 100
    inner: InnerConfig = field(default_factory=InnerConfig)
    w_init: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.rho_init <= 0:
            raise ValueError("rho_init must be > 0")
        if self.rho_multiplier <= 1:
            raise ValueError("rho_multiplier must be > 1")
        if not (0 < self.progress_ratio < 1):
            raise ValueError("progress_ratio must lie in (0, 1)")
        if self.h_tolerance <= 0:
            raise ValueError("h_tolerance must be > 0")
        if self.rho_max < self.rho_init:
            raise ValueError("rho_max must be >= rho_init")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.w_init is not None:
            w0 = np.array(self.w_init, dtype=np.float64)
            if w0.ndim != 2 or w0.shape[0] != w0.shape[1]:
                raise ValueError("w_init must be a square matrix")
            if not np.all(np.isfinite(w0)):
                raise ValueError("w_init must be finite")
            w0.setflags(write=False)
            object.__setattr__(self, "w_init", w0)

    def to_json_dict(self) -> dict:
        return {
            "loss": {"kind": self.loss.kind, "lam": self.loss.lam,
                     "sigma": None if self.loss.sigma is None else np.asarray(self.loss.sigma).tolist()},
            "rho_init": self.rho_init,
            "rho_max": self.rho_max,
            "rho_multiplier": self.rho_multiplier,
            "alpha_init": self.alpha_init,
            "h_tolerance": self.h_tolerance,
            "progress_ratio": self.progress_ratio,
            "max_outer": self.max_outer,
            "inner": {"memory": self.inner.memory,
                      "max_iterations": self.inner.max_iterations,
                      "gradient_tolerance": self.inner.gradient_tolerance},
            "w_init": None if self.w_init is None else self.w_init.tolist(),
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class TraceStep:
    """State after one inner solve.

    ``ell`` is the pure loss term, ``h`` the acyclicity value at the solved
    point, ``total`` the full augmented objective, and ``alpha``/``rho`` the
    multiplier and penalty weight in effect during the solve.  ``weights`` is
    a snapshot of W.  ``accepted`` is False when the outer loop discarded the
    solve and re-ran it at a larger rho; ``inner_message`` carries the
    optimizer's status line (line-search failures show up here).
    """

    step: int
    ell: float
    h: float
    total: float
    alpha: float
    rho: float
    weights: np.ndarray
    accepted: bool = True
    inner_message: str = ""


@dataclass(frozen=True)
class SolveTrace:
    """Sequence of TraceStep, one per inner solve, in execution order."""

    steps: tuple[TraceStep, ...]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, index):
        return self.steps[index]

    @property
    def final(self) -> TraceStep:
        return self.steps[-1]

    def accepted_steps(self) -> tuple[TraceStep, ...]:
        return tuple(s for s in self.steps if s.accepted)


@dataclass(frozen=True, eq=False)
class SolveResult:
    weights: WeightedGraph
    trace: SolveTrace
    termination: str
    config: SolverConfig

    @property
    def final_h(self) -> float:
        return self.trace.final.h


@dataclass(frozen=True)
class OuterState:
    """Multiplier state between inner solves.

    ``h`` is the constraint value at the last accepted iterate (infinity
    before the first acceptance, so the first solve always counts as
    progress).
    """

    alpha: float
    rho: float
    h: float = np.inf
    outer_count: int = 0
    termination: str | None = None


def outer_update(state: OuterState, h_new: float, config: SolverConfig) -> tuple[OuterState, bool]:
    """Decide what to do with a finished inner solve.

    Returns ``(next_state, accepted)``.  If h failed to shrink below
    progress_ratio times its previous value and rho has headroom, the solve
    is rejected and rho multiplied, so the caller re-runs from the last
    accepted point.  Otherwise the iterate is accepted, alpha is increased by
    rho * h, and the state carries a termination reason once h is within
    tolerance, rho is exhausted, or the outer budget is spent.
    """
    if h_new > config.progress_ratio * state.h and state.rho < config.rho_max:
        return replace(state, rho=state.rho * config.rho_multiplier), False
    alpha = state.alpha + state.rho * h_new
    count = state.outer_count + 1
    if h_new <= config.h_tolerance:
        termination = "converged"
    elif state.rho >= config.rho_max:
        termination = "rho_exhausted"
    elif count >= config.max_outer:
        termination = "max_outer"
    else:
        termination = None
    return OuterState(alpha=alpha, rho=state.rho, h=h_new,
                      outer_count=count, termination=termination), True


def split_bounds(d: int) -> list[tuple[float, float | None]]:
    """Box bounds for the stacked (W+, W-) vector: diagonal cells pinned at
    zero, everything else nonnegative."""
    single = [(0.0, 0.0) if i == j else (0.0, None) for i in range(d) for j in range(d)]
    return single + single


def _split_start(W: np.ndarray) -> np.ndarray:
    plus = np.maximum(W, 0.0)
    minus = np.maximum(-W, 0.0)
    return np.concatenate([plus.ravel(), minus.ravel()])


def inner_minimize(objective, w_start, bounds, inner: InnerConfig) -> scipy.optimize.OptimizeResult:
    """One box-constrained quasi-Newton solve.

    ``objective(w) -> (value, gradient)``.  Returns the full optimizer
    result; on line-search failure the best-so-far point is in ``.x`` and
    ``.success`` is False, which the outer loop records and survives.
    """
    return scipy.optimize.minimize(
        objective,
        np.asarray(w_start, dtype=np.float64),
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={
            "maxcor": inner.memory,
            "maxiter": inner.max_iterations,
            "gtol": inner.gradient_tolerance,
        },
    )


def _augmented_objective(loss_fn, lam, d, alpha, rho, diagnostics):
    """Objective over the split vector for one inner solve."""

    def objective(w):
        W = combine_split(w[: d * d].reshape(d, d), w[d * d :].reshape(d, d))
        try:
            ev = loss_fn(W)
        except LossDomainError:
            # outside the loss domain (singular I - W, zero residual): report
            # a huge value so the line search backs off
            return _BIG_OBJECTIVE, np.zeros_like(w)
        if np.isnan(ev.value):
            diagnostics["W"] = W
            raise SolverError(
                "loss evaluated to NaN",
                {"W": W, "alpha": alpha, "rho": rho, **diagnostics},
            )
        if not np.isfinite(ev.value):
            return _BIG_OBJECTIVE, np.zeros_like(w)
        h_val, h_grad = h_and_grad(W)
        h_pen = min(h_val, _H_CLAMP) if np.isfinite(h_val) else _H_CLAMP
        value = ev.value + 0.5 * rho * h_pen * h_pen + alpha * h_pen + lam * float(np.sum(w))
        G = ev.gradient + (rho * h_pen + alpha) * h_grad
        G = np.nan_to_num(G, nan=0.0, posinf=1e12, neginf=-1e12)
        g = np.concatenate([(G + lam).ravel(), (-G + lam).ravel()])
        return value, g

    return objective


def fit(X: Dataset | np.ndarray, config: SolverConfig | None = None) -> SolveResult:
    """Run the full augmented-Lagrangian loop on a centered dataset.

    Deterministic: identical (X, config) give bitwise-identical results.
    Emits a warning when a column mean exceeds 1e-6 in magnitude, since every
    loss here assumes centered data.
    """
    if config is None:
        config = SolverConfig()
    if isinstance(X, Dataset):
        samples = X.samples
        names = X.names
    else:
        samples = check_samples(X)
        names = default_names(samples.shape[1])
    d = samples.shape[1]
    means = samples.mean(axis=0)
    if np.any(np.abs(means) > 1e-6):
        worst = int(np.argmax(np.abs(means)))
        warnings.warn(
            f"column {worst} has mean {means[worst]:.3g}; the losses assume centered data",
            stacklevel=2,
        )

    loss_fn = bind_loss(config.loss, samples)
    bounds = split_bounds(d)
    if config.w_init is None:
        W0 = np.zeros((d, d))
    else:
        if config.w_init.shape != (d, d):
            raise ValueError(f"w_init has shape {config.w_init.shape}, data needs {(d, d)}")
        W0 = config.w_init
    w = _split_start(W0)

    state = OuterState(alpha=config.alpha_init, rho=config.rho_init)
    steps: list[TraceStep] = []
    step_index = 0
    while state.termination is None:
        diagnostics = {"step": step_index}
        objective = _augmented_objective(
            loss_fn, config.loss.lam, d, state.alpha, state.rho, diagnostics
        )
        res = inner_minimize(objective, w, bounds, config.inner)
        w_new = np.asarray(res.x, dtype=np.float64)
        W_new = combine_split(w_new[: d * d].reshape(d, d), w_new[d * d :].reshape(d, d))
        try:
            ev = loss_fn(W_new)
            ell = ev.value
            obj_val = objective(w_new)[0]
        except LossDomainError:
            ell = np.inf
            obj_val = np.inf
        h_new, _ = h_and_grad(W_new)
        W_new.setflags(write=False)
        alpha_used, rho_used = state.alpha, state.rho
        state, accepted = outer_update(state, h_new, config)
        message = "" if res.success else str(res.message)
        steps.append(
            TraceStep(
                step=step_index,
                ell=float(ell),
                h=float(h_new),
                total=float(obj_val),
                alpha=alpha_used,
                rho=rho_used,
                weights=W_new,
                accepted=accepted,
                inner_message=message,
            )
        )
        step_index += 1
        if accepted:
            w = w_new

    W_final = combine_split(w[: d * d].reshape(d, d), w[d * d :].reshape(d, d))
    if not np.all(np.isfinite(W_final)):
        raise SolverError(
            "solver produced non-finite weights",
            {"W": W_final, "alpha": state.alpha, "rho": state.rho},
        )
    return SolveResult(
        weights=WeightedGraph(weights=W_final, names=names),
        trace=SolveTrace(steps=tuple(steps)),
        termination=state.termination,
        config=config,
    )
