"""Shared test helpers: independent numerical oracles.

The gradient oracle here deliberately knows nothing about the analytic
gradients under test; it only evaluates the scalar function.
"""

import numpy as np


def central_fd_grad(f, W, step=1e-6):
    """Central finite-difference gradient of a scalar function of a matrix."""
    W = np.asarray(W, dtype=np.float64)
    G = np.zeros_like(W)
    for idx in np.ndindex(*W.shape):
        Wp = W.copy()
        Wm = W.copy()
        Wp[idx] += step
        Wm[idx] -= step
        G[idx] = (f(Wp) - f(Wm)) / (2.0 * step)
    return G


def grad_rel_err(analytic, numeric):
    """Relative error between two gradients, guarded for tiny norms."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = max(np.linalg.norm(numeric), 1e-8)
    return np.linalg.norm(analytic - numeric) / scale


def random_strict_lower(rng, d, scale=0.8):
    """A weight matrix whose support is acyclic by construction."""
    W = rng.normal(0.0, scale, (d, d))
    return np.tril(W, k=-1)
