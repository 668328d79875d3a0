"""Metric multidimensional scaling by stress majorization (SMACOF).

Majorization guarantees the raw stress never increases between
iterations. Stress is reported normalized by the sum of squared input
dissimilarities, a constant, so the reported value inherits the same
monotonicity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .seeding import derive_seed, stream_generator


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates for the points of a distance matrix.

    ``stress`` is normalized stress-1, sqrt(sum (d_ij - delta_ij)^2 /
    sum delta_ij^2) over unordered pairs; ``stress_history`` traces the
    winning restart.
    """

    coords: np.ndarray
    stress: float
    n_iterations: int
    seed: int
    stress_history: tuple[float, ...]


def _validate_distance_matrix(D: np.ndarray) -> np.ndarray:
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError("distance matrix must be square")
    if not np.all(np.isfinite(D)):
        raise ValidationError("distance matrix contains non-finite values")
    if np.abs(D - D.T).max() > 1e-8:
        raise ValidationError("distance matrix is not symmetric")
    if np.any(D < 0):
        raise ValidationError("distance matrix has negative entries")
    if np.any(np.diag(D) != 0):
        raise ValidationError("distance matrix diagonal must be zero")
    return 0.5 * (D + D.T)


def _pairwise_distances(X: np.ndarray) -> np.ndarray:
    G = X @ X.T
    sq = np.diag(G)
    D2 = sq[:, None] + sq[None, :] - 2.0 * G
    np.maximum(D2, 0.0, out=D2)
    return np.sqrt(D2)


def _smacof_single(D: np.ndarray, dims: int, rng: np.random.Generator,
                   max_iter: int, tol: float):
    m = D.shape[0]
    denom = float(np.sum(np.triu(D, k=1) ** 2))
    X = rng.standard_normal((m, dims))
    history = []
    dis = _pairwise_distances(X)
    prev = None
    for it in range(1, max_iter + 1):
        # Guttman transform; zero embedded distances contribute nothing
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dis > 0, D / np.where(dis > 0, dis, 1.0), 0.0)
        B = -ratio
        B[np.diag_indices_from(B)] += ratio.sum(axis=1)
        X = (B @ X) / m
        dis = _pairwise_distances(X)
        raw = float(np.sum(np.triu(dis - D, k=1) ** 2))
        stress = np.sqrt(raw / denom) if denom > 0 else 0.0
        history.append(stress)
        if prev is not None and prev - stress < tol * max(prev, np.finfo(float).tiny):
            break
        prev = stress
    return X, history[-1] if history else 0.0, len(history), history


def mds_embed(D, dims: int = 2, seed: int = 0, restarts: int = 8,
              max_iter: int = 500, tol: float = 1e-9) -> Embedding:
    """Embed a symmetric distance matrix into ``dims`` dimensions.

    Runs SMACOF from ``restarts`` independent random initializations and
    keeps the lowest-stress solution (ties broken by restart index).
    Coordinates are centered at the origin; orientation is arbitrary.
    Deterministic for a given seed.
    """
    D = _validate_distance_matrix(D)
    if dims < 1:
        raise ValidationError("dims must be >= 1")
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    m = D.shape[0]
    if m < 2:
        raise ValidationError("need at least 2 points")

    if not np.any(D > 0):
        coords = np.zeros((m, dims))
        return Embedding(coords=coords, stress=0.0, n_iterations=0,
                         seed=int(seed), stress_history=())

    best = None
    for r in range(restarts):
        rng = stream_generator(derive_seed(seed, "mds-restart", r))
        X, stress, iters, history = _smacof_single(D, dims, rng, max_iter, tol)
        if best is None or stress < best[0]:
            best = (stress, X, iters, history)
    stress, X, iters, history = best
    X = X - X.mean(axis=0, keepdims=True)
    return Embedding(coords=X, stress=float(stress), n_iterations=iters,
                     seed=int(seed), stress_history=tuple(history))
