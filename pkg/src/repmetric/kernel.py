"""Gram matrices and the normalized signal-plus-noise covariance.

A representation assigns each of n stimuli a k-dimensional feature
vector, stacked as rows of X. Its linear kernel K = X Xᵀ determines the
zero-mean Gaussian that a random linear readout induces over outputs.
Mixing the trace-normalized kernel with isotropic noise gives the
covariance actually compared downstream:

    C = (1 - a) * n * K / tr(K) + a * I,   a in [0, 1],

which always has trace n, making comparisons invariant to feature
rotations and to rescaling of X.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateRepresentationError, NotPositiveDefiniteError, ValidationError

SYMMETRY_RTOL = 1e-10
PSD_RTOL = 1e-8
JITTER_START = 1e-10
JITTER_MAX = 1e-6
JITTER_FACTOR = 10.0


def _as_labels(labels: Optional[Sequence[str]], n: int) -> tuple[str, ...]:
    if labels is None:
        return tuple(f"s{i}" for i in range(n))
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise ValidationError(f"{len(labels)} labels for {n} rows")
    return labels


@dataclass(frozen=True)
class RepresentationMatrix:
    """n stimuli by k features, rows labelled by stimulus."""

    X: np.ndarray
    labels: tuple[str, ...]

    @classmethod
    def from_array(cls, X, labels: Optional[Sequence[str]] = None) -> "RepresentationMatrix":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError("representation must be a 2-D array")
        if X.shape[0] < 2:
            raise ValidationError("need at least 2 stimuli")
        if not np.all(np.isfinite(X)):
            raise ValidationError("representation contains non-finite values")
        return cls(X=X, labels=_as_labels(labels, X.shape[0]))

    @property
    def n_stimuli(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric PSD Gram matrix over stimuli."""

    K: np.ndarray
    labels: tuple[str, ...]

    @classmethod
    def from_array(cls, K, labels: Optional[Sequence[str]] = None,
                   validate: bool = True) -> "KernelMatrix":
        K = np.asarray(K, dtype=np.float64)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValidationError("kernel must be a square matrix")
        if not np.all(np.isfinite(K)):
            raise ValidationError("kernel contains non-finite values")
        if validate:
            scale = max(np.abs(K).max(), 1.0)
            if np.abs(K - K.T).max() > SYMMETRY_RTOL * scale:
                raise ValidationError("kernel is not symmetric")
            K = 0.5 * (K + K.T)
            eigs = np.linalg.eigvalsh(K)
            floor = -PSD_RTOL * max(np.trace(K), 0.0) / K.shape[0] - PSD_RTOL
            if eigs.min() < floor:
                raise ValidationError(
                    f"kernel is not positive semidefinite (min eigenvalue {eigs.min():.3e})"
                )
        return cls(K=K, labels=_as_labels(labels, K.shape[0]))

    @property
    def n(self) -> int:
        return self.K.shape[0]

    def subset(self, indices) -> "KernelMatrix":
        """Principal submatrix for a subset of stimuli.

        The Gram matrix of a stimulus subset equals the corresponding
        principal submatrix of the pooled Gram matrix, so pooled kernels
        can be precomputed once and sliced per experiment.
        """
        idx = np.asarray(indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size < 2:
            raise ValidationError("subset needs at least 2 indices")
        if len(np.unique(idx)) != idx.size:
            raise ValidationError("subset indices must be distinct")
        if idx.min() < 0 or idx.max() >= self.n:
            raise ValidationError("subset index out of range")
        K = self.K[np.ix_(idx, idx)]
        labels = tuple(self.labels[i] for i in idx)
        # principal submatrix of a PSD matrix is PSD, skip re-validation
        return KernelMatrix(K=K, labels=labels)


@dataclass(frozen=True)
class PredictiveCovariance:
    """Trace-normalized covariance with its Cholesky factor.

    ``jitter_used`` is the diagonal boost (0 when none was needed) that
    made the factorization succeed; ``C`` includes it.
    """

    C: np.ndarray
    a: float
    cholesky: np.ndarray
    jitter_used: float

    @property
    def n(self) -> int:
        return self.C.shape[0]


def gram(rep: RepresentationMatrix) -> KernelMatrix:
    """Linear kernel K[i, j] = <x_i, x_j>, exactly symmetric."""
    X = rep.X
    K = X @ X.T
    iu = np.triu_indices(K.shape[0], k=1)
    K[(iu[1], iu[0])] = K[iu]  # mirror so each unordered pair is stored once
    return KernelMatrix(K=K, labels=rep.labels)


def cholesky_with_jitter(C: np.ndarray):
    """Lower Cholesky factor, rescuing near-PSD matrices with diagonal jitter.

    Jitter starts at 1e-10 * tr(C)/n and escalates tenfold up to
    1e-6 * tr(C)/n before giving up. Returns (factor, jittered C, jitter).
    """
    n = C.shape[0]
    unit = max(np.trace(C) / n, np.finfo(float).tiny)
    try:
        return np.linalg.cholesky(C), C, 0.0
    except np.linalg.LinAlgError:
        pass
    eps = JITTER_START * unit
    max_eps = JITTER_MAX * unit
    while True:
        try:
            Cj = C + eps * np.eye(n)
            return np.linalg.cholesky(Cj), Cj, eps
        except np.linalg.LinAlgError:
            if eps >= max_eps:
                raise NotPositiveDefiniteError(
                    f"Cholesky failed even with jitter {eps:.1e}"
                ) from None
            eps = min(eps * JITTER_FACTOR, max_eps)


def predictive_covariance(kernel: KernelMatrix, a: float) -> PredictiveCovariance:
    """Mix the trace-normalized kernel with isotropic noise and factorize.

    Raises DegenerateRepresentationError when tr(K) <= 0 and a < 1: a
    representation with no signal variance induces no distribution.
    """
    if not 0.0 <= a <= 1.0:
        raise ValidationError(f"mixture weight a={a} outside [0, 1]")
    K = kernel.K
    n = kernel.n
    trace = float(np.trace(K))
    if a == 1.0:
        C = np.eye(n)
    else:
        if trace <= 0.0:
            raise DegenerateRepresentationError(
                "kernel trace is not positive; cannot build a predictive distribution"
            )
        C = (1.0 - a) * n * (K / trace) + a * np.eye(n)
    L, C, jitter = cholesky_with_jitter(C)
    return PredictiveCovariance(C=C, a=float(a), cholesky=L, jitter_used=jitter)


def squared_distance_matrix(kernel: KernelMatrix) -> np.ndarray:
    """Squared Euclidean distances from the kernel.

    ||x_i - x_j||^2 = K[i,i] + K[j,j] - 2 K[i,j]; clamped at zero and
    with an exactly zero diagonal.
    """
    d = np.diag(kernel.K)
    D2 = d[:, None] + d[None, :] - 2.0 * kernel.K
    np.maximum(D2, 0.0, out=D2)
    np.fill_diagonal(D2, 0.0)
    return D2


def centered_kernel(kernel: KernelMatrix) -> np.ndarray:
    """Doubly centered kernel H K H with H = I - (1/n) 1 1ᵀ."""
    K = kernel.K
    row = K.mean(axis=0, keepdims=True)
    col = K.mean(axis=1, keepdims=True)
    return K - row - col + K.mean()
