"""Kernel-based baseline dissimilarity measures.

All four baselines are functions of the two Gram matrices alone:
centered kernel alignment (reported as 1 - CKA), its arccos (a shape
metric), and two representational-similarity measures comparing the
vectorized squared-Euclidean distance matrices (1 - Pearson
correlation, and the angle between the distance vectors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateRepresentationError, ValidationError
from .kernel import KernelMatrix, centered_kernel, squared_distance_matrix

BASELINE_METRICS = ("cka", "shape", "rsa_corr", "rsa_arccos")

_EPS_NORM = 1e-300


@dataclass(frozen=True)
class BaselineResult:
    value: float
    metric: str


def _as_kernel(K: Union[KernelMatrix, np.ndarray]) -> KernelMatrix:
    if isinstance(K, KernelMatrix):
        return K
    return KernelMatrix.from_array(K)


def _check_same_n(k1: KernelMatrix, k2: KernelMatrix) -> None:
    if k1.n != k2.n:
        raise ValidationError(f"kernel sizes differ: {k1.n} vs {k2.n}")


def cka(kernel1, kernel2) -> float:
    """Linear centered kernel alignment, in [0, 1]."""
    k1 = _as_kernel(kernel1)
    k2 = _as_kernel(kernel2)
    _check_same_n(k1, k2)
    K1c = centered_kernel(k1)
    K2c = centered_kernel(k2)
    n1 = np.linalg.norm(K1c)
    n2 = np.linalg.norm(K2c)
    if n1 < _EPS_NORM or n2 < _EPS_NORM:
        raise DegenerateRepresentationError(
            "centered kernel has zero norm (constant representation)"
        )
    value = float(np.sum(K1c * K2c) / (n1 * n2))
    return min(max(value, 0.0), 1.0)


def cka_distance(kernel1, kernel2) -> BaselineResult:
    """One minus the centered kernel alignment."""
    return BaselineResult(value=1.0 - cka(kernel1, kernel2), metric="cka")


def shape_metric(kernel1, kernel2) -> BaselineResult:
    """arccos of the alignment; satisfies the triangle inequality."""
    c = cka(kernel1, kernel2)
    return BaselineResult(value=math.acos(min(max(c, -1.0), 1.0)), metric="shape")


def _distance_vectors(kernel1, kernel2, squared: bool):
    k1 = _as_kernel(kernel1)
    k2 = _as_kernel(kernel2)
    _check_same_n(k1, k2)
    if k1.n < 3:
        raise ValidationError("RSA measures need at least 3 stimuli")
    iu = np.triu_indices(k1.n, k=1)
    v1 = squared_distance_matrix(k1)[iu]
    v2 = squared_distance_matrix(k2)[iu]
    if not squared:
        v1 = np.sqrt(v1)
        v2 = np.sqrt(v2)
    return v1, v2


def rsa_one_minus_corr(kernel1, kernel2, squared: bool = True) -> BaselineResult:
    """1 - Pearson correlation of the upper-triangle distance vectors."""
    v1, v2 = _distance_vectors(kernel1, kernel2, squared)
    s1 = v1.std()
    s2 = v2.std()
    if s1 < _EPS_NORM or s2 < _EPS_NORM:
        raise DegenerateRepresentationError("distance vector has zero variance")
    r = float(np.mean((v1 - v1.mean()) * (v2 - v2.mean())) / (s1 * s2))
    r = min(max(r, -1.0), 1.0)
    return BaselineResult(value=1.0 - r, metric="rsa_corr")


def rsa_arccos(kernel1, kernel2, squared: bool = True) -> BaselineResult:
    """Angle between the upper-triangle distance vectors."""
    v1, v2 = _distance_vectors(kernel1, kernel2, squared)
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 < _EPS_NORM or n2 < _EPS_NORM:
        raise DegenerateRepresentationError("distance vector is zero")
    c = float(np.dot(v1, v2) / (n1 * n2))
    return BaselineResult(value=math.acos(min(max(c, -1.0), 1.0)), metric="rsa_arccos")


def baseline(metric: str, kernel1, kernel2, rsa_squared: bool = True) -> BaselineResult:
    """Dispatch on baseline metric name."""
    if metric == "cka":
        return cka_distance(kernel1, kernel2)
    if metric == "shape":
        return shape_metric(kernel1, kernel2)
    if metric == "rsa_corr":
        return rsa_one_minus_corr(kernel1, kernel2, squared=rsa_squared)
    if metric == "rsa_arccos":
        return rsa_arccos(kernel1, kernel2, squared=rsa_squared)
    raise ValidationError(f"unknown baseline metric {metric!r}")
