"""Experiment pipelines over sets of layer kernels.

Pairwise distance matrices, grid sweeps over stimulus count and noise
level, and subsampling stability studies. Every pair gets its own seed
derived from the master seed and the unordered label pair, with the
sample stream for the lexicographically smaller label fixed, so results
are exactly symmetric and independent of execution order and thread
count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import baseline_metrics, bayes_metrics
from .bayes_metrics import DistanceEstimate
from .errors import DegenerateRepresentationError, RepmetricError, ValidationError
from .kernel import KernelMatrix, RepresentationMatrix, gram, predictive_covariance
from .matrix_io import LayerManifest, MatrixKind, read_matrix
from .mvn import GaussianModel
from .seeding import derive_seed, pair_seed, stream_generator

ALL_METRICS = bayes_metrics.BAYES_METRICS + baseline_metrics.BASELINE_METRICS


def heuristic_a(n: int, b: float) -> float:
    """Noise mixture weight a = b*n / (1 + b*n).

    Models noise variance growing proportionally with the stimulus
    count, which keeps discriminability roughly flat once enough
    stimuli are used.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    if b < 0:
        raise ValidationError("b must be >= 0")
    bn = b * n
    return bn / (1.0 + bn)


@dataclass(frozen=True)
class DistanceMatrix:
    """Labelled symmetric matrix of pairwise distances for one metric."""

    metric: str
    labels: tuple[str, ...]
    values: np.ndarray
    std_errors: np.ndarray
    holes: tuple[tuple[str, str, str], ...] = ()


def load_layer_kernels(manifest: LayerManifest) -> list[tuple[str, KernelMatrix]]:
    """Load every manifest entry as a kernel, gramming representations."""
    layers = []
    for entry in manifest.entries:
        loaded = read_matrix(manifest.resolve(entry), entry.kind)
        if entry.kind is MatrixKind.REPRESENTATION:
            rep = RepresentationMatrix.from_array(loaded.values, loaded.labels)
            layers.append((entry.name, gram(rep)))
        elif entry.kind is MatrixKind.KERNEL:
            layers.append((entry.name, KernelMatrix.from_array(loaded.values, loaded.labels)))
        else:
            raise ValidationError(
                f"manifest entry {entry.name!r}: distance matrices cannot be compared"
            )
    return layers


def _check_layers(layers: Sequence[tuple[str, KernelMatrix]]) -> int:
    if len(layers) < 2:
        raise ValidationError("need at least 2 layers")
    names = [name for name, _ in layers]
    if len(set(names)) != len(names):
        raise ValidationError("layer names must be unique")
    sizes = {k.n for _, k in layers}
    if len(sizes) != 1:
        raise ValidationError(f"layers have mixed stimulus counts: {sorted(sizes)}")
    return sizes.pop()


def _split_metrics(metrics: Sequence[str]):
    bayes = [m for m in metrics if m in bayes_metrics.BAYES_METRICS]
    base = [m for m in metrics if m in baseline_metrics.BASELINE_METRICS]
    unknown = [m for m in metrics if m not in bayes and m not in base]
    if unknown:
        raise ValidationError(f"unknown metrics: {unknown}")
    if not metrics:
        raise ValidationError("no metrics requested")
    return bayes, base


def _pair_distances(metrics_bayes, metrics_base, label_lo, label_hi, model_lo,
                    model_hi, kernel_lo, kernel_hi, n_samples, seed, rsa_squared,
                    on_error):
    """All requested metrics for one unordered pair, smaller label first.

    Failures are per metric: in skip mode the failing metric records a
    hole for this pair while the others still get values.
    """
    out = {}
    ps = pair_seed(seed, label_lo, label_hi)

    def run(metric, fn):
        try:
            out[metric] = fn()
        except RepmetricError as exc:
            if on_error == "abort":
                raise RepmetricError(f"pair ({label_lo}, {label_hi}): {exc}") from exc
            out[metric] = ("__hole__", (label_lo, label_hi, str(exc)))

    def require_models():
        if model_lo is None or model_hi is None:
            raise DegenerateRepresentationError("layer has no predictive distribution")

    if "tvd" in metrics_bayes:
        def tvd_fn():
            require_models()
            est = bayes_metrics.tvd(model_lo, model_hi, n_samples, ps)
            return (est.value, est.std_error)
        run("tvd", tvd_fn)
    if "jsd" in metrics_bayes or "js_distance" in metrics_bayes:
        def jsd_fn():
            require_models()
            est = bayes_metrics.jsd(model_lo, model_hi, n_samples, ps)
            js = bayes_metrics.js_distance_from_jsd(est)
            return est, js
        try:
            est, js = jsd_fn()
            if "jsd" in metrics_bayes:
                out["jsd"] = (est.value, est.std_error)
            if "js_distance" in metrics_bayes:
                out["js_distance"] = (js.value, js.std_error)
        except RepmetricError as exc:
            if on_error == "abort":
                raise RepmetricError(f"pair ({label_lo}, {label_hi}): {exc}") from exc
            hole = ("__hole__", (label_lo, label_hi, str(exc)))
            for m in ("jsd", "js_distance"):
                if m in metrics_bayes:
                    out[m] = hole
    for m in metrics_base:
        run(m, lambda m=m: (
            baseline_metrics.baseline(m, kernel_lo, kernel_hi,
                                      rsa_squared=rsa_squared).value, 0.0))
    return out


def pairwise_matrix(layers: Sequence[tuple[str, KernelMatrix]], metrics: Sequence[str],
                    a: float, n_samples: int, seed: int, threads: int = 1,
                    rsa_squared: bool = True,
                    on_error: str = "abort") -> dict[str, DistanceMatrix]:
    """Distance matrices over all unordered layer pairs, one per metric.

    ``on_error='skip'`` records failing pairs as holes (NaN entries)
    instead of aborting the run.
    """
    if on_error not in ("abort", "skip"):
        raise ValidationError("on_error must be 'abort' or 'skip'")
    _check_layers(layers)
    metrics_bayes, metrics_base = _split_metrics(metrics)

    models: dict[str, Optional[GaussianModel]] = {}
    if metrics_bayes:
        for name, kern in layers:
            try:
                models[name] = GaussianModel.from_predictive(predictive_covariance(kern, a))
            except RepmetricError as exc:
                if on_error == "abort":
                    raise RepmetricError(f"layer {name!r}: {exc}") from exc
                models[name] = None

    kernels = dict(layers)
    names = [name for name, _ in layers]
    order = {name: i for i, name in enumerate(names)}
    pairs = [(names[i], names[j]) for i in range(len(names)) for j in range(i + 1, len(names))]

    def compute(pair):
        la, lb = sorted(pair)
        return _pair_distances(
            metrics_bayes, metrics_base, la, lb,
            models.get(la), models.get(lb), kernels[la], kernels[lb],
            n_samples, seed, rsa_squared, on_error)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(p) for p in pairs]

    m = len(names)
    matrices = {}
    for metric in list(metrics_bayes) + list(metrics_base):
        values = np.zeros((m, m))
        ses = np.zeros((m, m))
        holes = []
        for pair, res in zip(pairs, results):
            i, j = order[pair[0]], order[pair[1]]
            entry = res[metric]
            if entry[0] == "__hole__":
                la, lb, reason = entry[1]
                values[i, j] = values[j, i] = np.nan
                ses[i, j] = ses[j, i] = np.nan
                holes.append((la, lb, reason))
            else:
                v, se = entry
                values[i, j] = values[j, i] = v
                ses[i, j] = ses[j, i] = se
        matrices[metric] = DistanceMatrix(
            metric=metric, labels=tuple(names), values=values,
            std_errors=ses, holes=tuple(holes))
    return matrices


@dataclass(frozen=True)
class SweepGrid:
    """JSD (and optionally TVD) over a stimulus-count x noise grid.

    ``grid[metric][i][j]`` is the estimate at n_values[i] and
    noise_values[j]; ``proportional[metric][i]`` is the marked slice
    where a follows the proportional-noise heuristic at n_values[i].
    """

    n_values: tuple[int, ...]
    noise_values: tuple[float, ...]
    noise_kind: str
    b: float
    grid: dict[str, list[list[DistanceEstimate]]]
    proportional: dict[str, list[tuple[float, DistanceEstimate]]]


def _noise_to_a(value: float, noise_kind: str) -> float:
    if noise_kind == "a":
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"a={value} outside [0, 1]")
        return float(value)
    if noise_kind == "variance":
        if value < 0:
            raise ValidationError("noise variance must be >= 0")
        return float(value / (1.0 + value))
    raise ValidationError("noise_kind must be 'a' or 'variance'")


def snr_sweep(pool1: KernelMatrix, pool2: KernelMatrix, n_values: Sequence[int],
              noise_values: Sequence[float], n_samples: int, seed: int,
              b: float = 0.01, metrics: Sequence[str] = ("jsd",),
              noise_kind: str = "a") -> SweepGrid:
    """Estimate distances over every (stimulus count, noise level) cell.

    Both pools must cover the same stimulus pool; each cell uses the
    leading principal submatrices of size n. A separate slice with
    a = heuristic_a(n, b) marks the proportional-noise diagonal.
    """
    if pool1.n != pool2.n:
        raise ValidationError("kernel pools have different sizes")
    for m in metrics:
        if m not in ("jsd", "tvd"):
            raise ValidationError(f"snr_sweep supports jsd/tvd, got {m!r}")
    n_values = [int(n) for n in n_values]
    if not n_values or not len(noise_values):
        raise ValidationError("empty sweep axes")
    if max(n_values) > pool1.n:
        raise ValidationError(f"n={max(n_values)} exceeds pool size {pool1.n}")
    if min(n_values) < 2:
        raise ValidationError("need n >= 2")

    a_grid = [_noise_to_a(v, noise_kind) for v in noise_values]
    grid = {m: [] for m in metrics}
    proportional = {m: [] for m in metrics}
    for n in n_values:
        idx = np.arange(n)
        k1 = pool1.subset(idx)
        k2 = pool2.subset(idx)
        for m in metrics:
            grid[m].append([])
        for j, a in enumerate(a_grid):
            ests = _sweep_cell(k1, k2, a, metrics, n_samples,
                               cell_seed(seed, n, j))
            for m in metrics:
                grid[m][-1].append(ests[m])
        a_prop = heuristic_a(n, b)
        ests = _sweep_cell(k1, k2, a_prop, metrics, n_samples,
                           cell_seed(seed, n, "prop"))
        for m in metrics:
            proportional[m].append((a_prop, ests[m]))
    return SweepGrid(n_values=tuple(n_values), noise_values=tuple(float(v) for v in noise_values),
                     noise_kind=noise_kind, b=float(b), grid=grid, proportional=proportional)


SWEEP_LABELS = ("kernel1", "kernel2")


def cell_seed(seed: int, n: int, noise_index) -> int:
    """Master seed of one sweep cell; 'prop' marks the heuristic slice.

    A cell's estimate equals a two-layer pairwise run over the same
    submatrices with layer names ``kernel1``/``kernel2`` and this value
    as its master seed.
    """
    return derive_seed(seed, "sweep", n, "cell", noise_index)


def _sweep_cell(k1, k2, a, metrics, n_samples, seed):
    m1 = GaussianModel.from_predictive(predictive_covariance(k1, a))
    m2 = GaussianModel.from_predictive(predictive_covariance(k2, a))
    ps = pair_seed(seed, *SWEEP_LABELS)
    return {m: bayes_metrics.estimate(m, m1, m2, n_samples, ps) for m in metrics}


@dataclass(frozen=True)
class StabilityReport:
    """Spread of pairwise distances across random stimulus subsets."""

    n_images: int
    n_repeats: int
    pool_size: int
    b: float
    a: float
    metrics: tuple[str, ...]
    pair_labels: tuple[tuple[str, str], ...]
    per_pair_sd: dict[str, dict[tuple[str, str], float]]
    median_sd: dict[str, float]
    max_sd: dict[str, float]
    values: dict[str, dict[tuple[str, str], tuple[float, ...]]] = field(repr=False, default_factory=dict)


def stability_study(layers: Sequence[tuple[str, KernelMatrix]], n_images: int,
                    n_repeats: int, metrics: Sequence[str], b: float,
                    n_samples: int, seed: int, threads: int = 1,
                    rsa_squared: bool = True) -> StabilityReport:
    """Repeatedly subsample stimuli and measure how distances vary.

    Each repeat draws a uniform subset without replacement from the
    pooled kernels, slices every layer to it, applies the proportional
    noise heuristic for the subset size, and computes all pairwise
    distances. Monte-Carlo seeds are refreshed per repeat, so reported
    spreads include estimator noise for the Bayes metrics.
    """
    pool_size = _check_layers(layers)
    if n_images > pool_size:
        raise ValidationError(f"n_images={n_images} exceeds pool size {pool_size}")
    if n_images < 2:
        raise ValidationError("n_images must be >= 2")
    if n_repeats < 2:
        raise ValidationError("n_repeats must be >= 2")
    _split_metrics(metrics)

    a = heuristic_a(n_images, b)
    names = [name for name, _ in layers]
    pair_labels = [(names[i], names[j])
                   for i in range(len(names)) for j in range(i + 1, len(names))]
    collected: dict[str, dict[tuple[str, str], list[float]]] = {
        m: {p: [] for p in pair_labels} for m in metrics}

    for rep in range(n_repeats):
        rng = stream_generator(derive_seed(seed, "stability-subset", rep))
        idx = np.sort(rng.choice(pool_size, size=n_images, replace=False))
        sub = [(name, kern.subset(idx)) for name, kern in layers]
        rep_seed = derive_seed(seed, "stability-repeat", rep)
        mats = pairwise_matrix(sub, metrics, a, n_samples, rep_seed,
                               threads=threads, rsa_squared=rsa_squared)
        for m in metrics:
            dm = mats[m]
            order = {lab: i for i, lab in enumerate(dm.labels)}
            for p in pair_labels:
                collected[m][p].append(float(dm.values[order[p[0]], order[p[1]]]))

    per_pair_sd = {
        m: {p: float(np.std(v, ddof=1)) for p, v in collected[m].items()} for m in metrics}
    median_sd = {m: float(np.median(list(per_pair_sd[m].values()))) for m in metrics}
    max_sd = {m: float(np.max(list(per_pair_sd[m].values()))) for m in metrics}
    values = {m: {p: tuple(v) for p, v in collected[m].items()} for m in metrics}
    return StabilityReport(
        n_images=int(n_images), n_repeats=int(n_repeats), pool_size=pool_size,
        b=float(b), a=float(a), metrics=tuple(metrics),
        pair_labels=tuple(pair_labels), per_pair_sd=per_pair_sd,
        median_sd=median_sd, max_sd=max_sd, values=values)
