"""Evaluation metrics for counterfactual quality, plus cross-run aggregation.

Five headline quantities: target-class validity (flip rate), robustness
(probability left on the undesired class; its boundary distance is also
reported), proximity (normalized L1), sparsity (fraction of modified
cells), and plausibility (fraction of density-based outliers against the
test split).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cfgen.config import QUERIED_LABEL, RunConfig
from .cfgen.results import CfResult
from .data import MtsDataset

__all__ = [
    "MetricsReport",
    "tcv",
    "proximity",
    "sparsity",
    "lof",
    "plausibility",
    "robustness",
    "aggregate",
    "evaluate_run",
    "noise_stability",
    "METRIC_NAMES",
]

METRIC_NAMES = ("tcv", "robustness", "proximity", "sparsity", "plausibility")

LOF_EPS = 1e-12


def tcv(results: list[CfResult]) -> float:
    """Percentage of counterfactuals that flipped the prediction."""
    if not results:
        raise ValueError("empty result list")
    return 100.0 * sum(r.flipped for r in results) / len(results)


def proximity(query: np.ndarray, x_cf: np.ndarray) -> float:
    """L1 distance normalized by cell count."""
    query = np.asarray(query, dtype=np.float64)
    x_cf = np.asarray(x_cf, dtype=np.float64)
    if query.shape != x_cf.shape:
        raise ValueError(f"shape mismatch: {query.shape} vs {x_cf.shape}")
    return float(np.abs(x_cf - query).sum() / query.size)


def sparsity(query: np.ndarray, x_cf: np.ndarray, tau: float = 1e-6) -> float:
    """Fraction of cells modified by more than ``tau``."""
    query = np.asarray(query, dtype=np.float64)
    x_cf = np.asarray(x_cf, dtype=np.float64)
    if query.shape != x_cf.shape:
        raise ValueError(f"shape mismatch: {query.shape} vs {x_cf.shape}")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return float((np.abs(x_cf - query) > tau).mean())


def _knn(dists: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    """Indices within the k-distance (ties included) and the k-distance."""
    order = np.argsort(dists, kind="stable")
    k_dist = dists[order[k - 1]]
    members = np.nonzero(dists <= k_dist)[0]
    return members, float(k_dist)


def lof(point: np.ndarray, baseline: np.ndarray, k: int) -> float:
    """Local outlier factor of ``point`` against ``baseline`` rows.

    Standard density formulation: reach-dist_k(a, b) = max(k-distance(b),
    d(a, b)); local reachability density is the inverse mean reach-dist
    over the neighborhood (floored, so duplicate-heavy data stays finite);
    the factor is the mean neighbor-to-point density ratio. Values above 1
    mean the point sits in a sparser region than its neighbors.
    """
    point = np.asarray(point, dtype=np.float64).ravel()
    baseline = np.asarray(baseline, dtype=np.float64)
    baseline = baseline.reshape(len(baseline), -1)
    m = len(baseline)
    if not 1 <= k < m:
        raise ValueError(f"need 1 <= k < |baseline|, got k={k}, |baseline|={m}")

    # Pairwise distances inside the baseline, and point-to-baseline.
    pair = np.sqrt(np.maximum(((baseline[:, None, :] - baseline[None, :, :]) ** 2).sum(-1), 0.0))
    p_dist = np.sqrt(((baseline - point) ** 2).sum(-1))

    k_dists = np.empty(m)
    neighborhoods: list[np.ndarray] = []
    for i in range(m):
        d = pair[i].copy()
        d[i] = np.inf  # a baseline member is not its own neighbor
        members, k_d = _knn(d, k)
        k_dists[i] = k_d
        neighborhoods.append(members)

    def lrd_of(members: np.ndarray, dists: np.ndarray) -> float:
        reach = np.maximum(k_dists[members], dists[members])
        return 1.0 / max(float(reach.mean()), LOF_EPS)

    lrd_base = np.array([lrd_of(neighborhoods[i], pair[i]) for i in range(m)])
    point_members, _ = _knn(p_dist, k)
    lrd_point = lrd_of(point_members, p_dist)
    return float((lrd_base[point_members] / lrd_point).mean())


def plausibility(
    cf_points: list[np.ndarray] | np.ndarray,
    baseline: MtsDataset | np.ndarray,
    k: int = 5,
    theta: float = 1.0,
) -> float:
    """Fraction of counterfactuals whose outlier factor exceeds ``theta``."""
    if isinstance(baseline, MtsDataset):
        base = baseline.values_array().reshape(len(baseline), -1)
    else:
        base = np.asarray(baseline, dtype=np.float64).reshape(len(baseline), -1)
    points = [np.asarray(p, dtype=np.float64).ravel() for p in cf_points]
    if not points:
        raise ValueError("no counterfactual points")
    outliers = sum(lof(p, base, k) > theta for p in points)
    return outliers / len(points)


def robustness(p_cf: float, desired: int) -> tuple[float, float]:
    """(probability of the undesired class, distance from the boundary).

    The first value is the headline number (lower is better); the second
    is the |p - 0.5| convention (higher is better). Both are reported.
    """
    if not 0.0 < p_cf < 1.0:
        raise ValueError(f"p_cf must be in (0, 1), got {p_cf}")
    p_report = p_cf if desired == 0 else 1.0 - p_cf
    return float(p_report), float(abs(p_cf - 0.5))


@dataclass
class MetricsReport:
    """Mean and population standard deviation per metric across runs."""

    stats: dict[str, tuple[float, float]]
    values: dict[str, list[float]]
    n_runs: int

    def mean(self, metric: str) -> float:
        return self.stats[metric][0]

    def std(self, metric: str) -> float:
        return self.stats[metric][1]


def aggregate(runs: list[dict[str, float]]) -> MetricsReport:
    """Aggregate per-run metric dicts; single runs report zero deviation."""
    if not runs:
        raise ValueError("no runs to aggregate")
    keys = list(runs[0].keys())
    values = {k: [float(r[k]) for r in runs] for k in keys}
    stats = {}
    for k, vals in values.items():
        arr = np.array(vals)
        stats[k] = (float(arr.mean()), float(arr.std()))  # population std
    return MetricsReport(stats=stats, values=values, n_runs=len(runs))


def evaluate_run(
    results: list[CfResult],
    queries: dict[str, np.ndarray],
    baseline: MtsDataset,
    cfg: RunConfig,
) -> dict[str, float]:
    """All per-run metrics for one results file against its test split."""
    if not results:
        raise ValueError("empty result list")
    desired = 1 - QUERIED_LABEL
    prox, spars, probs, bdists = [], [], [], []
    cf_points = []
    for r in results:
        q = queries[r.id]
        prox.append(proximity(q, r.x_cf))
        spars.append(sparsity(q, r.x_cf, cfg.sparsity_tau))
        p_rep, bdist = robustness(r.p_cf, desired)
        probs.append(p_rep)
        bdists.append(bdist)
        cf_points.append(r.x_cf)
    return {
        "tcv": tcv(results),
        "robustness": float(np.mean(probs)),
        "proximity": float(np.mean(prox)),
        "sparsity": float(np.mean(spars)),
        "plausibility": plausibility(cf_points, baseline, cfg.lof.k, cfg.lof.theta),
        "boundary_dist": float(np.mean(bdists)),
    }


def noise_stability(
    queries: list,
    bundle,
    pool,
    classifier,
    cfg: RunConfig,
    scales: list[float],
    seed: int,
) -> dict[float, float]:
    """Mean undesired-class probability per input-noise scale.

    Gaussian noise is added to the generator input only; the residual is
    still applied to the clean query. Scale 0 reproduces the noiseless run.
    """
    from .cfgen.training import generate_batch

    desired = 1 - QUERIED_LABEL
    out = {}
    for scale in scales:
        results = generate_batch(
            queries, bundle, pool, classifier, cfg, noise_scale=scale, noise_seed=seed
        )
        out[float(scale)] = float(
            np.mean([robustness(r.p_cf, desired)[0] for r in results])
        )
    return out
