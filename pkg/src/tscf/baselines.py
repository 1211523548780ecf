"""Comparison methods that need no generator: nearest-unlike-neighbor
search and greedy entropy-ranked window substitution.

The GAN-family baselines (full-instance tanh output, plain two-head
residual, rectified sparse residual) are the config variants handled by
the training module; see ``tscf.cfgen.config.resolve_variant``.
"""

from __future__ import annotations

import numpy as np

from .cfgen.config import VariantSwitches, resolve_variant
from .cfgen.results import CfResult
from .data import MtsDataset, MtsInstance

__all__ = ["find_nun", "nun_substitute_cf", "VariantSwitches", "resolve_variant"]


def find_nun(query: MtsInstance, train: MtsDataset, classifier) -> tuple[MtsInstance, int]:
    """Nearest training instance whose predicted class differs from the
    query's, by flattened L2. Ties break to the smaller index."""
    values = train.values_array()
    preds = (classifier.predict_proba(values) > 0.5).astype(np.int64)
    query_pred = int(classifier.predict_proba(query.values[None])[0] > 0.5)
    unlike = np.nonzero(preds != query_pred)[0]
    if len(unlike) == 0:
        raise ValueError("no training instances with a different predicted class")
    d = np.linalg.norm(values[unlike].reshape(len(unlike), -1) - query.values.ravel(), axis=1)
    best = unlike[int(np.argmin(d))]  # argmin takes the first minimum
    return train[best], int(best)


def _windows(t_len: int, window_len: int) -> list[tuple[int, int]]:
    """Non-overlapping (start, length) windows tiling [0, T)."""
    return [(s, min(window_len, t_len - s)) for s in range(0, t_len, window_len)]


def _binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-(p * np.log2(p) + (1 - p) * np.log2(1 - p)))


def nun_substitute_cf(
    query: MtsInstance,
    nun: MtsInstance,
    classifier,
    window_len: int,
    max_segments: int,
) -> CfResult:
    """Replace entropy-ranked windows of the query with the neighbor's values.

    Windows are fixed-length, non-overlapping, span all signals, and are
    ranked by the binary entropy of the classifier's probability when the
    window is isolated (everything else zeroed). Substitution proceeds in
    rank order until the prediction flips; if the budget runs out the
    neighbor itself is returned, so validity never drops.
    """
    v_dim, t_len = query.values.shape
    if window_len < 1 or window_len > t_len:
        raise ValueError(f"window_len must be in [1, {t_len}]")
    if max_segments < 0:
        raise ValueError("max_segments must be >= 0")

    p_orig = float(classifier.predict_proba(query.values[None])[0])
    pred_orig = p_orig > 0.5

    windows = _windows(t_len, window_len)
    scores = []
    for start, length in windows:
        isolated = np.zeros_like(query.values)
        isolated[:, start : start + length] = query.values[:, start : start + length]
        p = float(classifier.predict_proba(isolated[None])[0])
        scores.append((-_binary_entropy(p), start, length))
    scores.sort()  # highest entropy first; ties to the smaller start

    x_cf = query.values.copy()
    flipped = False
    budget = min(max_segments, len(windows))
    for _, start, length in scores[:budget]:
        x_cf[:, start : start + length] = nun.values[:, start : start + length]
        p_now = float(classifier.predict_proba(x_cf[None])[0])
        if (p_now > 0.5) != pred_orig:
            flipped = True
            break
    if not flipped:
        x_cf = nun.values.copy()

    p_cf = float(classifier.predict_proba(x_cf[None])[0])
    residual = x_cf - query.values
    return CfResult.from_query(query.values, residual, p_orig, p_cf, query.id)
