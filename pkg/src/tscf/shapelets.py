"""Offline shapelet discovery and query-time subsequence extraction.

Discovery walks every training signal with a greedy salient-point selection
(largest perpendicular distance to the line between already-selected
neighbors), harvests candidate subsequences spanning three consecutive
selected points, scores each candidate by the information gain of its
minimum-subsequence-distance profile over the training set, and keeps the
top ``g`` per class. Distances are complexity-corrected Euclidean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .data import MtsDataset, MtsInstance

__all__ = [
    "Subsequence",
    "Shapelet",
    "ShapeletPool",
    "MaskedSeries",
    "complexity",
    "cid",
    "msd",
    "information_gain",
    "reconstruction_distance",
    "extract_pips",
    "discover_pool",
    "extract_discriminative",
    "mask_series",
]

CF_EPS = 1e-8


@dataclass
class Subsequence:
    """A contiguous slice of one signal: values, source signal, 0-based span."""

    values: np.ndarray
    source_signal: int
    start: int
    length: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.length < 2 or len(self.values) != self.length:
            raise ValueError(f"subsequence length must be >= 2, got {self.length}")
        if self.start < 0:
            raise ValueError("start must be >= 0")


@dataclass
class Shapelet:
    subsequence: Subsequence
    class_label: int
    ig: float
    osp: float


class ShapeletPool:
    """Top-g shapelets per class, sorted by descending information gain."""

    def __init__(self, per_class: dict[int, list[Shapelet]], g: int):
        self.per_class = {int(c): list(sh) for c, sh in per_class.items()}
        self.g = g

    def shapelets_for(self, label: int) -> list[Shapelet]:
        shapelets = self.per_class.get(int(label), [])
        if not shapelets:
            raise ValueError(f"pool has no shapelets for class {label}")
        return shapelets

    def save(self, path: str | Path) -> None:
        rows = []
        for label in sorted(self.per_class):
            for sh in self.per_class[label]:
                rows.append(
                    {
                        "class": label,
                        "values": [float(x) for x in sh.subsequence.values],
                        "source_signal": sh.subsequence.source_signal,
                        "start": sh.subsequence.start,
                        "length": sh.subsequence.length,
                        "ig": sh.ig,
                        "osp": sh.osp,
                    }
                )
        Path(path).write_text(json.dumps({"g": self.g, "shapelets": rows}, indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ShapeletPool":
        obj = json.loads(Path(path).read_text())
        per_class: dict[int, list[Shapelet]] = {}
        for row in obj["shapelets"]:
            sub = Subsequence(
                values=np.array(row["values"], dtype=np.float64),
                source_signal=int(row["source_signal"]),
                start=int(row["start"]),
                length=int(row["length"]),
            )
            per_class.setdefault(int(row["class"]), []).append(
                Shapelet(sub, int(row["class"]), float(row["ig"]), float(row["osp"]))
            )
        return cls(per_class, int(obj["g"]))


@dataclass
class MaskedSeries:
    """A series zeroed outside the kept regions (signal, start, length)."""

    values: np.ndarray
    regions: list[tuple[int, int, int]]
    source_id: str

    def indicator(self) -> np.ndarray:
        ind = np.zeros_like(self.values)
        for sig, start, length in self.regions:
            ind[sig, start : start + length] = 1.0
        return ind


def complexity(seq: np.ndarray) -> float:
    """Sum of absolute first differences; 0 for constant or length-1 input."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 1 or seq.size == 0:
        raise ValueError("complexity needs a nonempty 1-D sequence")
    return float(np.abs(np.diff(seq)).sum())


def cid(a: np.ndarray, b: np.ndarray) -> float:
    """Complexity-corrected Euclidean distance between equal-length vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise ValueError("cid needs length >= 2")
    ed = float(np.sqrt(((a - b) ** 2).sum()))
    ca, cb = complexity(a), complexity(b)
    cf = (max(ca, cb) + CF_EPS) / (min(ca, cb) + CF_EPS)
    return ed * cf


def msd(signal: np.ndarray, s: Subsequence | np.ndarray) -> tuple[float, int]:
    """Minimum correction-scaled distance of ``s`` over all windows of ``signal``.

    Returns (distance, best_start), earliest start on ties.
    """
    values = s.values if isinstance(s, Subsequence) else np.asarray(s, dtype=np.float64)
    signal = np.asarray(signal, dtype=np.float64)
    l = len(values)
    if l > signal.size:
        raise ValueError(f"subsequence length {l} exceeds signal length {signal.size}")
    windows = sliding_window_view(signal, l)
    ed = np.sqrt(((windows - values) ** 2).sum(axis=1))
    c_win = np.abs(np.diff(windows, axis=1)).sum(axis=1)
    c_s = complexity(values)
    cf = (np.maximum(c_win, c_s) + CF_EPS) / (np.minimum(c_win, c_s) + CF_EPS)
    dist = ed * cf
    j = int(np.argmin(dist))
    return float(dist[j]), j


def _entropy_bits(n1: np.ndarray | float, total: np.ndarray | float) -> np.ndarray | float:
    """Binary entropy (bits) of a class-1 count over a total; 0 when total == 0."""
    n1 = np.asarray(n1, dtype=np.float64)
    total = np.asarray(total, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, n1 / np.maximum(total, 1), 0.0)
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return np.where(total > 0, h, 0.0)


def information_gain(distances: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Best split of a distance profile by class entropy, in bits.

    The candidate thresholds are midpoints between consecutive distinct
    sorted distances; ties on gain break toward the smaller threshold.
    When every distance is identical there is no split: gain 0 at that
    common value.
    """
    distances = np.asarray(distances, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if distances.shape != labels.shape or distances.ndim != 1:
        raise ValueError("distances and labels must be equal-length vectors")
    n = distances.size
    if n < 2:
        raise ValueError("need at least 2 points")
    order = np.argsort(distances, kind="stable")
    d = distances[order]
    y = labels[order]
    total1 = int(y.sum())
    h_all = float(_entropy_bits(total1, n))
    cut = np.nonzero(np.diff(d) > 0)[0]
    if cut.size == 0:
        return 0.0, float(d[0])
    thresholds = (d[cut] + d[cut + 1]) / 2.0
    n_left = cut + 1
    n1_left = np.cumsum(y)[cut]
    n_right = n - n_left
    n1_right = total1 - n1_left
    h_split = (n_left / n) * _entropy_bits(n1_left, n_left) + (n_right / n) * _entropy_bits(
        n1_right, n_right
    )
    ig = h_all - h_split
    best = int(np.argmax(ig))  # thresholds ascend, argmax takes the first: smaller osp wins ties
    return float(max(ig[best], 0.0)), float(thresholds[best])


def reconstruction_distance(signal: np.ndarray, left: int, right: int, t: int) -> float:
    """Perpendicular distance from point (t, signal[t]) to the line through
    (left, signal[left]) and (right, signal[right])."""
    signal = np.asarray(signal, dtype=np.float64)
    if not left < t < right:
        raise ValueError(f"need left < t < right, got {left}, {t}, {right}")
    x1, y1 = float(left), float(signal[left])
    x2, y2 = float(right), float(signal[right])
    num = abs((y2 - y1) * (t - x1) - (x2 - x1) * (signal[t] - y1))
    den = float(np.hypot(x2 - x1, y2 - y1))
    return num / den


def _pip_sequence(signal: np.ndarray, k: int) -> list[int]:
    """Salient indices in selection order; starts with [0, T-1]."""
    signal = np.asarray(signal, dtype=np.float64)
    t_len = signal.size
    if not 2 <= k <= t_len:
        raise ValueError(f"k must be in [2, {t_len}], got {k}")
    selected = [0, t_len - 1]
    order = [0, t_len - 1]
    for _ in range(k - 2):
        best_t, best_d = -1, -1.0
        sel = sorted(selected)
        for left, right in zip(sel, sel[1:]):
            for t in range(left + 1, right):
                d = reconstruction_distance(signal, left, right, t)
                if d > best_d:  # ties keep the earliest index
                    best_d, best_t = d, t
        selected.append(best_t)
        order.append(best_t)
    return order


def extract_pips(signal: np.ndarray, k: int) -> list[int]:
    """The k most salient indices of a signal, sorted; always contains 0 and T-1.

    Greedy selection makes the result nested as k grows.
    """
    return sorted(_pip_sequence(signal, k))


def _candidate_spans(signal: np.ndarray, k_pips: int) -> list[tuple[int, int]]:
    """(start, end) spans covering three consecutive salient points, harvested
    as each new point is selected."""
    order = _pip_sequence(signal, k_pips)
    pips = order[:2]
    spans: list[tuple[int, int]] = []
    for p in order[2:]:
        pips.append(p)
        pips.sort()
        pos = pips.index(p)
        for z in range(3):
            a = pos - z
            if a >= 0 and a + 2 < len(pips):
                spans.append((pips[a], pips[a + 2]))
    return spans


def discover_pool(
    train: MtsDataset,
    k_pips: int,
    g: int,
    max_len: int | None = None,
) -> ShapeletPool:
    """Mine the top-g most class-discriminative subsequences per class.

    Deterministic: ties break by higher gain, then shorter length, then
    smaller (instance, signal, start).
    """
    if k_pips < 3:
        raise ValueError("k_pips must be >= 3 to produce candidates")
    labels = train.labels
    if len(set(labels.tolist())) < 2:
        raise ValueError("both classes must be present for discovery")
    values = train.values_array()  # (n, V, T)
    n, v_dim, t_len = values.shape

    # Harvest deduplicated candidates: (inst, signal, start, end).
    candidates: list[tuple[int, int, int, int]] = []
    seen: set[tuple[int, int, int, int]] = set()
    for i in range(n):
        for v in range(v_dim):
            for start, end in _candidate_spans(values[i, v], k_pips):
                length = end - start + 1
                if length < 2:
                    continue
                if max_len is not None and length > max_len:
                    continue
                key = (i, v, start, end)
                if key not in seen:
                    seen.add(key)
                    candidates.append(key)
    if not candidates:
        raise ValueError("no valid shapelet candidates (series too short?)")

    # Score each candidate by the information gain of its distance profile.
    # Sliding windows per (signal, length) are shared across candidates.
    window_cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def windows_for(v: int, length: int) -> tuple[np.ndarray, np.ndarray]:
        key = (v, length)
        if key not in window_cache:
            w = sliding_window_view(values[:, v, :], length, axis=1)  # (n, T-l+1, l)
            c = np.abs(np.diff(w, axis=2)).sum(axis=2)
            window_cache[key] = (w, c)
        return window_cache[key]

    scored: list[tuple[float, int, int, int, int, float]] = []
    for i, v, start, end in candidates:
        length = end - start + 1
        cand = values[i, v, start : end + 1]
        w, c_win = windows_for(v, length)
        ed = np.sqrt(((w - cand) ** 2).sum(axis=2))
        c_s = complexity(cand)
        cf = (np.maximum(c_win, c_s) + CF_EPS) / (np.minimum(c_win, c_s) + CF_EPS)
        profile = (ed * cf).min(axis=1)
        ig, osp = information_gain(profile, labels)
        scored.append((ig, i, v, start, length, osp))

    per_class: dict[int, list[Shapelet]] = {0: [], 1: []}
    for label in (0, 1):
        pool = [s for s in scored if labels[s[1]] == label]
        pool.sort(key=lambda s: (-s[0], s[4], s[1], s[2], s[3]))
        for ig, i, v, start, length, osp in pool[:g]:
            sub = Subsequence(values[i, v, start : start + length].copy(), v, start, length)
            per_class[label].append(Shapelet(sub, label, ig, osp))
    return ShapeletPool(per_class, g)


def extract_discriminative(
    query: MtsInstance, pool: ShapeletPool, label: int
) -> list[Subsequence]:
    """Best-matching window of the query for every pooled shapelet of ``label``."""
    result = []
    for sh in pool.shapelets_for(label):
        sig = sh.subsequence.source_signal
        length = sh.subsequence.length
        _, j = msd(query.values[sig], sh.subsequence)
        result.append(Subsequence(query.values[sig, j : j + length].copy(), sig, j, length))
    return result


def mask_series(query: MtsInstance, regions: list[Subsequence]) -> MaskedSeries:
    """Keep the query inside the union of regions, zero everything else."""
    v_dim, t_len = query.values.shape
    indicator = np.zeros((v_dim, t_len), dtype=bool)
    for reg in regions:
        if not 0 <= reg.source_signal < v_dim:
            raise ValueError(f"region signal {reg.source_signal} out of bounds")
        if reg.start + reg.length > t_len:
            raise ValueError(
                f"region [{reg.start}, {reg.start + reg.length}) exceeds T={t_len}"
            )
        indicator[reg.source_signal, reg.start : reg.start + reg.length] = True
    values = np.where(indicator, query.values, 0.0)
    merged: list[tuple[int, int, int]] = []
    for v in range(v_dim):
        row = indicator[v]
        t = 0
        while t < t_len:
            if row[t]:
                run = t
                while t < t_len and row[t]:
                    t += 1
                merged.append((v, run, t - run))
            else:
                t += 1
    return MaskedSeries(values=values, regions=merged, source_id=query.id)
