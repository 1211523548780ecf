"""Multivariate time-series data model, dataset codec, and synthetic data.

A dataset directory holds ``meta.json`` plus one CSV per split
(``train.csv`` / ``test.csv``). Each CSV row is one instance, signal-major:
``label,v0t0,...,v0t{T-1},v1t0,...`` with values written as round-trippable
decimal text, so ``load_dataset(save_dataset(d))`` is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DatasetFormatError",
    "DatasetMeta",
    "MtsInstance",
    "MtsDataset",
    "SynthConfig",
    "load_dataset",
    "save_dataset",
    "synth_dataset",
    "split_by_label",
    "z_normalize",
]


class DatasetFormatError(ValueError):
    """A dataset file or row does not match the documented layout."""


@dataclass(frozen=True)
class DatasetMeta:
    name: str
    n_signals: int
    length: int
    classes: tuple[int, ...] = (0, 1)


@dataclass(eq=False)
class MtsInstance:
    """One multivariate series: a (V, T) float64 matrix with a binary label.

    All indexing in this package is 0-based: signal v in [0, V) and time
    step t in [0, T).
    """

    values: np.ndarray
    label: int
    id: str

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"instance {self.id!r}: values must be a (V, T) matrix")
        v, t = self.values.shape
        if v < 1 or t < 2:
            raise ValueError(
                f"instance {self.id!r}: need V >= 1 and T >= 2, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"instance {self.id!r}: non-finite values")
        if self.label not in (0, 1):
            raise ValueError(f"instance {self.id!r}: label must be 0 or 1, got {self.label}")

    @property
    def n_signals(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MtsInstance):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and np.array_equal(self.values, other.values)
        )


class MtsDataset:
    """An ordered, immutable collection of instances sharing (V, T)."""

    def __init__(self, instances: list[MtsInstance], meta: DatasetMeta):
        if not instances:
            raise ValueError("dataset must contain at least one instance")
        for inst in instances:
            if inst.values.shape != (meta.n_signals, meta.length):
                raise ValueError(
                    f"instance {inst.id!r} has shape {inst.values.shape}, "
                    f"meta says ({meta.n_signals}, {meta.length})"
                )
        self.instances = list(instances)
        self.meta = meta

    @property
    def n(self) -> int:
        return len(self.instances)

    @property
    def labels(self) -> np.ndarray:
        return np.array([inst.label for inst in self.instances], dtype=np.int64)

    def values_array(self) -> np.ndarray:
        """All instances stacked into an (n, V, T) array."""
        return np.stack([inst.values for inst in self.instances])

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def __getitem__(self, i: int) -> MtsInstance:
        return self.instances[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MtsDataset):
            return NotImplemented
        return self.meta == other.meta and self.instances == other.instances


@dataclass(frozen=True)
class SynthConfig:
    """Configuration for the bump-on-noise synthetic generator.

    Class 0 is Gaussian noise(0, noise_sigma); class 1 adds bump_amplitude
    on signal ``bump_signal`` over ``bump_span`` = (start, length), 0-based.
    """

    n_train: int
    n_test: int
    v: int
    t: int
    bump_signal: int
    bump_span: tuple[int, int]
    bump_amplitude: float
    noise_sigma: float
    seed: int
    name: str = "synth"

    def __post_init__(self) -> None:
        if self.v < 1 or self.t < 2:
            raise ValueError(f"degenerate dims V={self.v}, T={self.t}")
        if self.n_train < 2 or self.n_test < 1:
            raise ValueError("need n_train >= 2 and n_test >= 1")
        if not 0 <= self.bump_signal < self.v:
            raise ValueError(f"bump_signal {self.bump_signal} outside [0, {self.v})")
        start, length = self.bump_span
        if length < 1 or start < 0 or start + length > self.t:
            raise ValueError(f"bump_span {self.bump_span} outside [0, {self.t})")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def _parse_row(line: str, meta: DatasetMeta, inst_id: str) -> MtsInstance:
    fields = line.split(",")
    expected = 1 + meta.n_signals * meta.length
    if len(fields) != expected:
        raise DatasetFormatError(
            f"{inst_id}: row has {len(fields)} fields, expected {expected} "
            f"(1 + V*T = 1 + {meta.n_signals}*{meta.length})"
        )
    try:
        label = int(fields[0])
    except ValueError as exc:
        raise DatasetFormatError(f"{inst_id}: unparseable label {fields[0]!r}") from exc
    if label not in (0, 1):
        raise DatasetFormatError(f"{inst_id}: label {label} outside {{0, 1}}")
    try:
        flat = np.array([float(f) for f in fields[1:]], dtype=np.float64)
    except ValueError as exc:
        raise DatasetFormatError(f"{inst_id}: unparseable value ({exc})") from exc
    if not np.all(np.isfinite(flat)):
        raise DatasetFormatError(f"{inst_id}: non-finite value in row")
    values = flat.reshape(meta.n_signals, meta.length)
    return MtsInstance(values=values, label=label, id=inst_id)


def load_dataset(path: str | Path, split: str = "train") -> MtsDataset:
    """Load one split of a dataset directory.

    Instance ids are positional (``{name}-{split}-{row}``); they are not
    stored in the CSV.
    """
    path = Path(path)
    meta_path = path / "meta.json"
    if not meta_path.is_file():
        raise FileNotFoundError(f"missing {meta_path}")
    raw = json.loads(meta_path.read_text())
    try:
        meta = DatasetMeta(
            name=raw["name"],
            n_signals=int(raw["n_signals"]),
            length=int(raw["length"]),
            classes=tuple(raw["classes"]),
        )
    except KeyError as exc:
        raise DatasetFormatError(f"meta.json missing field {exc}") from exc
    csv_path = path / f"{split}.csv"
    if not csv_path.is_file():
        raise FileNotFoundError(f"missing {csv_path}")
    instances = []
    with open(csv_path, newline="") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            instances.append(_parse_row(line, meta, f"{meta.name}-{split}-{i:04d}"))
    if not instances:
        raise DatasetFormatError(f"{csv_path} contains no instances")
    return MtsDataset(instances, meta)


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest digit string that round-trips.
    return repr(float(x))


def save_dataset(dataset: MtsDataset, path: str | Path, split: str = "train") -> None:
    """Write one split (plus meta.json) into a dataset directory."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = dataset.meta
    meta_obj = {
        "name": meta.name,
        "n_signals": meta.n_signals,
        "length": meta.length,
        "classes": list(meta.classes),
    }
    (path / "meta.json").write_text(json.dumps(meta_obj, indent=2) + "\n")
    with open(path / f"{split}.csv", "w", newline="") as fh:
        for inst in dataset:
            row = [str(inst.label)] + [_fmt(x) for x in inst.values.ravel()]
            fh.write(",".join(row) + "\n")


def synth_dataset(cfg: SynthConfig) -> tuple[MtsDataset, MtsDataset]:
    """Generate (train, test) splits, fully determined by ``cfg.seed``.

    Labels alternate 0,1,0,1,... so both splits stay balanced.
    """
    rng = np.random.default_rng(cfg.seed)
    meta = DatasetMeta(name=cfg.name, n_signals=cfg.v, length=cfg.t)
    start, length = cfg.bump_span

    def make_split(n: int, split: str) -> MtsDataset:
        instances = []
        for i in range(n):
            label = i % 2
            values = rng.normal(0.0, cfg.noise_sigma, size=(cfg.v, cfg.t))
            if label == 1:
                values[cfg.bump_signal, start : start + length] += cfg.bump_amplitude
            instances.append(
                MtsInstance(values=values, label=label, id=f"{cfg.name}-{split}-{i:04d}")
            )
        return MtsDataset(instances, meta)

    return make_split(cfg.n_train, "train"), make_split(cfg.n_test, "test")


def split_by_label(dataset: MtsDataset, queried_label: int) -> tuple[MtsDataset, MtsDataset]:
    """Partition into (queried, reference) by label, order-preserving."""
    if queried_label not in (0, 1):
        raise ValueError(f"queried_label must be 0 or 1, got {queried_label}")
    queried = [inst for inst in dataset if inst.label == queried_label]
    reference = [inst for inst in dataset if inst.label != queried_label]
    if not queried:
        raise ValueError(f"no instances with label {queried_label}")
    if not reference:
        raise ValueError(f"no instances with label {1 - queried_label}")
    return MtsDataset(queried, dataset.meta), MtsDataset(reference, dataset.meta)


def z_normalize(dataset: MtsDataset) -> MtsDataset:
    """Per-instance, per-signal z-normalization (constant signals map to 0)."""
    instances = []
    for inst in dataset:
        mean = inst.values.mean(axis=1, keepdims=True)
        std = inst.values.std(axis=1, keepdims=True)
        std = np.where(std < 1e-12, 1.0, std)
        instances.append(
            MtsInstance(values=(inst.values - mean) / std, label=inst.label, id=inst.id)
        )
    return MtsDataset(instances, dataset.meta)
