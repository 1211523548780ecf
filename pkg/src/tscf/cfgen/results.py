"""Per-query counterfactual results and their line-JSON serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["CfResult", "write_results", "read_results"]


@dataclass
class CfResult:
    """One explained query: residual, counterfactual, and both probabilities."""

    id: str
    residual: np.ndarray  # (V, T)
    x_cf: np.ndarray  # (V, T), always exactly query + residual
    p_orig: float
    p_cf: float
    flipped: bool

    @classmethod
    def from_query(cls, query_values: np.ndarray, residual: np.ndarray,
                   p_orig: float, p_cf: float, query_id: str) -> "CfResult":
        residual = np.asarray(residual, dtype=np.float64)
        x_cf = np.asarray(query_values, dtype=np.float64) + residual
        flipped = (p_orig > 0.5) != (p_cf > 0.5)
        return cls(id=query_id, residual=residual, x_cf=x_cf,
                   p_orig=float(p_orig), p_cf=float(p_cf), flipped=bool(flipped))


def _residual_payload(residual: np.ndarray) -> dict:
    v, t = residual.shape
    nz = np.nonzero(residual)
    if len(nz[0]) * 2 < v * t:
        cells = [
            [int(a), int(b), float(residual[a, b])] for a, b in zip(nz[0], nz[1])
        ]
        return {"shape": [v, t], "sparse": cells}
    return {"shape": [v, t], "dense": residual.tolist()}


def _residual_from_payload(payload: dict) -> np.ndarray:
    v, t = payload["shape"]
    if "dense" in payload:
        return np.array(payload["dense"], dtype=np.float64).reshape(v, t)
    residual = np.zeros((v, t), dtype=np.float64)
    for a, b, val in payload["sparse"]:
        residual[a, b] = val
    return residual


def write_results(results: list[CfResult], path: str | Path) -> None:
    """One JSON object per line: {id, p_orig, p_cf, flipped, residual}."""
    with open(Path(path), "w") as fh:
        for r in results:
            obj = {
                "id": r.id,
                "p_orig": r.p_orig,
                "p_cf": r.p_cf,
                "flipped": r.flipped,
                "residual": _residual_payload(r.residual),
            }
            fh.write(json.dumps(obj) + "\n")


def read_results(path: str | Path, queries: dict[str, np.ndarray]) -> list[CfResult]:
    """Rebuild results against the query values they were generated from."""
    out = []
    with open(Path(path)) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            residual = _residual_from_payload(obj["residual"])
            if obj["id"] not in queries:
                raise ValueError(f"result id {obj['id']!r} not found among queries")
            out.append(
                CfResult(
                    id=obj["id"],
                    residual=residual,
                    x_cf=queries[obj["id"]] + residual,
                    p_orig=float(obj["p_orig"]),
                    p_cf=float(obj["p_cf"]),
                    flipped=bool(obj["flipped"]),
                )
            )
    return out
