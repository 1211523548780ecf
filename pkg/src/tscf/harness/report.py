"""Paper-style results tables: CSV for humans, JSON twin for machines."""

from __future__ import annotations

import json
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from ..metrics import METRIC_NAMES, MetricsReport

__all__ = ["fmt_mean_std", "render_report"]


def _round3(x: float) -> str:
    return str(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def fmt_mean_std(mean: float, std: float) -> str:
    """Three decimals, half-up: (0.0115, 0.0089) -> '0.012 ± 0.009'."""
    return f"{_round3(mean)} ± {_round3(std)}"


def render_report(rows: list[tuple[str, MetricsReport]], out_base: str | Path) -> None:
    """Write ``<out_base>.csv`` and ``<out_base>.json``.

    CSV columns are the five headline metrics as mean ± std; the JSON twin
    carries raw per-run values and the boundary-distance column as well.
    """
    if not rows:
        raise ValueError("no report rows")
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)

    header = ["method"] + [m.upper() if m == "tcv" else m.capitalize() for m in METRIC_NAMES]
    lines = [",".join(header)]
    for label, report in rows:
        cells = [label] + [fmt_mean_std(*report.stats[m]) for m in METRIC_NAMES]
        lines.append(",".join(cells))
    out_base.with_suffix(".csv").write_text("\n".join(lines) + "\n")

    payload = {
        "rows": [
            {
                "method": label,
                "n_runs": report.n_runs,
                "metrics": {
                    name: {
                        "mean": report.stats[name][0],
                        "std": report.stats[name][1],
                        "values": report.values[name],
                    }
                    for name in report.stats
                },
            }
            for label, report in rows
        ]
    }
    out_base.with_suffix(".json").write_text(json.dumps(payload, indent=1) + "\n")
