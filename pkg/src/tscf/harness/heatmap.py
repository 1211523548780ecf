"""Residual-magnitude heatmaps as standalone SVG grids."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..cfgen.results import CfResult

__all__ = ["render_heatmap"]

CELL = 12  # pixels per cell
PAD = 2


def render_heatmap(result: CfResult, path: str | Path) -> None:
    """One rect per cell; opacity is |residual| / max |residual|, so an
    all-zero residual renders pure white."""
    residual = np.asarray(result.residual, dtype=np.float64)
    v_dim, t_len = residual.shape
    peak = float(np.abs(residual).max())
    width = t_len * CELL + 2 * PAD
    height = v_dim * CELL + 2 * PAD

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for v in range(v_dim):
        for t in range(t_len):
            opacity = abs(residual[v, t]) / peak if peak > 0 else 0.0
            if opacity == 0.0:
                continue
            x = PAD + t * CELL
            y = PAD + v * CELL
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                f'fill="#1f3b73" fill-opacity="{opacity:.4f}"/>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
