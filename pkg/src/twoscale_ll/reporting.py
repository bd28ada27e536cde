"""Deterministic CSV and SVG report emission for run records and tables."""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .dynamics import RunRecord

CSV_HEADER = "t,lambda,mx,my,mz,energy,residual,dist_h2"


def _fmt(x: float) -> str:
    # repr round-trips doubles exactly and is locale-independent
    return repr(float(x))


def record_to_csv(rec: RunRecord) -> str:
    lines = [CSV_HEADER]
    for i in range(len(rec.times)):
        lines.append(",".join(_fmt(v) for v in (
            rec.times[i], rec.lam[i], rec.mean[i, 0], rec.mean[i, 1],
            rec.mean[i, 2], rec.energy[i], rec.residual[i],
            rec.dist_h2[i])))
    return "\n".join(lines) + "\n"


def table_to_csv(columns: dict[str, Sequence]) -> str:
    names = list(columns)
    n = len(columns[names[0]])
    lines = [",".join(names)]
    for i in range(n):
        lines.append(",".join(_fmt(columns[k][i]) for k in names))
    return "\n".join(lines) + "\n"


def emit_report(records: dict[str, RunRecord], fmt: str, path: str) -> list[str]:
    """Write one file per named record; returns the written paths."""
    if not records:
        raise ValueError("no records to emit")
    os.makedirs(path, exist_ok=True)
    written = []
    for name, rec in records.items():
        if fmt == "csv":
            fn = os.path.join(path, f"{name}.csv")
            with open(fn, "w", newline="\n") as f:
                f.write(record_to_csv(rec))
        elif fmt == "svg":
            fn = os.path.join(path, f"{name}.svg")
            with open(fn, "w", newline="\n") as f:
                f.write(svg_line_chart(
                    [(name, rec.times, rec.dist_h2)], log_y=True,
                    x_label="t", y_label="dist_h2"))
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        written.append(fn)
    return written


def svg_line_chart(series: list[tuple[str, np.ndarray, np.ndarray]],
                   log_y: bool = False, x_label: str = "x",
                   y_label: str = "y", width: int = 640,
                   height: int = 420) -> str:
    """Standalone SVG with one polyline per series. Deterministic output:
    same data gives byte-identical files."""
    pad = 50
    xs_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    finite = np.isfinite(xs_all) & np.isfinite(ys_all)
    if log_y:
        finite &= ys_all > 0
    if not np.any(finite):
        raise ValueError("no finite data to plot")
    x_min, x_max = float(np.min(xs_all[finite])), float(np.max(xs_all[finite]))
    yv = np.log10(ys_all[finite]) if log_y else ys_all[finite]
    y_min, y_max = float(np.min(yv)), float(np.max(yv))
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0

    def sx(x):
        return pad + (x - x_min) / (x_max - x_min) * (width - 2 * pad)

    def sy(y):
        yy = np.log10(y) if log_y else y
        return height - pad - (yy - y_min) / (y_max - y_min) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
              "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
        f'y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" '
        f'stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 12}" font-size="12" '
        f'text-anchor="middle">{x_label}</text>',
        f'<text x="14" y="{height // 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {height // 2})">{y_label}</text>',
    ]
    for idx, (name, xs, ys) in enumerate(series):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        ok = np.isfinite(xs) & np.isfinite(ys)
        if log_y:
            ok &= ys > 0
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}"
                       for x, y in zip(xs[ok], ys[ok]))
        color = colors[idx % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - pad + 4}" y="{pad + 14 * idx + 10}" '
                     f'font-size="11" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
