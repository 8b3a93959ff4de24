"""CSV writers with round-trip float formatting and minimal SVG quick-looks."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


_W, _H, _PAD = 640, 400, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_LABEL_COLORS = {
    "PEN": "#4c72b0", "REB": "#dd8452", "DEC1": "#55a868", "DEC2": "#c44e52",
    "SP": "#4c72b0", "SB": "#dd8452", "TB": "#55a868", "TPplus": "#c44e52", "TPminus": "#8172b3",
    "Unresolved": "#bbbbbb",
}


def _scale(lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return lambda z: a + (z - lo) * (b - a) / span


def _frame(title: str, xlabel: str, ylabel: str, xlim, ylim) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" height="{_H - 2 * _PAD}" fill="none" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle">{title}</text>',
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{_H / 2}" text-anchor="middle" transform="rotate(-90 14 {_H / 2})">{ylabel}</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 15}" text-anchor="middle">{xlim[0]:.4g}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 15}" text-anchor="middle">{xlim[1]:.4g}</text>',
        f'<text x="{_PAD - 4}" y="{_H - _PAD}" text-anchor="end">{ylim[0]:.4g}</text>',
        f'<text x="{_PAD - 4}" y="{_PAD + 4}" text-anchor="end">{ylim[1]:.4g}</text>',
    ]
    return out


def svg_lines(path: str | Path, x, series: dict[str, np.ndarray], title: str = "", xlabel: str = "",
              ylabel: str = "") -> Path:
    """Line plot of each named series against ``x``."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.zeros(1)
    xlim = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
    ylim = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    sx = _scale(*xlim, _PAD, _W - _PAD)
    sy = _scale(*ylim, _H - _PAD, _PAD)
    out = _frame(title, xlabel, ylabel, xlim, ylim)
    for k, (name, y) in enumerate(zip(series, ys)):
        col = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{_W - _PAD - 4}" y="{_PAD + 16 + 14 * k}" text-anchor="end" fill="{col}">{name}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path


def svg_labels(path: str | Path, xs, ys, labels, title: str = "", xlabel: str = "", ylabel: str = "") -> Path:
    """Heat map of categorical labels on a rectilinear grid (``labels[i, j]`` at ``xs[j], ys[i]``)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    labels = np.asarray(labels, dtype=object)
    xlim = (float(xs.min()), float(xs.max()))
    ylim = (float(ys.min()), float(ys.max()))
    sx = _scale(*xlim, _PAD, _W - _PAD)
    sy = _scale(*ylim, _H - _PAD, _PAD)
    cw = (_W - 2 * _PAD) / max(len(xs), 1)
    ch = (_H - 2 * _PAD) / max(len(ys), 1)
    out = _frame(title, xlabel, ylabel, xlim, ylim)
    for i, yv in enumerate(ys):
        for j, xv in enumerate(xs):
            col = _LABEL_COLORS.get(str(labels[i, j]), "#000000")
            out.append(f'<rect x="{sx(xv) - cw / 2:.2f}" y="{sy(yv) - ch / 2:.2f}" width="{cw:.2f}" '
                       f'height="{ch:.2f}" fill="{col}"/>')
    present = [lab for lab in _LABEL_COLORS if lab in set(map(str, labels.ravel()))]
    for k, lab in enumerate(present):
        out.append(f'<text x="{_W - 4}" y="{_PAD + 14 * k}" text-anchor="end" fill="{_LABEL_COLORS[lab]}">{lab}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
