"""Minimal dependency-free SVG output for quick visual checks."""

from __future__ import annotations

from html import escape
from typing import Mapping, Sequence

import numpy as np

_W, _H, _PAD = 480, 360, 48
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _scale(values: np.ndarray, lo_px: float, hi_px: float):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lambda v: lo_px + (np.asarray(v, dtype=float) - lo) / (hi - lo) * (hi_px - lo_px), lo, hi


def _frame(title: str, xlabel: str, ylabel: str, xr, yr) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="{_PAD}" y="{_PAD / 2}" width="{_W - 1.5 * _PAD}" height="{_H - 1.5 * _PAD}" fill="none" stroke="#444"/>',
        f'<text x="{_W / 2}" y="14" text-anchor="middle">{escape(title)}</text>',
        f'<text x="{_W / 2}" y="{_H - 6}" text-anchor="middle">{escape(xlabel)} [{xr[0]:.3g}, {xr[1]:.3g}]</text>',
        f'<text x="12" y="{_H / 2}" transform="rotate(-90 12 {_H / 2})" text-anchor="middle">'
        f"{escape(ylabel)} [{yr[0]:.3g}, {yr[1]:.3g}]</text>",
    ]


def scatter_svg(xs, ys, title: str = "", xlabel: str = "x", ylabel: str = "y", max_points: int = 5000) -> str:
    xs = np.asarray(xs, dtype=float)[:max_points]
    ys = np.asarray(ys, dtype=float)[:max_points]
    fx, *xr = _scale(xs, _PAD, _W - _PAD / 2)
    fy, *yr = _scale(ys, _H - _PAD, _PAD / 2)
    parts = _frame(title, xlabel, ylabel, xr, yr)
    parts += [
        f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="1.5" fill="#1f77b4" fill-opacity="0.6"/>'
        for cx, cy in zip(fx(xs), fy(ys))
    ]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def lines_svg(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "x",
    ylabel: str = "y",
) -> str:
    allx = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ally = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    fx, *xr = _scale(allx, _PAD, _W - _PAD / 2)
    fy, *yr = _scale(ally, _H - _PAD, _PAD / 2)
    parts = _frame(title, xlabel, ylabel, xr, yr)
    for i, (name, (x, y)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in zip(fx(x), fy(y)))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_W - _PAD}" y="{_PAD + 14 * i}" fill="{color}" text-anchor="end">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
