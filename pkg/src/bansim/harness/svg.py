"""Standalone SVG line/scatter plots with deterministic byte output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .table import ResultTable

_WIDTH, _HEIGHT = 640, 420
_MARGIN = 56
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


@dataclass
class PlotSpec:
    x: str
    y: list[str]
    title: str = ""
    log_y: bool = False
    markers: bool = False


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def emit_svg(table: ResultTable, spec: PlotSpec) -> str:
    xs = [float(v) for v in table.column(spec.x)]
    series = {}
    for name in spec.y:
        ys = [float(v) for v in table.column(name)]
        if spec.log_y:
            for i, v in enumerate(ys):
                if v <= 0:
                    raise ValueError(
                        f"log-y plot: column {name!r} row {i} has "
                        f"non-positive value {v}"
                    )
            ys = [math.log10(v) for v in ys]
        series[name] = ys
    if not xs:
        raise ValueError("empty table")
    x_lo, x_hi = min(xs), max(xs)
    all_y = [v for ys in series.values() for v in ys]
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x: float) -> float:
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * (_WIDTH - 2 * _MARGIN)

    def py(y: float) -> float:
        return _HEIGHT - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (_HEIGHT - 2 * _MARGIN)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="#333"/>',
    ]
    if spec.title:
        parts.append(
            f'<text x="{_WIDTH // 2}" y="28" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{spec.title}</text>'
        )
    for tx in _ticks(x_lo, x_hi):
        parts.append(
            f'<text x="{px(tx):.2f}" y="{_HEIGHT - _MARGIN + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f"{tx:.4g}</text>"
        )
    for ty in _ticks(y_lo, y_hi):
        label = f"1e{ty:.2f}" if spec.log_y else f"{ty:.4g}"
        parts.append(
            f'<text x="{_MARGIN - 6}" y="{py(ty):.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{label}</text>'
        )
    for idx, (name, ys) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        if spec.markers:
            for x, y in zip(xs, ys):
                parts.append(
                    f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" '
                    f'fill="{color}"/>'
                )
        parts.append(
            f'<text x="{_WIDTH - _MARGIN - 4}" y="{_MARGIN + 16 + 14 * idx}" '
            f'text-anchor="end" font-family="sans-serif" font-size="11" '
            f'fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
