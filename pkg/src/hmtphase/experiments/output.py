"""CSV tables and bare-bones SVG line charts."""
from __future__ import annotations

import io
import math
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def to_csv(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    """Header plus one line per row, fixed column order, '\\n' line ends."""
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(format_value(row[c]) for c in columns) + "\n")
    return buf.getvalue()


def write_csv(path, rows: Iterable[Mapping], columns: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(rows, columns))


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")


def line_chart(series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
               title: str = "", xlabel: str = "", ylabel: str = "",
               logx: bool = False, width: int = 640, height: int = 420) -> str:
    """Minimal SVG line chart: axes, one polyline per series, a legend."""
    left, right, top, bottom = 70, 170, 40, 55
    pw, ph = width - left - right, height - top - bottom

    def tx(x):
        return math.log10(x) if logx else x

    xs = [tx(x) for xv, _ in series.values() for x in xv]
    ys = [y for _, yv in series.values() for y in yv if math.isfinite(y)]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(x):
        return left + (tx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(title)}</text>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        fy = y0 + (y1 - y0) * k / 4
        xpos = left + pw * k / 4
        ypos = top + ph * (1 - k / 4)
        xlab = f"{10 ** fx:.3g}" if logx else f"{fx:.3g}"
        out.append(f'<text x="{xpos:.1f}" y="{top + ph + 16}" text-anchor="middle">{xlab}</text>')
        out.append(f'<text x="{left - 6}" y="{ypos + 4:.1f}" text-anchor="end">{fy:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(ylabel)}</text>')
    for idx, (name, (xv, yv)) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xv, yv) if math.isfinite(y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + 14 + 18 * idx
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def error_sweep_chart(rows: Sequence[Mapping]) -> str:
    series: dict[str, tuple[list, list]] = {}
    for row in rows:
        tag = f"P={row['pilot_dbm']:g}dBm eps={row['epsilon']:g}"
        for kind, col in (("emp", "error_probability"), ("bound", "bound")):
            xs, ys = series.setdefault(f"{tag} {kind}", ([], []))
            xs.append(row["total_pilots"])
            ys.append(row[col])
    return line_chart(series, "Error probability vs pilots", "pilots N",
                      "probability", logx=True)


def rate_sweep_chart(rows: Sequence[Mapping]) -> str:
    series: dict[str, tuple[list, list]] = {}
    for row in rows:
        name = f"{row['method']} d0={row['distance_m']:g}m"
        xs, ys = series.setdefault(name, ([], []))
        xs.append(row["pilot_dbm"])
        ys.append(row["mean_rate"])
    return line_chart(series, "Achievable rate vs pilot power", "pilot power (dBm)",
                      "rate (bit/s/Hz)")
