"""Minimal deterministic SVG line charts.

Hand-rolled so that identical inputs produce byte-identical documents: fixed
float formatting, no timestamps, no generated ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class Series:
    label: str
    xs: list
    ys: list


@dataclass
class AxisSpec:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logy: bool = False


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f")

_WIDTH, _HEIGHT = 760, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 160, 40, 55


def _escape(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, target: int = 6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float):
    lo_exp = math.floor(math.log10(lo))
    hi_exp = math.ceil(math.log10(hi))
    span = hi_exp - lo_exp
    step = max(1, math.ceil(span / 8))
    return [10.0 ** e for e in range(lo_exp, hi_exp + 1, step)]


def _tick_label(v: float, logy: bool) -> str:
    if logy:
        exp = round(math.log10(v))
        return f"1e{exp}"
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:g}"


def render_svg(series, axis: AxisSpec) -> str:
    """A self-contained SVG document: axes, ticks, legend, one polyline per
    series. Deterministic for identical inputs."""
    series = list(series)
    if not series or any(len(s.xs) == 0 for s in series):
        raise ValueError("every series must be nonempty")
    for s in series:
        if len(s.xs) != len(s.ys):
            raise ValueError(f"series {s.label!r} has mismatched x/y lengths")

    all_x = [float(x) for s in series for x in s.xs]
    all_y = [float(y) for s in series for y in s.ys]
    if axis.logy and min(all_y) <= 0:
        raise ValueError("log-scale y requires strictly positive values")

    x_lo, x_hi = min(all_x), max(all_x)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if axis.logy:
        y_ticks = _log_ticks(min(all_y), max(all_y))
        y_lo, y_hi = math.log10(y_ticks[0]), math.log10(y_ticks[-1])
        if y_hi == y_lo:
            y_hi = y_lo + 1.0

        def y_pos(v):
            return math.log10(v)
    else:
        y_ticks = _nice_ticks(min(all_y), max(all_y))
        pad = 0.05 * (max(all_y) - min(all_y) or 1.0)
        y_lo, y_hi = min(all_y) - pad, max(all_y) + pad

        def y_pos(v):
            return v

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x):
        return _MARGIN_L + plot_w * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return _MARGIN_T + plot_h * (1.0 - (y_pos(y) - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_MARGIN_L + plot_w / 2:.0f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{_escape(axis.title)}</text>',
    ]

    # frame
    parts.append(
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>'
    )

    for t in _nice_ticks(x_lo, x_hi):
        if t < x_lo - 1e-12 or t > x_hi + 1e-12:
            continue
        x = px(t)
        parts.append(f'<line x1="{_fmt(x)}" y1="{_MARGIN_T + plot_h}" x2="{_fmt(x)}" '
                     f'y2="{_MARGIN_T + plot_h + 5}" stroke="#333333"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{_MARGIN_T + plot_h + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{_tick_label(t, False)}</text>')

    for t in y_ticks:
        y = py(t)
        parts.append(f'<line x1="{_MARGIN_L - 5}" y1="{_fmt(y)}" x2="{_MARGIN_L}" '
                     f'y2="{_fmt(y)}" stroke="#333333"/>')
        parts.append(f'<line x1="{_MARGIN_L}" y1="{_fmt(y)}" x2="{_MARGIN_L + plot_w}" '
                     f'y2="{_fmt(y)}" stroke="#dddddd"/>')
        parts.append(f'<text x="{_MARGIN_L - 9}" y="{_fmt(y + 4)}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">'
                     f'{_tick_label(t, axis.logy)}</text>')

    parts.append(f'<text x="{_MARGIN_L + plot_w / 2:.0f}" y="{_HEIGHT - 12}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="12">'
                 f'{_escape(axis.xlabel)}</text>')
    parts.append(f'<text x="18" y="{_MARGIN_T + plot_h / 2:.0f}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.0f})">'
                 f'{_escape(axis.ylabel)}</text>')

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        points = " ".join(f"{_fmt(px(float(x)))},{_fmt(py(float(y)))}"
                          for x, y in zip(s.xs, s.ys))
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        ly = _MARGIN_T + 14 + 18 * i
        lx = _MARGIN_L + plot_w + 12
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
                     f'font-size="11">{_escape(s.label)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
