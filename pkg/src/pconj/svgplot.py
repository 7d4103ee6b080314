"""Tiny deterministic SVG line charts.

Hand-rolled on purpose: the output must be byte-stable across runs and
machines, so every coordinate is formatted with a fixed number of
decimals and nothing depends on fonts, locales, or a plotting stack.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

__all__ = ["Series", "render_line_chart"]

# viewport and margins, px
_WIDTH = 720.0
_HEIGHT = 480.0
_LEFT = 64.0
_RIGHT = 160.0
_TOP = 40.0
_BOTTOM = 56.0

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
)


class Series:
    """One named polyline: parallel x and y sequences."""

    def __init__(self, name: str, xs: Sequence[float], ys: Sequence[float]):
        if len(xs) != len(ys):
            raise ValueError("xs and ys must have equal length")
        if not xs:
            raise ValueError("series must contain at least one point")
        self.name = name
        self.xs = [float(x) for x in xs]
        self.ys = [float(y) for y in ys]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    s = f"{v:.4g}"
    return s


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if step >= raw:
            break
    first = step * math.ceil(lo / step)
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return ticks


def render_line_chart(
    series: Sequence[Series],
    *,
    x_label: str = "",
    y_label: str = "",
    title: str = "",
    x_ticks: Sequence[tuple[float, str]] | None = None,
    y_min: float | None = None,
    y_max: float | None = None,
) -> str:
    """Return a complete standalone SVG document as a string."""
    if not series:
        raise ValueError("need at least one series")
    xs_all = [x for s in series for x in s.xs]
    ys_all = [y for s in series for y in s.ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_lo = min(ys_all) if y_min is None else y_min
    y_hi = max(ys_all) if y_max is None else y_max
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    # small headroom so curves don't sit on the frame
    pad = 0.04 * (y_hi - y_lo)
    if y_min is None:
        y_lo -= pad
    if y_max is None:
        y_hi += pad

    plot_w = _WIDTH - _LEFT - _RIGHT
    plot_h = _HEIGHT - _TOP - _BOTTOM

    def px(x: float) -> float:
        return _LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH:.0f}" '
        f'height="{_HEIGHT:.0f}" viewBox="0 0 {_WIDTH:.0f} {_HEIGHT:.0f}">'
    )
    out.append(f'<rect width="{_WIDTH:.0f}" height="{_HEIGHT:.0f}" fill="white"/>')
    out.append(
        f'<rect x="{_fmt(_LEFT)}" y="{_fmt(_TOP)}" width="{_fmt(plot_w)}" '
        f'height="{_fmt(plot_h)}" fill="none" stroke="#333333" stroke-width="1"/>'
    )
    if title:
        out.append(
            f'<text x="{_fmt(_LEFT + plot_w / 2)}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15" fill="#111111">{title}</text>'
        )

    if x_ticks is None:
        x_ticks = [(t, _tick_label(t)) for t in _nice_ticks(x_lo, x_hi)]
    for xv, lab in x_ticks:
        if not x_lo - 1e-9 <= xv <= x_hi + 1e-9:
            continue
        xpx = px(xv)
        out.append(
            f'<line x1="{_fmt(xpx)}" y1="{_fmt(_TOP + plot_h)}" x2="{_fmt(xpx)}" '
            f'y2="{_fmt(_TOP + plot_h + 5)}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(xpx)}" y="{_fmt(_TOP + plot_h + 20)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" fill="#111111">{lab}</text>'
        )
    for yv in _nice_ticks(y_lo, y_hi):
        ypx = py(yv)
        out.append(
            f'<line x1="{_fmt(_LEFT - 5)}" y1="{_fmt(ypx)}" x2="{_fmt(_LEFT)}" '
            f'y2="{_fmt(ypx)}" stroke="#333333" stroke-width="1"/>'
        )
        out.append(
            f'<line x1="{_fmt(_LEFT)}" y1="{_fmt(ypx)}" x2="{_fmt(_LEFT + plot_w)}" '
            f'y2="{_fmt(ypx)}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(_LEFT - 9)}" y="{_fmt(ypx + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="#111111">{_tick_label(yv)}</text>'
        )

    if x_label:
        out.append(
            f'<text x="{_fmt(_LEFT + plot_w / 2)}" y="{_fmt(_HEIGHT - 12)}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="13" '
            f'fill="#111111">{x_label}</text>'
        )
    if y_label:
        cx = 18.0
        cy = _TOP + plot_h / 2
        out.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" fill="#111111" '
            f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{y_label}</text>'
        )

    for idx, s in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s.xs, s.ys))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        for x, y in zip(s.xs, s.ys):
            out.append(
                f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="2.4" fill="{color}"/>'
            )
        ly = _TOP + 14 + 18 * idx
        lx = _LEFT + plot_w + 12
        out.append(
            f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 4)}" x2="{_fmt(lx + 22)}" '
            f'y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="1.8"/>'
        )
        out.append(
            f'<text x="{_fmt(lx + 28)}" y="{_fmt(ly)}" font-family="sans-serif" '
            f'font-size="12" fill="#111111">{s.name}</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
