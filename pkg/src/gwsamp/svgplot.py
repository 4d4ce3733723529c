"""Minimal self-contained SVG line plots (polylines, axes, legend).

Kept dependency-free on purpose: the experiment runners emit plots on
headless machines and the output must stay deterministic for fixed data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


@dataclass
class Series:
    x: list
    y: list
    label: str
    marker: bool = False  # draw circles (for single-point series)


@dataclass
class LinePlot:
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)
    width: int = 720
    height: int = 480

    def add(self, x, y, label: str, marker: bool = False) -> None:
        self.series.append(Series(list(map(float, x)), list(map(float, y)),
                                  label, marker))

    def render(self) -> str:
        w, h = self.width, self.height
        ml, mr, mt, mb = 74, 16, 34, 48
        pw, ph = w - ml - mr, h - mt - mb
        xs = [v for s in self.series for v in s.x]
        ys = [v for s in self.series for v in s.y if math.isfinite(v)]
        if not xs or not ys:
            xs, ys = [0.0, 1.0], [0.0, 1.0]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 <= x0:
            x1 = x0 + 1.0
        if y1 <= y0:
            y1 = y0 + 1.0

        def px(v):
            return ml + (v - x0) / (x1 - x0) * pw

        def py(v):
            return mt + (1.0 - (v - y0) / (y1 - y0)) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" '
               f'height="{h}" viewBox="0 0 {w} {h}">',
               f'<rect width="{w}" height="{h}" fill="white"/>',
               f'<text x="{w/2:.1f}" y="20" text-anchor="middle" '
               f'font-size="14" font-family="sans-serif">{self.title}</text>']
        # axes
        out.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt+ph}" '
                   'stroke="black"/>')
        out.append(f'<line x1="{ml}" y1="{mt+ph}" x2="{ml+pw}" y2="{mt+ph}" '
                   'stroke="black"/>')
        for tv in _ticks(x0, x1):
            tx = px(tv)
            out.append(f'<line x1="{tx:.1f}" y1="{mt+ph}" x2="{tx:.1f}" '
                       f'y2="{mt+ph+5}" stroke="black"/>')
            out.append(f'<text x="{tx:.1f}" y="{mt+ph+18}" text-anchor="middle" '
                       f'font-size="11" font-family="sans-serif">{_fmt_tick(tv)}</text>')
        for tv in _ticks(y0, y1):
            ty = py(tv)
            out.append(f'<line x1="{ml-5}" y1="{ty:.1f}" x2="{ml}" y2="{ty:.1f}" '
                       'stroke="black"/>')
            out.append(f'<text x="{ml-8}" y="{ty+4:.1f}" text-anchor="end" '
                       f'font-size="11" font-family="sans-serif">{_fmt_tick(tv)}</text>')
        out.append(f'<text x="{ml+pw/2:.1f}" y="{h-8}" text-anchor="middle" '
                   f'font-size="12" font-family="sans-serif">{self.xlabel}</text>')
        out.append(f'<text x="16" y="{mt+ph/2:.1f}" text-anchor="middle" '
                   f'font-size="12" font-family="sans-serif" '
                   f'transform="rotate(-90 16 {mt+ph/2:.1f})">{self.ylabel}</text>')
        # data
        for si, s in enumerate(self.series):
            color = _COLORS[si % len(_COLORS)]
            pts = [(px(a), py(b)) for a, b in zip(s.x, s.y) if math.isfinite(b)]
            if len(pts) > 1 and not s.marker:
                path = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
                out.append(f'<polyline points="{path}" fill="none" '
                           f'stroke="{color}" stroke-width="1.5"/>')
            else:
                for a, b in pts:
                    out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="4" '
                               f'fill="{color}"/>')
            ly = mt + 16 + 16 * si
            out.append(f'<line x1="{ml+pw-130}" y1="{ly-4}" x2="{ml+pw-105}" '
                       f'y2="{ly-4}" stroke="{color}" stroke-width="3"/>')
            out.append(f'<text x="{ml+pw-100}" y="{ly}" font-size="11" '
                       f'font-family="sans-serif">{s.label}</text>')
        out.append("</svg>")
        return "\n".join(out)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    span = hi - lo
    raw = span / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(t)
        t += step
    return out


def _fmt_tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e5 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:g}"
