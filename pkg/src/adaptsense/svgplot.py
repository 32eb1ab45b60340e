"""Minimal deterministic SVG line/scatter plots.

Self-contained on purpose: experiment outputs must be reproducible
byte-for-byte, and a hand-rolled writer avoids a rendering dependency
for what are simple diagnostic figures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

_PALETTE = ("#1f6fb2", "#d1495b", "#3a7d44", "#8d6a9f", "#c77b30")

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 28, 48


@dataclass(frozen=True)
class Series:
    label: str
    x: tuple
    y: tuple
    scatter: bool = False

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y lengths differ")


@dataclass(frozen=True)
class PlotSpec:
    title: str
    x_label: str
    y_label: str
    series: tuple[Series, ...] = ()
    log_y: bool = False


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def render_svg(spec: PlotSpec) -> str:
    """Render the plot spec to an SVG document string."""
    import math

    pts = [(x, y) for s in spec.series for x, y in zip(s.x, s.y)]
    if spec.log_y:
        pts = [(x, y) for x, y in pts if y > 0]
    if pts:
        xs, ys = zip(*pts)
        x_lo, x_hi = min(xs), max(xs)
        if spec.log_y:
            y_lo, y_hi = math.log10(min(ys)), math.log10(max(ys))
        else:
            y_lo, y_hi = min(ys), max(ys)
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        if spec.log_y:
            y = math.log10(y)
        return MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{spec.title}</text>',
    ]
    # axes
    x0, y0 = MARGIN_L, MARGIN_T + plot_h
    parts.append(f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" '
                 'stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{MARGIN_L + plot_w}" '
                 f'y2="{y0}" stroke="black"/>')
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" '
                     f'y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{y0 + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{_fmt(tx)}</text>')
    for ty in _ticks(y_lo, y_hi):
        disp = 10.0 ** ty if spec.log_y else ty
        py = MARGIN_T + plot_h - (ty - y_lo) / (y_hi - y_lo) * plot_h
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" '
                     f'y2="{_fmt(py)}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{_fmt(disp)}</text>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 10}" '
                 'text-anchor="middle" font-family="sans-serif" '
                 f'font-size="12">{spec.x_label}</text>')
    parts.append(f'<text x="14" y="{MARGIN_T + plot_h / 2}" '
                 'text-anchor="middle" font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 14 {MARGIN_T + plot_h / 2})">'
                 f'{spec.y_label}</text>')

    for i, series in enumerate(spec.series):
        color = _PALETTE[i % len(_PALETTE)]
        coords = [(sx(x), sy(y)) for x, y in zip(series.x, series.y)
                  if not (spec.log_y and y <= 0)]
        if series.scatter or len(coords) == 1:
            for px, py in coords:
                parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" '
                             f'fill="{color}"/>')
        elif coords:
            path = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in coords)
            parts.append(f'<polyline points="{path}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN_T + 14 + 16 * i
        lx = MARGIN_L + plot_w - 150
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
                     f'font-size="11">{series.label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, spec: PlotSpec) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(spec))
