"""Minimal self-contained SVG line charts (no plotting dependency).

Renders the same (t, left_error, right_error) series schema the CSV export
and the dashboard use.
"""

from __future__ import annotations

from .errors import ValidationError

_W, _H = 720, 360
_ML, _MR, _MT, _MB = 60, 20, 30, 45
_COLORS = ("#c0392b", "#2471a3")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / n
    return [lo + i * step for i in range(n + 1)]


def line_chart_svg(
    t: list[float],
    series: dict[str, list[float]],
    title: str,
    x_label: str = "time (s)",
    y_label: str = "error (deg)",
) -> str:
    """An SVG document with one polyline per named series."""
    if not t or not series:
        raise ValidationError("cannot chart an empty series")
    for name, ys in series.items():
        if len(ys) != len(t):
            raise ValidationError(f"series {name!r} length does not match the time axis")
    x0, x1 = min(t), max(t)
    y0 = min(min(ys) for ys in series.values())
    y1 = max(max(ys) for ys in series.values())
    y0 = min(y0, 0.0)
    if y1 <= y0:
        y1 = y0 + 1.0
    if x1 <= x0:
        x1 = x0 + 1.0
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def sx(x: float) -> float:
        return _ML + (x - x0) / (x1 - x0) * plot_w

    def sy(y: float) -> float:
        return _MT + plot_h - (y - y0) / (y1 - y0) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for xv in _ticks(x0, x1):
        px = sx(xv)
        parts.append(
            f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" y2="{_MT + plot_h}" stroke="#eee"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{_MT + plot_h + 14}" text-anchor="middle">{xv:.3g}</text>'
        )
    for yv in _ticks(y0, y1):
        py = sy(yv)
        parts.append(
            f'<line x1="{_ML}" y1="{py:.1f}" x2="{_ML + plot_w}" y2="{py:.1f}" stroke="#eee"/>'
        )
        parts.append(
            f'<text x="{_ML - 6}" y="{py + 3:.1f}" text-anchor="end">{yv:.3g}</text>'
        )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#888"/>'
    )
    for i, (name, ys) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(t, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{points}"/>'
        )
        parts.append(
            f'<text x="{_ML + plot_w - 6}" y="{_MT + 14 + 14 * i}" text-anchor="end" '
            f'fill="{color}">{name}</text>'
        )
    parts.append(
        f'<text x="{_ML + plot_w / 2}" y="{_H - 10}" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{_MT + plot_h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MT + plot_h / 2})">{y_label}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
