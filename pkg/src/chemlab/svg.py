"""Hand-rolled SVG line charts for diagnostic time series.

Deliberately tiny: axes, ticks, polylines, a legend, optional log-scale y.
No plotting stack; output is a standalone .svg file.
"""

from __future__ import annotations

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_W, _H = 800, 480
_ML, _MR, _MT, _MB = 70, 20, 20, 50


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / max(count - 1, 1)))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= count:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(t)
        t += step
    return out


def line_chart(
    t: list[float],
    series: dict[str, list[float]],
    title: str = "",
    log_y: bool = False,
) -> str:
    """Render named series against a shared abscissa; returns SVG text."""
    if not t or not series:
        raise ValueError("need at least one point and one series")
    ys = [y for vals in series.values() for y in vals]
    if log_y:
        ys = [y for y in ys if y > 0]
        if not ys:
            raise ValueError("log-scale chart needs positive values")
        ylo, yhi = math.log10(min(ys)), math.log10(max(ys))
    else:
        ylo, yhi = min(ys), max(ys)
    if yhi <= ylo:
        yhi = ylo + 1.0
    tlo, thi = min(t), max(t)
    if thi <= tlo:
        thi = tlo + 1.0

    def px(tv: float) -> float:
        return _ML + (tv - tlo) / (thi - tlo) * (_W - _ML - _MR)

    def py(yv: float) -> float:
        if log_y:
            yv = math.log10(yv) if yv > 0 else ylo
        return _H - _MB - (yv - ylo) / (yhi - ylo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        'stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.0f}" y="{_MT - 5}" text-anchor="middle" '
            f'font-size="13">{title}</text>'
        )
    for tv in _ticks(tlo, thi):
        x = px(tv)
        parts.append(
            f'<line x1="{x:.1f}" y1="{_H - _MB}" x2="{x:.1f}" y2="{_H - _MB + 5}" '
            'stroke="black"/>'
            f'<text x="{x:.1f}" y="{_H - _MB + 18}" text-anchor="middle" '
            f'font-size="11">{tv:.4g}</text>'
        )
    yticks = _ticks(ylo, yhi)
    for yv in yticks:
        y = py(10.0**yv) if log_y else py(yv)
        label = f"1e{yv:.3g}" if log_y else f"{yv:.4g}"
        parts.append(
            f'<line x1="{_ML - 5}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" '
            'stroke="black"/>'
            f'<text x="{_ML - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-size="11">{label}</text>'
        )
    for i, (name, vals) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = []
        for tv, yv in zip(t, vals):
            if log_y and yv <= 0:
                continue
            pts.append(f"{px(tv):.2f},{py(yv):.2f}")
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{" ".join(pts)}"/>'
        )
        ly = _MT + 16 + 16 * i
        parts.append(
            f'<line x1="{_W - _MR - 150}" y1="{ly}" x2="{_W - _MR - 120}" '
            f'y2="{ly}" stroke="{color}" stroke-width="2"/>'
            f'<text x="{_W - _MR - 114}" y="{ly + 4}" font-size="12">{name}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.0f}" y="{_H - 12}" '
        'text-anchor="middle" font-size="12">t</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)
