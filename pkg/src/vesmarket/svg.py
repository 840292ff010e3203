"""Minimal static SVG line chart for share trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
LEFT, RIGHT, TOP, BOTTOM = 70, 30, 40, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass(frozen=True)
class Series:
    label: str
    times: np.ndarray
    share: np.ndarray
    t_star: float | None = None
    share_at_t_star: float | None = None
    t_2star: float | None = None
    share_at_t_2star: float | None = None


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render(series: Sequence[Series], title: str = "AI revenue share") -> str:
    """Share-vs-time chart; circle marks sigma=1, cross marks sigma=2."""
    t_max = max(float(s.times[-1]) for s in series)
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def px(t: float) -> float:
        return LEFT + plot_w * t / t_max

    def py(r: float) -> float:
        return TOP + plot_h * (1.0 - r)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + plot_h}" x2="{LEFT + plot_w}" y2="{TOP + plot_h}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" stroke="black"/>',
    ]
    for r in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = _fmt(py(r))
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(
            f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="11">{r:g}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        t = frac * t_max
        x = _fmt(px(t))
        out.append(f'<line x1="{x}" y1="{TOP + plot_h}" x2="{x}" y2="{TOP + plot_h + 5}" stroke="black"/>')
        out.append(
            f'<text x="{x}" y="{TOP + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:g}</text>'
        )
    out.append(
        f'<text x="{LEFT + plot_w / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" '
        'font-family="sans-serif" font-size="12">t (years)</text>'
    )

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{_fmt(px(t))},{_fmt(py(r))}" for t, r in zip(s.times, s.share))
        out.append(
            f'<polyline class="share" data-label="{escape(s.label)}" fill="none" '
            f'stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        if s.t_star is not None and s.t_star <= t_max and s.share_at_t_star is not None:
            out.append(
                f'<circle class="t-star" data-t="{s.t_star!r}" cx="{_fmt(px(s.t_star))}" '
                f'cy="{_fmt(py(s.share_at_t_star))}" r="5" fill="none" stroke="black"/>'
            )
        if s.t_2star is not None and s.t_2star <= t_max and s.share_at_t_2star is not None:
            cx, cy = px(s.t_2star), py(s.share_at_t_2star)
            out.append(
                f'<path class="t-2star" data-t="{s.t_2star!r}" '
                f'd="M{_fmt(cx - 5)},{_fmt(cy - 5)} L{_fmt(cx + 5)},{_fmt(cy + 5)} '
                f'M{_fmt(cx - 5)},{_fmt(cy + 5)} L{_fmt(cx + 5)},{_fmt(cy - 5)}" '
                'fill="none" stroke="black"/>'
            )
        out.append(
            f'<text x="{WIDTH - RIGHT - 5}" y="{TOP + 14 * (i + 1)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{escape(s.label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
