"""Minimal SVG line charts of experiment grids (no plotting dependency)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

from dpleak.analysis import ExperimentRow

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 30, 60
Y_MIN, Y_MAX = 0.4, 1.0
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(rows: Sequence[ExperimentRow], title: str = "") -> str:
    """One solid (theory) and one dashed (empirical) polyline per budget."""
    if not rows:
        raise ValueError("cannot chart an empty grid")
    ms = sorted({r.m for r in rows})
    m_lo, m_hi = ms[0], ms[-1]
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def x_of(m: int) -> float:
        if m_hi == m_lo:
            return LEFT + plot_w / 2
        return LEFT + (m - m_lo) / (m_hi - m_lo) * plot_w

    def y_of(r: float) -> float:
        r = min(max(r, Y_MIN), Y_MAX)
        return TOP + (Y_MAX - r) / (Y_MAX - Y_MIN) * plot_h

    budgets: list[float] = []
    for r in rows:
        if r.budget not in budgets:
            budgets.append(r.budget)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    x0, y0 = LEFT, TOP + plot_h
    out.append(
        f'<path d="M{x0},{TOP} V{y0} H{LEFT + plot_w}" stroke="black" fill="none"/>'
    )
    for k in range(7):
        v = Y_MIN + k * 0.1
        y = _fmt(y_of(v))
        out.append(f'<line x1="{x0 - 5}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>')
        out.append(
            f'<text x="{x0 - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
            f'font-size="11">{v:.1f}</text>'
        )
    for m in ms:
        x = _fmt(x_of(m))
        out.append(f'<line x1="{x}" y1="{y0}" x2="{x}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{y0 + 18}" text-anchor="middle" font-size="10">{m}</text>')
    out.append(
        f'<text x="{LEFT + plot_w / 2}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-size="12">number of samples m</text>'
    )
    out.append(
        f'<text x="18" y="{TOP + plot_h / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {TOP + plot_h / 2})">success rate R</text>'
    )

    for i, b in enumerate(budgets):
        color = PALETTE[i % len(PALETTE)]
        cells = sorted((r for r in rows if r.budget == b), key=lambda r: r.m)
        theory = " ".join(f"{_fmt(x_of(r.m))},{_fmt(y_of(r.r_theory))}" for r in cells)
        empirical = " ".join(f"{_fmt(x_of(r.m))},{_fmt(y_of(r.r_empirical))}" for r in cells)
        out.append(
            f'<polyline class="theory" data-budget="{b:.6g}" points="{theory}" '
            f'fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<polyline class="empirical" data-budget="{b:.6g}" points="{empirical}" '
            f'fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
        ly = TOP + 10 + 16 * i
        lx = WIDTH - RIGHT + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{lx + 30}" y="{ly}" dominant-baseline="middle" font-size="11">'
            f'budget {b:.3g}</text>'
        )
    ly = TOP + 10 + 16 * len(budgets) + 10
    out.append(
        f'<text x="{WIDTH - RIGHT + 15}" y="{ly}" font-size="10">solid: theory, dashed: empirical</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(rows: Sequence[ExperimentRow], path: str | Path, title: str = "") -> Path:
    path = Path(path)
    text = render_svg(rows, title)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write chart to {path}: {exc}") from exc
    return path
