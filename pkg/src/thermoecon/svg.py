"""Bare-bones SVG line charts: polylines, axes with end labels, a legend."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

WIDTH, HEIGHT = 720, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 50

# panel name -> (title, y label, columns)
SHEET_PANELS = {
    "potentials": ("Potentials", "potential", ("mu_H", "mu_L")),
    "production": ("Production vs demand", "flux", ("G", "G_D", "G_D_satisfied")),
    "recycling": ("Normalized recycling fluxes", "flux / X_L", ("F_HR_norm", "F_NR_norm")),
    "intensity": ("Intensity", "intensity", ("J_P", "J_P_max")),
}
ECON_PANELS = {
    "cycle": ("Wage share and employment", "rate", ("omega", "lam")),
    "output": ("Output", "Y", ("Y",)),
    "price": ("Price", "p", ("p",)),
}


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart(
    title: str,
    x: Sequence[float],
    series: Sequence[tuple[str, Sequence[Optional[float]]]],
    x_label: str = "t",
    y_label: str = "",
) -> str:
    """SVG text for a chart of ``series`` against ``x``; ``None`` points break a line."""
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    ys = [v for _, vals in series for v in vals if v is not None]
    x0, x1 = (min(x), max(x)) if x else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{LEFT + pw / 2}" y="{TOP - 15}" text-anchor="middle" font-size="16" font-family="sans-serif">'
        f"{escape(title)}</text>",
        f'<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}"/>'
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}"/></g>',
        '<g font-size="11" font-family="sans-serif">',
        f'<text x="{LEFT}" y="{TOP + ph + 15}" text-anchor="middle">{_fmt(x0)}</text>',
        f'<text x="{LEFT + pw}" y="{TOP + ph + 15}" text-anchor="middle">{_fmt(x1)}</text>',
        f'<text x="{LEFT - 5}" y="{TOP + ph}" text-anchor="end">{_fmt(y0)}</text>',
        f'<text x="{LEFT - 5}" y="{TOP + 4}" text-anchor="end">{_fmt(y1)}</text>',
        f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(x_label)}</text>',
        f'<text x="15" y="{TOP + ph / 2}" text-anchor="middle" transform="rotate(-90 15 {TOP + ph / 2})">'
        f"{escape(y_label)}</text>",
        "</g>",
    ]
    for k, (label, vals) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        # split at undefined points so gaps stay visible
        segments, cur = [], []
        for xi, v in zip(x, vals):
            if v is None:
                if cur:
                    segments.append(cur)
                cur = []
            else:
                cur.append(f"{px(xi):.2f},{py(v):.2f}")
        if cur:
            segments.append(cur)
        for seg in segments:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(seg)}"/>')
        ly = TOP + 10 + 18 * k
        out.append(
            f'<line x1="{LEFT + pw + 15}" y1="{ly}" x2="{LEFT + pw + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
            f'<text x="{LEFT + pw + 45}" y="{ly + 4}" font-size="12" font-family="sans-serif">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_panels(record, out_dir) -> list[Path]:
    """One SVG per panel group available in ``record``, named ``<run>-<panel>.svg``."""
    out_dir = Path(out_dir)
    written = []
    x = record.t
    for panel, (title, y_label, cols) in {**SHEET_PANELS, **ECON_PANELS}.items():
        cols = [c for c in cols if c in record.columns]
        if not cols:
            continue
        text = line_chart(f"{record.name}: {title}", x, [(c, record[c]) for c in cols], y_label=y_label)
        path = out_dir / f"{record.name}-{panel}.svg"
        path.write_text(text)
        written.append(path)
    return written
