"""Static SVG line charts for sweep results.

Hand-rolled rather than delegated to a plotting library so the output is
a pure function of the numbers: byte-identical across runs and safe to
diff in tests.
"""

from __future__ import annotations

import math

from .expressivity import LayerSweepResult

__all__ = ["sweep_chart"]

_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]

_WIDTH, _HEIGHT = 840, 480
_MARGIN = {"left": 70, "right": 190, "top": 40, "bottom": 55}


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def sweep_chart(result: LayerSweepResult, title: str = "Expressivity across layers") -> str:
    """Render one polyline per attribute over layer index.

    Each curve shows the mean expressivity with a +/-1 standard deviation
    band; the legend lists attribute names in input order.
    """
    layers = result.layer_names
    attrs = result.attribute_names
    means = [[cell.mean for cell in row] for row in result.grid]  # [layer][attr]
    stds = [[cell.std for cell in row] for row in result.grid]

    lo = min(means[i][j] - stds[i][j] for i in range(len(layers)) for j in range(len(attrs)))
    hi = max(means[i][j] + stds[i][j] for i in range(len(layers)) for j in range(len(attrs)))
    pad = 0.05 * (hi - lo) or 0.5
    lo, hi = lo - pad, hi + pad

    x0, y0 = _MARGIN["left"], _MARGIN["top"]
    plot_w = _WIDTH - _MARGIN["left"] - _MARGIN["right"]
    plot_h = _HEIGHT - _MARGIN["top"] - _MARGIN["bottom"]

    def xpos(i: int) -> float:
        if len(layers) == 1:
            return x0 + plot_w / 2.0
        return x0 + plot_w * i / (len(layers) - 1)

    def ypos(v: float) -> float:
        return y0 + plot_h * (1.0 - (v - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{x0 + plot_w / 2:.1f}" y="24" text-anchor="middle" font-size="16">'
        f"{title}</text>",
    ]

    for tick in _nice_ticks(lo, hi):
        y = ypos(tick)
        parts.append(
            f'<line x1="{x0}" y1="{y:.2f}" x2="{x0 + plot_w}" y2="{y:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">'
            f"{_fmt(tick)}</text>"
        )
    for i, name in enumerate(layers):
        x = xpos(i)
        parts.append(
            f'<line x1="{x:.2f}" y1="{y0 + plot_h}" x2="{x:.2f}" y2="{y0 + plot_h + 5}" '
            f'stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{y0 + plot_h + 20}" text-anchor="middle" font-size="11">'
            f"{name}</text>"
        )
    parts.append(
        f'<line x1="{x0}" y1="{y0 + plot_h}" x2="{x0 + plot_w}" y2="{y0 + plot_h}" '
        f'stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y0 + plot_h}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{x0 + plot_w / 2:.1f}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-size="13">layer</text>'
    )
    parts.append(
        f'<text x="18" y="{y0 + plot_h / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {y0 + plot_h / 2:.1f})">expressivity (nats)</text>'
    )

    for j, attr in enumerate(attrs):
        color = _PALETTE[j % len(_PALETTE)]
        upper = [(xpos(i), ypos(means[i][j] + stds[i][j])) for i in range(len(layers))]
        lower = [(xpos(i), ypos(means[i][j] - stds[i][j])) for i in range(len(layers))]
        band = " ".join(f"{x:.2f},{y:.2f}" for x, y in upper + lower[::-1])
        parts.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.15"/>')
        line = " ".join(f"{xpos(i):.2f},{ypos(means[i][j]):.2f}" for i in range(len(layers)))
        parts.append(
            f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for i in range(len(layers)):
            parts.append(
                f'<circle cx="{xpos(i):.2f}" cy="{ypos(means[i][j]):.2f}" r="3" '
                f'fill="{color}"/>'
            )
        ly = y0 + 16 + 18 * j
        lx = x0 + plot_w + 20
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{lx + 30}" y="{ly}" font-size="12">{attr}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
