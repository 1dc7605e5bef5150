"""Self-contained SVG heatmap cascades for sweep results.

No imaging dependency: the document is assembled from fixed-format strings,
so rendering the same results twice yields byte-identical output. The value
to color mapping is a documented piecewise-linear interpolation between the
anchor colors below.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .sweep import CellResult

# anchor tables: (position in [0,1], r, g, b)
COLOR_MAPS = {
    "viridis": (
        (0.000, 68, 1, 84),
        (0.125, 72, 40, 120),
        (0.250, 62, 74, 137),
        (0.375, 49, 104, 142),
        (0.500, 38, 130, 142),
        (0.625, 31, 158, 137),
        (0.750, 53, 183, 121),
        (0.875, 109, 205, 89),
        (1.000, 253, 231, 37),
    ),
    "gray": (
        (0.0, 0, 0, 0),
        (1.0, 255, 255, 255),
    ),
}

CELL_W = 18
CELL_H = 18
MARGIN_LEFT = 64
MARGIN_TOP = 34
MARGIN_BOTTOM = 52
PANEL_GAP = 26
LEGEND_W = 74
LEGEND_STEPS = 32


@dataclass(frozen=True)
class RenderSpec:
    """Presentation options for the cascade renderer."""

    cmap: str = "viridis"
    vmin: float = 0.0
    vmax: float = 1.0
    overlay_angles: tuple[float, ...] = ()
    inputs: tuple[str, ...] = ()
    out: str | None = None

    def __post_init__(self):
        if self.cmap not in COLOR_MAPS:
            raise InputError(f"unknown color map {self.cmap!r}; have {sorted(COLOR_MAPS)}")
        if not self.vmin < self.vmax:
            raise InputError("vmin must be smaller than vmax")


def color_hex(value: float, vmin: float, vmax: float, cmap: str) -> str:
    """Map a value to #rrggbb by piecewise-linear anchor interpolation."""
    anchors = COLOR_MAPS[cmap]
    x = (value - vmin) / (vmax - vmin)
    x = 0.0 if x < 0 else (1.0 if x > 1 else x)
    for (p0, r0, g0, b0), (p1, r1, g1, b1) in zip(anchors, anchors[1:]):
        if x <= p1:
            f = 0.0 if p1 == p0 else (x - p0) / (p1 - p0)
            return "#%02x%02x%02x" % (
                round(r0 + f * (r1 - r0)),
                round(g0 + f * (g1 - g0)),
                round(b0 + f * (b1 - b0)),
            )
    _, r, g, b = anchors[-1]
    return "#%02x%02x%02x" % (r, g, b)


def _grid_axes(cells: list[CellResult]) -> tuple[list[float], list[float]]:
    thetas = sorted({c.theta for c in cells})
    lams = sorted({c.lam for c in cells})
    seen = {(c.theta, c.lam) for c in cells}
    if len(cells) != len(thetas) * len(lams) or len(seen) != len(cells):
        raise InputError("results do not cover a full rectangular (theta, lambda) grid")
    return thetas, lams


def render_heatmap(spec: RenderSpec, results: list[CellResult]) -> str:
    """Render one panel per shots value, cells colored by strict accuracy.

    Dashed vertical lines mark the overlay angles in every panel; a shared
    legend maps the color scale. Output is a standalone SVG document with no
    external references.
    """
    if not results:
        raise InputError("no results to render")
    panels = sorted({c.shots for c in results})
    by_shots = {n: [c for c in results if c.shots == n] for n in panels}
    axes = {n: _grid_axes(by_shots[n]) for n in panels}
    thetas, lams = axes[panels[0]]
    for n in panels[1:]:
        if axes[n] != (thetas, lams):
            raise InputError("panels disagree on the (theta, lambda) grid")
    for angle in spec.overlay_angles:
        if not thetas[0] <= angle <= thetas[-1]:
            raise InputError(f"overlay angle {angle:g} outside rendered theta range")

    panel_w = len(thetas) * CELL_W
    panel_h = len(lams) * CELL_H
    total_w = MARGIN_LEFT + len(panels) * (panel_w + PANEL_GAP) + LEGEND_W
    total_h = MARGIN_TOP + panel_h + MARGIN_BOTTOM
    depth = results[0].depth
    trials = results[0].trials

    col_of = {t: i for i, t in enumerate(thetas)}
    row_of = {x: i for i, x in enumerate(lams)}

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" '
        f'viewBox="0 0 {total_w} {total_h}" font-family="monospace" font-size="11">',
        f'<rect x="0" y="0" width="{total_w}" height="{total_h}" fill="white"/>',
    ]

    for p, shots in enumerate(panels):
        x0 = MARGIN_LEFT + p * (panel_w + PANEL_GAP)
        y0 = MARGIN_TOP
        parts.append(f'<text x="{x0}" y="{y0 - 12}" fill="black">N = {shots}</text>')
        for cell in by_shots[shots]:
            cx = x0 + col_of[cell.theta] * CELL_W
            # lambda increases upward
            cy = y0 + (len(lams) - 1 - row_of[cell.lam]) * CELL_H
            fill = color_hex(cell.strict_accuracy, spec.vmin, spec.vmax, spec.cmap)
            parts.append(
                f'<rect class="cell" x="{cx}" y="{cy}" width="{CELL_W}" '
                f'height="{CELL_H}" fill="{fill}"/>'
            )
        # overlay angles, positioned linearly between first and last column centers
        for angle in spec.overlay_angles:
            if len(thetas) > 1:
                frac = (angle - thetas[0]) / (thetas[-1] - thetas[0])
            else:
                frac = 0.5
            lx = x0 + CELL_W / 2 + frac * (panel_w - CELL_W)
            parts.append(
                f'<line class="overlay" x1="{lx:.2f}" y1="{y0}" x2="{lx:.2f}" '
                f'y2="{y0 + panel_h}" stroke="white" stroke-width="1.5" '
                f'stroke-dasharray="5,4"/>'
            )
        # x-axis tick labels: first, middle, last theta
        for ti in sorted({0, len(thetas) // 2, len(thetas) - 1}):
            tx = x0 + ti * CELL_W + CELL_W / 2
            parts.append(
                f'<text x="{tx:.2f}" y="{y0 + panel_h + 14}" fill="black" '
                f'text-anchor="middle">{thetas[ti]:.2f}</text>'
            )
        parts.append(
            f'<text x="{x0 + panel_w / 2:.2f}" y="{y0 + panel_h + 30}" fill="black" '
            f'text-anchor="middle">theta</text>'
        )

    # y-axis labels on the leftmost panel
    for x, ri in row_of.items():
        ly = MARGIN_TOP + (len(lams) - 1 - ri) * CELL_H + CELL_H / 2 + 4
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{ly:.2f}" fill="black" '
            f'text-anchor="end">{x:.3g}</text>'
        )
    parts.append(
        f'<text x="12" y="{MARGIN_TOP + panel_h / 2:.2f}" fill="black" '
        f'transform="rotate(-90 12 {MARGIN_TOP + panel_h / 2:.2f})" '
        f'text-anchor="middle">lambda</text>'
    )

    # shared legend
    lx0 = total_w - LEGEND_W + 12
    step_h = panel_h / LEGEND_STEPS
    for i in range(LEGEND_STEPS):
        v = spec.vmax - (i + 0.5) * (spec.vmax - spec.vmin) / LEGEND_STEPS
        parts.append(
            f'<rect class="legend" x="{lx0}" y="{MARGIN_TOP + i * step_h:.2f}" '
            f'width="14" height="{step_h + 0.5:.2f}" '
            f'fill="{color_hex(v, spec.vmin, spec.vmax, spec.cmap)}"/>'
        )
    parts.append(
        f'<text x="{lx0 + 18}" y="{MARGIN_TOP + 9}" fill="black">{spec.vmax:.2f}</text>'
    )
    parts.append(
        f'<text x="{lx0 + 18}" y="{MARGIN_TOP + panel_h:.2f}" fill="black">{spec.vmin:.2f}</text>'
    )

    parts.append(
        f'<text x="{MARGIN_LEFT}" y="{total_h - 8}" fill="black">'
        f'strict accuracy | depth={depth} trials={trials}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
