"""Deterministic SVG output for persistence diagrams and barcodes, no plotting dependency."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .persistence import PersistenceDiagram, PersistencePair


@dataclass(frozen=True)
class PlotSpec:
    """Shared geometry and styling for both chart kinds.

    Axes run 0..axis_max in schedule-index units, covering indices 1..64 plus
    the essential row at 65.  Point shading encodes multiplicity in
    logarithmic buckets: 1, 2-10, 11-100, and above.
    """

    width: int = 540
    height: int = 540
    margin: int = 56
    axis_max: int = 65
    colors: tuple[str, str] = ("#d62728", "#2ca02c")  # dim 0 red, dim 1 green
    bucket_bounds: tuple[int, int, int] = (1, 10, 100)
    opacities: tuple[float, float, float, float] = (0.35, 0.55, 0.75, 1.0)
    dims: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        if self.axis_max < 65:
            raise ValueError("axis range must cover indices 1..64 plus the essential row at 65")

    def bucket(self, count: int) -> int:
        for b, bound in enumerate(self.bucket_bounds):
            if count <= bound:
                return b
        return len(self.bucket_bounds)


def diagram_svg(pd: PersistenceDiagram, spec: PlotSpec = PlotSpec()) -> bytes:
    """Scatter of (birth, death) points above the diagonal reference line.

    Coincident classes collapse to one point whose opacity encodes the
    multiplicity bucket; essential classes sit on the death = 65 row as
    diamonds.
    """
    lines = _open_svg(spec)
    x, y = _scales(spec)
    lines.append(
        f'<line x1="{x(0)}" y1="{y(0)}" x2="{x(spec.axis_max)}" y2="{y(spec.axis_max)}" '
        'stroke="#888888" stroke-width="1" stroke-dasharray="4,3"/>'
    )
    lines.append(
        f'<line x1="{x(0)}" y1="{y(spec.axis_max)}" x2="{x(spec.axis_max)}" y2="{y(spec.axis_max)}" '
        'stroke="#bbbbbb" stroke-width="0.5"/>'
    )
    for dim in spec.dims:
        color = spec.colors[dim]
        finite = Counter(
            (p.birth, p.death) for p in pd.pairs if p.dim == dim and p.death is not None
        )
        for (birth, death), count in sorted(finite.items()):
            opacity = spec.opacities[spec.bucket(count)]
            lines.append(
                f'<circle cx="{x(birth)}" cy="{y(death)}" r="4" fill="{color}" '
                f'fill-opacity="{opacity}"/>'
            )
        essential = Counter(p.birth for p in pd.pairs if p.dim == dim and p.death is None)
        for birth, count in sorted(essential.items()):
            opacity = spec.opacities[spec.bucket(count)]
            cx, cy = float(x(birth)), float(y(spec.axis_max))
            lines.append(
                f'<path d="M{cx:.2f} {cy - 5:.2f} L{cx + 5:.2f} {cy:.2f} '
                f'L{cx:.2f} {cy + 5:.2f} L{cx - 5:.2f} {cy:.2f} Z" '
                f'fill="{color}" fill-opacity="{opacity}"/>'
            )
    lines.append(_axis_labels(spec, "birth", "death"))
    lines.append("</svg>")
    return "\n".join(lines).encode("utf-8")


def barcode_svg(pd: PersistenceDiagram, spec: PlotSpec = PlotSpec()) -> bytes:
    """One horizontal bar per class from birth to death, grouped by dimension.

    Essential bars run to the right edge.  Bars are stacked in (dim, birth,
    death) order from the top.
    """
    lines = _open_svg(spec)
    x, _ = _scales(spec)
    bars = [
        p
        for p in sorted(pd.pairs, key=_bar_key)
        if p.dim in spec.dims
    ]
    top = spec.margin
    bottom = spec.height - spec.margin
    slot = (bottom - top) / max(1, len(bars))
    thickness = min(6.0, max(1.0, slot * 0.7))
    for row, pair in enumerate(bars):
        color = spec.colors[pair.dim]
        x0 = x(pair.birth)
        x1 = x(spec.axis_max if pair.death is None else pair.death)
        cy = top + slot * (row + 0.5)
        lines.append(
            f'<line x1="{x0}" y1="{cy:.2f}" x2="{x1}" y2="{cy:.2f}" '
            f'stroke="{color}" stroke-width="{thickness:.2f}"/>'
        )
    lines.append(_axis_labels(spec, "schedule index", ""))
    lines.append("</svg>")
    return "\n".join(lines).encode("utf-8")


def _bar_key(pair: PersistencePair):
    return (pair.dim, pair.birth, math.inf if pair.death is None else pair.death, pair.creator.vertices)


def _open_svg(spec: PlotSpec) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
    ]


def _scales(spec: PlotSpec):
    plot_w = spec.width - 2 * spec.margin
    plot_h = spec.height - 2 * spec.margin

    def x(v: float) -> str:
        return f"{spec.margin + v / spec.axis_max * plot_w:.2f}"

    def y(v: float) -> str:
        return f"{spec.height - spec.margin - v / spec.axis_max * plot_h:.2f}"

    return x, y


def _axis_labels(spec: PlotSpec, x_label: str, y_label: str) -> str:
    x, y = _scales(spec)
    parts = [
        f'<line x1="{x(0)}" y1="{y(0)}" x2="{x(spec.axis_max)}" y2="{y(0)}" '
        'stroke="#000000" stroke-width="1"/>',
        f'<line x1="{x(0)}" y1="{y(0)}" x2="{x(0)}" y2="{y(spec.axis_max)}" '
        'stroke="#000000" stroke-width="1"/>',
    ]
    for tick in range(0, spec.axis_max + 1, 10):
        parts.append(
            f'<text x="{x(tick)}" y="{float(y(0)) + 18:.2f}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{tick}</text>'
        )
        parts.append(
            f'<text x="{float(x(0)) - 8:.2f}" y="{float(y(tick)) + 4:.2f}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{tick}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{spec.width / 2:.1f}" y="{spec.height - 12}" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif">{x_label}</text>'
        )
    if y_label:
        parts.append(
            f'<text x="16" y="{spec.height / 2:.1f}" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif" '
            f'transform="rotate(-90 16 {spec.height / 2:.1f})">{y_label}</text>'
        )
    return "\n".join(parts)
