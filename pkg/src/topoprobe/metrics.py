"""Diagram statistics: band counts, unused-output classification, hull area.

Finite diagram points fall into three bands measured in schedule-index
units: near-diagonal (death <= birth + 5), the belt (birth + 5 < death <
birth + 20), and above the belt (death >= birth + 20).  Essential classes
have no death coordinate and are counted separately, excluded from bands
and from the hull.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .persistence import PersistenceDiagram, PersistencePair

NEAR_BAND = 5
BELT_BAND = 20


@dataclass(frozen=True)
class DiagramMetrics:
    dim: int
    total_points: int
    near_diagonal: int
    belt: int
    above_belt: int
    essential: int
    c1: int
    c1_and_c2: int
    hull_area: float


@dataclass(frozen=True)
class PairFlags:
    pair: PersistencePair
    touches_unused: bool  # c1: representative contains an unused output neuron
    near_diagonal: bool  # c2: death <= birth + 5


@dataclass(frozen=True)
class PairClassification:
    flags: tuple[PairFlags, ...]

    @property
    def total(self) -> int:
        return len(self.flags)

    @property
    def c1_count(self) -> int:
        return sum(1 for f in self.flags if f.touches_unused)

    @property
    def c2_count(self) -> int:
        return sum(1 for f in self.flags if f.near_diagonal)

    @property
    def c1_and_c2_count(self) -> int:
        return sum(1 for f in self.flags if f.touches_unused and f.near_diagonal)


def diagram_stats(pd: PersistenceDiagram, dim: int) -> DiagramMetrics:
    """Band counts over the finite pairs of one dimension, with multiplicity."""
    near = belt = above = essential = 0
    for pair in pd.pairs:
        if pair.dim != dim:
            continue
        if pair.death is None:
            essential += 1
        elif pair.death <= pair.birth + NEAR_BAND:
            near += 1
        elif pair.death < pair.birth + BELT_BAND:
            belt += 1
        else:
            above += 1
    return DiagramMetrics(dim, near + belt + above, near, belt, above, essential, 0, 0, 0.0)


def classify_pairs(pd: PersistenceDiagram, unused: frozenset[int]) -> PairClassification:
    """Flag every one-dimensional class of the diagram.

    c1 holds when any vertex of any edge of the representative cycle is an
    unused output neuron; c2 when the class dies within five indices of its
    birth.  Essential classes can be c1 but never c2.
    """
    unused = frozenset(unused)
    flags = []
    for pair in pd.pairs:
        if pair.dim != 1:
            continue
        if pair.representative is None:
            raise ValueError(f"pair ({pair.birth},{pair.death}) has no representative cycle")
        c1 = any(v in unused for edge in pair.representative.simplices for v in edge)
        c2 = pair.death is not None and pair.death <= pair.birth + NEAR_BAND
        flags.append(PairFlags(pair, c1, c2))
    return PairClassification(tuple(flags))


def convex_hull_area(pd: PersistenceDiagram, dim: int) -> float:
    """Area of the convex hull of the finite (birth, death) points.

    Multiplicity is collapsed (the hull is a set operation); fewer than three
    distinct non-collinear points give zero.
    """
    points = sorted(
        {
            (pair.birth, pair.death)
            for pair in pd.pairs
            if pair.dim == dim and pair.death is not None
        }
    )
    return _shoelace(_monotone_chain(points))


def compute_metrics(pd: PersistenceDiagram, dim: int, unused: frozenset[int]) -> DiagramMetrics:
    """Full metrics record: bands plus hull, plus c1 classification for dimension 1."""
    stats = diagram_stats(pd, dim)
    c1 = c1_and_c2 = 0
    if dim == 1:
        classified = classify_pairs(pd, unused)
        c1 = classified.c1_count
        c1_and_c2 = classified.c1_and_c2_count
    return DiagramMetrics(
        dim,
        stats.total_points,
        stats.near_diagonal,
        stats.belt,
        stats.above_belt,
        stats.essential,
        c1,
        c1_and_c2,
        convex_hull_area(pd, dim),
    )


def metrics_json(m: DiagramMetrics) -> str:
    payload = {
        "dim": m.dim,
        "total": m.total_points,
        "near_diagonal": m.near_diagonal,
        "belt": m.belt,
        "above_belt": m.above_belt,
        "essential": m.essential,
        "c1": m.c1,
        "c2": m.near_diagonal,
        "c1_and_c2": m.c1_and_c2,
        "hull_area": m.hull_area,
    }
    return json.dumps(payload, indent=2) + "\n"


def _monotone_chain(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Convex hull of sorted unique points, counter-clockwise, collinear dropped."""
    if len(points) < 3:
        return points

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in points:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(points):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _shoelace(hull: list[tuple[float, float]]) -> float:
    if len(hull) < 3:
        return 0.0
    area = 0.0
    for (x0, y0), (x1, y1) in zip(hull, hull[1:] + hull[:1]):
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0
