"""Threshold schedule and the relevance-thresholded clique complex (2-skeleton).

The filtration runs over 64 fixed thresholds, nine steps per decade from 1.0
down to 1e-7.  A simplex is stored once, tagged with the earliest schedule
index whose threshold it clears; prefixes of the sorted simplex list are the
nested complexes of the filtration.
"""

from __future__ import annotations

import itertools
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from .relevance import RelevanceMatrix

THRESHOLD_COUNT = 64
MAX_DIM = 2


@dataclass(frozen=True)
class FiltrationSchedule:
    thresholds: tuple[float, ...]

    def __post_init__(self):
        if len(self.thresholds) != THRESHOLD_COUNT:
            raise ValueError(f"schedule needs {THRESHOLD_COUNT} thresholds")
        if any(b >= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly decreasing")
        if self.thresholds[0] > 1.0 or self.thresholds[-1] <= 0.0:
            raise ValueError("thresholds must lie in (0, 1]")

    def value(self, n: int) -> float:
        """Threshold at schedule index n (1-based)."""
        return self.thresholds[n - 1]


@lru_cache(maxsize=1)
def threshold_schedule() -> FiltrationSchedule:
    """The fixed 64-value schedule: 1.0, 0.9, ..., 0.2, 0.1, 0.09, ..., 1e-7.

    Index n maps to (10 - l) * 10^-(m+1) with m, l the quotient and remainder
    of (n - 1) by 9; values are parsed from decimal text so each threshold is
    the double nearest its decimal meaning (0.09 is exactly the literal 0.09).
    """
    vals = []
    for n in range(1, THRESHOLD_COUNT + 1):
        m, l = divmod(n - 1, 9)
        vals.append(float(f"{10 - l}e-{m + 1}"))
    return FiltrationSchedule(tuple(vals))


def threshold_index(r: float, schedule: FiltrationSchedule | None = None) -> int | None:
    """Smallest index n with threshold(n) <= r, or None when r is below them all."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"relevance {r!r} outside [0, 1]")
    ths = (schedule or threshold_schedule()).thresholds
    lo, hi = 0, len(ths)
    while lo < hi:
        mid = (lo + hi) // 2
        if ths[mid] <= r:
            hi = mid
        else:
            lo = mid + 1
    return lo + 1 if lo < len(ths) else None


class Simplex(NamedTuple):
    """Up to three distinct vertices, ascending, plus the entry index 1..64."""

    vertices: tuple[int, ...]
    filt_index: int

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _sort_key(s: Simplex) -> tuple[int, int, tuple[int, ...]]:
    return (s.filt_index, len(s.vertices), s.vertices)


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices sorted by (entry index, dimension, vertices); faces precede cofaces."""

    simplices: tuple[Simplex, ...]
    n_vertices: int

    def __post_init__(self):
        keys = [_sort_key(s) for s in self.simplices]
        if any(b < a for a, b in zip(keys, keys[1:])):
            raise ValueError("simplices are not in filtration-sorted order")


def build_filtered_complex(
    rel: RelevanceMatrix, max_dim: int = MAX_DIM, schedule: FiltrationSchedule | None = None
) -> FilteredComplex:
    """Clique complex of the thresholded relevance graph.

    All vertices enter at index 1.  An edge (a, b) with a > b enters at the
    earliest index whose threshold its relevance clears; a triangle enters
    with the slowest of its three edges (flag rule), which makes the result
    closed under faces at equal-or-earlier indices.  ``schedule`` is an
    override hook; everything ships against the fixed default.
    """
    if rel.kind != "extended":
        raise ValueError("complex construction expects the extended relevance matrix")
    if max_dim != MAX_DIM:
        raise ValueError(f"only the 2-skeleton is supported, got max_dim={max_dim}")
    sched = schedule or threshold_schedule()
    asc = np.array(sched.thresholds[::-1])
    n = rel.n
    simplices = [Simplex((v,), 1) for v in range(n)]

    a_all, b_all = np.tril_indices(n, k=-1)  # ordered pairs a > b
    r_ab = rel.values[a_all, b_all]
    present = r_ab >= asc[0]
    a_idx, b_idx = a_all[present], b_all[present]
    idx = THRESHOLD_COUNT - (np.searchsorted(asc, r_ab[present], side="right") - 1)

    eidx = np.zeros((n, n), dtype=np.int64)  # 0 = edge absent
    eidx[a_idx, b_idx] = idx
    for a, b, k in zip(a_idx, b_idx, idx):
        simplices.append(Simplex((int(b), int(a)), int(k)))

    for a, b, k_ab in zip(a_idx, b_idx, idx):
        if b == 0:
            continue
        row_a, row_b = eidx[a, :b], eidx[b, :b]
        cs = np.nonzero((row_a > 0) & (row_b > 0))[0]
        if cs.size == 0:
            continue
        tri_idx = np.maximum(np.maximum(row_a[cs], row_b[cs]), k_ab)
        for c, k in zip(cs, tri_idx):
            simplices.append(Simplex((int(c), int(b), int(a)), int(k)))

    simplices.sort(key=_sort_key)
    return FilteredComplex(tuple(simplices), n)


def complex_at(fc: FilteredComplex, n: int) -> tuple[Simplex, ...]:
    """All simplices present at stage n: the prefix with entry index <= n."""
    if not 1 <= n <= THRESHOLD_COUNT:
        raise ValueError(f"stage {n} outside 1..{THRESHOLD_COUNT}")
    cut = bisect_right(fc.simplices, n, key=lambda s: s.filt_index)
    return fc.simplices[:cut]


def enumerate_simplices_from_vertex(
    matrix: np.ndarray | Iterable[Iterable[float]],
    start: int,
    threshold: float,
    max_dim: int = MAX_DIM,
) -> frozenset[tuple[int, ...]]:
    """Reference enumerator: walk positive entries from ``start``, multiplying
    them up, and whenever the running product still clears the threshold emit
    every combination of the walked vertices (up to ``max_dim`` + 1 of them).

    ``matrix`` must be acyclic in the walk direction (relevance matrices are:
    positive entries only run from higher to lower index), otherwise the walk
    does not terminate.  Cost is exponential in the worst case; this is a
    diagnostic tool, not the production path.
    """
    m = np.asarray(matrix, dtype=np.float64)
    n = m.shape[0]
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold!r} outside [0, 1]")
    if not 0 <= start < n:
        raise ValueError(f"start vertex {start} outside 0..{n - 1}")
    found: set[tuple[int, ...]] = set()

    def visit(path: list[int], product: float):
        if product < threshold:
            return
        verts = sorted(path)
        for size in range(1, min(len(verts), max_dim + 1) + 1):
            found.update(itertools.combinations(verts, size))
        last = path[-1]
        for nxt in range(n):
            if nxt != last and m[last, nxt] > 0:
                path.append(nxt)
                visit(path, product * m[last, nxt])
                path.pop()

    visit([start], 1.0)
    return frozenset(found)


def algorithm1_complex(
    matrix: np.ndarray, max_dim: int = MAX_DIM, schedule: FiltrationSchedule | None = None
) -> FilteredComplex:
    """Filtered complex assembled from the reference enumerator alone.

    Tracks per simplex the best walk product exhibiting it, then maps that
    product to its earliest schedule index.  Equals the union of
    :func:`enumerate_simplices_from_vertex` over all start vertices at each
    of the 64 thresholds, in a single traversal.  The result can be a strict
    subcomplex of :func:`build_filtered_complex`: a triple whose pairs are
    each related through different paths may admit no single walk whose
    product clears the threshold.
    """
    sched = schedule or threshold_schedule()
    t_min = sched.thresholds[-1]
    m = np.asarray(matrix, dtype=np.float64)
    n = m.shape[0]
    best: dict[tuple[int, ...], float] = {}

    def visit(path: list[int], product: float):
        verts = sorted(path)
        for size in range(2, min(len(verts), max_dim + 1) + 1):
            for combo in itertools.combinations(verts, size):
                if best.get(combo, 0.0) < product:
                    best[combo] = product
        last = path[-1]
        for nxt in range(n):
            if nxt != last and m[last, nxt] > 0:
                p = product * m[last, nxt]
                if p >= t_min:
                    path.append(nxt)
                    visit(path, p)
                    path.pop()

    for s in range(n):
        visit([s], 1.0)

    simplices = [Simplex((v,), 1) for v in range(n)]
    for verts, p in best.items():
        k = threshold_index(min(p, 1.0), sched)
        simplices.append(Simplex(verts, k))
    simplices.sort(key=_sort_key)
    return FilteredComplex(tuple(simplices), n)


def simplices_csv(fc: FilteredComplex) -> str:
    """CSV dump ``filt_index,dim,v0,v1,v2`` with empty trailing vertex fields."""
    lines = ["filt_index,dim,v0,v1,v2"]
    for s in fc.simplices:
        v = [str(x) for x in s.vertices] + [""] * (3 - len(s.vertices))
        lines.append(f"{s.filt_index},{s.dim},{v[0]},{v[1]},{v[2]}")
    return "\n".join(lines) + "\n"


def parse_simplices_csv(text: str) -> FilteredComplex:
    """Rebuild a complex from :func:`simplices_csv` output."""
    lines = text.splitlines()
    if not lines or lines[0] != "filt_index,dim,v0,v1,v2":
        raise ValueError("simplex CSV must start with header 'filt_index,dim,v0,v1,v2'")
    simplices = []
    n_vertices = 0
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            filt, dim, *verts = line.split(",")
            vertices = tuple(int(v) for v in verts if v != "")
            if len(vertices) != int(dim) + 1:
                raise ValueError("vertex count does not match dim")
            simplices.append(Simplex(vertices, int(filt)))
        except ValueError as exc:
            raise ValueError(f"simplex CSV line {lineno} is malformed: {line!r}") from exc
        if len(vertices) == 1:
            n_vertices += 1
    return FilteredComplex(tuple(simplices), n_vertices)
