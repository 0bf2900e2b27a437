"""Z/2 persistent homology of a filtered 2-complex by boundary-matrix reduction.

Columns are kept as Python integers used as bitmasks (XOR is the Z/2 column
add), with rows indexed by the face's rank within its own dimension --
filtration order restricted to one dimension, so pivot comparisons are the
standard ones.  Triangles are reduced before edges; every edge they pair is
cleared from the edge pass (its column is known to reduce to zero), and the
surviving zero columns are the essential one-cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .complexes import (
    THRESHOLD_COUNT,
    FilteredComplex,
    FiltrationSchedule,
    Simplex,
    complex_at,
    threshold_schedule,
)

BRUTE_FORCE_MAX_SIMPLICES = 5000


class ComplexTooLargeError(ValueError):
    """Brute-force rank computation refused: stage exceeds the size cap."""


class MissingFaceError(ValueError):
    """A simplex's face is absent from the complex (internal inconsistency)."""


@dataclass(frozen=True)
class BoundaryMatrix:
    """One Z/2 column per simplex, in filtration order.

    ``columns[j]`` has bit p set when the simplex at position p is a
    codimension-1 face of the simplex at position j; vertex columns are zero.
    """

    complex: FilteredComplex
    columns: tuple[int, ...]


@dataclass(frozen=True)
class RepresentativeCycle:
    """Edges (as vertex pairs) whose Z/2 sum has empty boundary."""

    simplices: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: int
    death: int | None  # None = essential (never dies)
    creator: Simplex
    destroyer: Simplex | None
    representative: RepresentativeCycle | None

    @property
    def essential(self) -> bool:
        return self.death is None


@dataclass(frozen=True)
class PersistenceDiagram:
    """Pairing of a reduction run.

    ``pairs`` holds finite classes with positive persistence plus essential
    classes; ``zero_pairs`` keeps the birth == death pairing records that the
    half-open lifetime convention drops from the diagram.  Triangles whose
    columns reduced to zero are recorded by entry index only (they would
    generate two-dimensional classes of the truncated skeleton, which are
    never reported).
    """

    pairs: tuple[PersistencePair, ...]
    zero_pairs: tuple[PersistencePair, ...]
    dim2_creator_indices: tuple[int, ...]
    n_simplices: int
    schedule: FiltrationSchedule


def boundary_matrix(fc: FilteredComplex) -> BoundaryMatrix:
    """Assemble the Z/2 boundary columns of a filtered complex."""
    position = {s.vertices: p for p, s in enumerate(fc.simplices)}
    cols = []
    for s in fc.simplices:
        mask = 0
        if s.dim >= 1:
            for face in combinations(s.vertices, s.dim):
                try:
                    mask |= 1 << position[face]
                except KeyError:
                    raise MissingFaceError(f"face {face} of {s.vertices} not in complex") from None
        cols.append(mask)
    return BoundaryMatrix(fc, tuple(cols))


def reduce(bm: BoundaryMatrix) -> PersistenceDiagram:
    """Persistence pairing by left-to-right column reduction with clearing.

    A column is repeatedly XORed with the stored reduced column sharing its
    lowest set bit until it is empty (its simplex creates a class) or its
    lowest bit is fresh (its simplex destroys the class created at that bit).
    Edge creators keep the accumulated chain of edge columns as their
    representative cycle; edges paired by a triangle take the triangle's
    reduced column, itself a cycle whose latest edge is the creator.
    """
    simplices = bm.complex.simplices
    members: list[list[int]] = [[], [], []]  # positions per dimension, filtration order
    rank_of = [0] * len(simplices)
    for p, s in enumerate(simplices):
        rank_of[p] = len(members[s.dim])
        members[s.dim].append(p)

    def to_rank_mask(col: int) -> int:
        mask = 0
        while col:
            bit = col & -col
            mask |= 1 << rank_of[bit.bit_length() - 1]
            col ^= bit
        return mask

    # dimension-2 pass: pair triangles against edges
    pivot_tri: dict[int, int] = {}  # edge rank -> reduced triangle column
    tri_pairs: list[tuple[int, int, int]] = []  # (edge rank, triangle position, cycle mask)
    dim2_creators: list[int] = []
    for j in members[2]:
        col = to_rank_mask(bm.columns[j])
        while col:
            low = col.bit_length() - 1
            other = pivot_tri.get(low)
            if other is None:
                break
            col ^= other
        if col == 0:
            dim2_creators.append(simplices[j].filt_index)
        else:
            pivot_tri[low] = col
            tri_pairs.append((low, j, col))

    # dimension-1 pass: cleared edges are the triangle-paired creators
    cleared = {edge_rank for edge_rank, _, _ in tri_pairs}
    pivot_edge: dict[int, tuple[int, int]] = {}  # vertex rank -> (reduced column, chain mask)
    edge_pairs: list[tuple[int, int]] = []  # (vertex rank, edge position)
    essential1: list[tuple[int, int]] = []  # (edge position, chain mask)
    for edge_rank, j in enumerate(members[1]):
        if edge_rank in cleared:
            continue
        col = to_rank_mask(bm.columns[j])
        chain = 1 << edge_rank
        while col:
            low = col.bit_length() - 1
            entry = pivot_edge.get(low)
            if entry is None:
                break
            col ^= entry[0]
            chain ^= entry[1]
        if col == 0:
            essential1.append((j, chain))
        else:
            pivot_edge[low] = (col, chain)
            edge_pairs.append((low, j))

    def cycle(mask: int) -> RepresentativeCycle:
        edges = []
        while mask:
            bit = mask & -mask
            rank = bit.bit_length() - 1
            edges.append(simplices[members[1][rank]].vertices)
            mask ^= bit
        return RepresentativeCycle(tuple(sorted(edges)))

    pairs: list[PersistencePair] = []
    zero_pairs: list[PersistencePair] = []

    def record(pair: PersistencePair):
        if pair.death is not None and pair.death == pair.birth:
            zero_pairs.append(pair)
        else:
            pairs.append(pair)

    for vertex_rank, j in edge_pairs:
        creator = simplices[members[0][vertex_rank]]
        destroyer = simplices[j]
        record(PersistencePair(0, creator.filt_index, destroyer.filt_index, creator, destroyer, None))
    for vertex_rank in range(len(members[0])):
        if vertex_rank not in pivot_edge:
            creator = simplices[members[0][vertex_rank]]
            pairs.append(PersistencePair(0, creator.filt_index, None, creator, None, None))
    for edge_rank, j, rep_mask in tri_pairs:
        creator = simplices[members[1][edge_rank]]
        destroyer = simplices[j]
        record(
            PersistencePair(
                1, creator.filt_index, destroyer.filt_index, creator, destroyer, cycle(rep_mask)
            )
        )
    for j, chain in essential1:
        creator = simplices[j]
        pairs.append(PersistencePair(1, creator.filt_index, None, creator, None, cycle(chain)))

    pairs.sort(key=_pair_key)
    zero_pairs.sort(key=_pair_key)
    return PersistenceDiagram(
        tuple(pairs),
        tuple(zero_pairs),
        tuple(sorted(dim2_creators)),
        len(simplices),
        threshold_schedule(),
    )


def betti_curve(pd: PersistenceDiagram, p: int) -> list[int]:
    """Betti numbers at every schedule index; lifetimes are half-open [birth, death)."""
    if p not in (0, 1):
        raise ValueError(f"dimension {p} not in (0, 1)")
    curve = [0] * THRESHOLD_COUNT
    for pair in pd.pairs:
        if pair.dim != p:
            continue
        hi = pair.death if pair.death is not None else THRESHOLD_COUNT + 1
        for n in range(pair.birth, min(hi, THRESHOLD_COUNT + 1)):
            curve[n - 1] += 1
    return curve


def betti_brute_force(fc: FilteredComplex, n: int, p: int) -> int:
    """Exact stage-n Betti number from scratch: dim ker minus rank im, over Z/2."""
    if p not in (0, 1):
        raise ValueError(f"dimension {p} not in (0, 1)")
    stage = complex_at(fc, n)
    if len(stage) > BRUTE_FORCE_MAX_SIMPLICES:
        raise ComplexTooLargeError(
            f"stage {n} has {len(stage)} simplices, cap is {BRUTE_FORCE_MAX_SIMPLICES}"
        )
    position = {s.vertices: q for q, s in enumerate(stage)}
    counts = [0, 0, 0]
    cols: dict[int, list[int]] = {1: [], 2: []}
    for s in stage:
        counts[s.dim] += 1
        if s.dim >= 1:
            mask = 0
            for face in combinations(s.vertices, s.dim):
                mask |= 1 << position[face]
            cols[s.dim].append(mask)
    rank1 = _z2_rank(cols[1])
    if p == 0:
        return counts[0] - rank1
    return counts[1] - rank1 - _z2_rank(cols[2])


def pairs_csv(pd: PersistenceDiagram, include_zero: bool = False) -> str:
    """CSV of the diagram, sorted by (dim, birth, death); essentials last per birth.

    ``include_zero`` appends the internally recorded birth == death pairing
    records, recognizable by their equal coordinates.
    """
    rows = list(pd.pairs) + (list(pd.zero_pairs) if include_zero else [])
    rows.sort(key=_pair_key)
    lines = ["dim,birth,death,essential,creator,destroyer,representative"]
    for pair in rows:
        death = "" if pair.death is None else str(pair.death)
        essential = "1" if pair.death is None else "0"
        destroyer = "" if pair.destroyer is None else _verts(pair.destroyer.vertices)
        rep = (
            ""
            if pair.representative is None
            else ";".join(_verts(e) for e in pair.representative.simplices)
        )
        lines.append(
            f"{pair.dim},{pair.birth},{death},{essential},{_verts(pair.creator.vertices)},{destroyer},{rep}"
        )
    return "\n".join(lines) + "\n"


def parse_pairs_csv(text: str) -> PersistenceDiagram:
    """Rebuild a diagram from :func:`pairs_csv` output.

    Reduction-only bookkeeping (simplex count, dimension-2 creators) is not
    in the CSV and comes back empty; pairs, representatives, and the zero
    pairs split are faithful.
    """
    lines = text.splitlines()
    header = "dim,birth,death,essential,creator,destroyer,representative"
    if not lines or lines[0] != header:
        raise ValueError(f"pairs CSV must start with header {header!r}")
    pairs: list[PersistencePair] = []
    zero_pairs: list[PersistencePair] = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            dim, birth, death, essential, creator, destroyer, rep = line.split(",")
            d = int(dim)
            b = int(birth)
            dth = None if essential == "1" else int(death)
            cre = Simplex(_unverts(creator), b)
            des = None if destroyer == "" else Simplex(_unverts(destroyer), int(death))
            cyc = (
                None
                if rep == ""
                else RepresentativeCycle(tuple(sorted(_unverts(e) for e in rep.split(";"))))
            )
        except (ValueError, IndexError) as exc:
            raise ValueError(f"pairs CSV line {lineno} is malformed: {line!r}") from exc
        pair = PersistencePair(d, b, dth, cre, des, cyc)
        if dth is not None and dth == b:
            zero_pairs.append(pair)
        else:
            pairs.append(pair)
    return PersistenceDiagram(
        tuple(pairs), tuple(zero_pairs), (), 0, threshold_schedule()
    )


def _pair_key(pair: PersistencePair):
    return (pair.dim, pair.birth, math.inf if pair.death is None else pair.death, pair.creator.vertices)


def _verts(vertices: tuple[int, ...]) -> str:
    return "-".join(str(v) for v in vertices)


def _unverts(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split("-"))


def _z2_rank(columns: list[int]) -> int:
    rank = 0
    pivots: dict[int, int] = {}
    for col in columns:
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = col
                rank += 1
                break
            col ^= other
    return rank
