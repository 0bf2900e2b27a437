"""Pairwise neuron relevance: normalized positive weights, extended along paths.

Direct relevance normalizes the positive part of each destination's incoming
weights so the nonzero columns sum to one.  Extended relevance propagates it
to indirectly connected pairs by taking, over all forward paths, the maximum
product of direct relevances along the path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weightnet import NetworkGraph

BRUTE_FORCE_MAX_NEURONS = 14

# cap on temporaries inside the max-product composition, in elements
_CHUNK_ELEMENTS = 4_000_000


class GraphTooLargeError(ValueError):
    """Exhaustive path enumeration refused: graph exceeds the size cap."""


@dataclass(frozen=True)
class RelevanceMatrix:
    """Square matrix with values[i, j] = relevance of source i for destination j.

    The diagonal is one; every value lies in [0, 1].  Instances are frozen
    (the array is made read-only) and safe to share across threads.
    """

    values: np.ndarray
    kind: str  # "direct" or "extended"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"relevance matrix must be square, got shape {v.shape}")
        if self.kind not in ("direct", "extended"):
            raise ValueError(f"unknown relevance kind {self.kind!r}")
        if v.size and (not np.all((v >= 0.0) & (v <= 1.0)) or not np.all(np.diag(v) == 1.0)):
            raise ValueError("relevance values must lie in [0, 1] with a unit diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def r(self, i: int, j: int) -> float:
        return float(self.values[i, j])


def direct_relevance(g: NetworkGraph) -> RelevanceMatrix:
    """Relevance between directly connected neurons.

    For i != j: max(0, w_ij) / sum_k max(0, w_kj).  A destination with no
    positive incoming weight keeps an all-zero column (the neuron receives no
    positive contribution, and this keeps values inside [0, 1]).
    """
    values = np.zeros((g.n, g.n))
    np.fill_diagonal(values, 1.0)
    for k, block in enumerate(g.blocks):
        pos = np.maximum(block, 0.0)
        denom = pos.sum(axis=0)
        rel = np.divide(pos, denom, out=np.zeros_like(pos), where=denom > 0)
        src, dst = g.offsets[k + 1], g.offsets[k]
        values[src : src + block.shape[0], dst : dst + block.shape[1]] = rel
    return RelevanceMatrix(values, "direct")


def extended_relevance(direct: RelevanceMatrix, g: NetworkGraph) -> RelevanceMatrix:
    """Best relevance over all forward paths, by max-product dynamic programming.

    Paths in a layered network cross every intermediate layer, so composing
    adjacent-layer blocks in topological order is exact.  Values are nonzero
    only on the diagonal and for source index > destination index.
    """
    if direct.kind != "direct":
        raise ValueError(f"expected a direct relevance matrix, got kind {direct.kind!r}")
    if direct.n != g.n:
        raise ValueError(f"matrix size {direct.n} does not match graph size {g.n}")
    values = np.zeros((g.n, g.n))
    np.fill_diagonal(values, 1.0)
    off = g.offsets

    def block(arr, a, b):
        return arr[off[a] : off[a + 1], off[b] : off[b + 1]]

    n_layers = len(g.layer_sizes)
    for a in range(1, n_layers):
        block(values, a, a - 1)[:] = block(direct.values, a, a - 1)
    for gap in range(2, n_layers):
        for b in range(n_layers - gap):
            a = b + gap
            block(values, a, b)[:] = _max_product(
                block(direct.values, a, a - 1), block(values, a - 1, b)
            )
    return RelevanceMatrix(values, "extended")


def brute_force_extended_relevance(direct: RelevanceMatrix, g: NetworkGraph) -> RelevanceMatrix:
    """Oracle twin of :func:`extended_relevance`: walks every forward path explicitly."""
    if g.n > BRUTE_FORCE_MAX_NEURONS:
        raise GraphTooLargeError(f"{g.n} neurons exceeds the cap of {BRUTE_FORCE_MAX_NEURONS}")
    rel = direct.values
    n = g.n
    values = np.zeros((n, n))
    np.fill_diagonal(values, 1.0)
    succ = [[j for j in range(n) if j != i and rel[i, j] > 0] for i in range(n)]

    def walk(start: int, v: int, product: float):
        for u in succ[v]:
            p = product * rel[v, u]
            if p > values[start, u]:
                values[start, u] = p
            walk(start, u, p)

    for i in range(n):
        walk(i, i, 1.0)
    return RelevanceMatrix(values, "extended")


def relevance_csv(rm: RelevanceMatrix) -> str:
    """CSV dump ``i,j,value`` of the positive entries, sorted by (i, j)."""
    lines = ["i,j,value"]
    for i, j in zip(*np.nonzero(rm.values > 0)):
        lines.append(f"{i},{j},{float(rm.values[i, j])!r}")
    return "\n".join(lines) + "\n"


def parse_relevance_csv(text: str, n: int, kind: str) -> RelevanceMatrix:
    """Rebuild a matrix from :func:`relevance_csv` output; exact for repr floats."""
    values = np.zeros((n, n))
    lines = text.splitlines()
    if not lines or lines[0] != "i,j,value":
        raise ValueError("relevance CSV must start with header 'i,j,value'")
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            i, j, v = line.split(",")
            values[int(i), int(j)] = float(v)
        except (ValueError, IndexError) as exc:
            raise ValueError(f"relevance CSV line {lineno} is malformed: {line!r}") from exc
    return RelevanceMatrix(values, kind)


def _max_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(max, *) composition of a (p,q) and a (q,r) matrix, chunked to bound memory."""
    p, q = a.shape
    r = b.shape[1]
    out = np.empty((p, r))
    step = max(1, _CHUNK_ELEMENTS // max(1, q * r))
    for s in range(0, p, step):
        out[s : s + step] = np.max(a[s : s + step, :, None] * b[None, :, :], axis=1)
    return out
