"""Weights-file parsing and the globally numbered weighted network graph.

The on-disk format is UTF-8 JSON::

    {"format_version": 1, "name": str, "output_size": int,
     "used_outputs": [int, ...],
     "layers": [{"rows": int, "cols": int, "weights": [[num, ...], ...]}, ...]}

Layers run from the input side to the output side and ``weights[i][j]`` is
the forward weight from source neuron ``i`` to destination neuron ``j`` of
the next layer.  Unknown top-level keys are ignored; missing required keys
are errors.  Biases are not representable in the format.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

NeuronId = int

_REQUIRED_KEYS = ("format_version", "name", "output_size", "used_outputs", "layers")


class WeightsFileError(ValueError):
    """Base class for every weights-file problem."""


class MalformedFileError(WeightsFileError):
    """Broken syntax, or a missing/ill-typed field."""


class LayerShapeError(WeightsFileError):
    """Layer dimensions inconsistent, internally or between neighbours."""


class NonFiniteWeightError(WeightsFileError):
    """A weight entry is NaN or infinite."""


@dataclass(frozen=True)
class LayerMatrix:
    """One dense weight layer: entry (i, j) connects source i to destination j."""

    rows: int
    cols: int
    weights: np.ndarray

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise LayerShapeError(f"layer must be at least 1x1, got {self.rows}x{self.cols}")
        w = np.array(self.weights, dtype=np.float64)
        if w.shape != (self.rows, self.cols):
            raise LayerShapeError(
                f"weights shape {w.shape} does not match declared {self.rows}x{self.cols}"
            )
        if not np.all(np.isfinite(w)):
            i, j = map(int, np.argwhere(~np.isfinite(w))[0])
            raise NonFiniteWeightError(f"weight entry ({i},{j}) is not finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class NetworkModel:
    """Validated stack of weight layers, input side first."""

    layers: tuple[LayerMatrix, ...]
    output_size: int
    used_outputs: frozenset[int]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "used_outputs", frozenset(self.used_outputs))
        if not self.layers:
            raise LayerShapeError("model needs at least one layer")
        for k, (a, b) in enumerate(zip(self.layers, self.layers[1:])):
            if a.cols != b.rows:
                raise LayerShapeError(f"layers {k} and {k + 1} do not chain: {a.cols} != {b.rows}")
        if self.output_size != self.layers[-1].cols:
            raise LayerShapeError(
                f"output_size {self.output_size} does not match last layer cols {self.layers[-1].cols}"
            )
        bad = sorted(i for i in self.used_outputs if not 0 <= i < self.output_size)
        if bad:
            raise MalformedFileError(f"used_outputs {bad} outside 0..{self.output_size - 1}")


def parse_weights_file(data: bytes) -> NetworkModel:
    """Parse and validate a weights file, with errors naming the offending layer/entry."""
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFileError(f"not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedFileError("top level must be a JSON object")
    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise MalformedFileError(f"missing required key {key!r}")
    if raw["format_version"] != 1:
        raise MalformedFileError(f"unsupported format_version {raw['format_version']!r}")
    if not isinstance(raw["name"], str):
        raise MalformedFileError("name must be a string")
    if not _is_int(raw["output_size"]):
        raise MalformedFileError("output_size must be an integer")
    used = raw["used_outputs"]
    if not isinstance(used, list) or not all(_is_int(u) for u in used):
        raise MalformedFileError("used_outputs must be a list of integers")
    if not isinstance(raw["layers"], list) or not raw["layers"]:
        raise MalformedFileError("layers must be a non-empty list")

    mats = []
    for k, layer in enumerate(raw["layers"]):
        if not isinstance(layer, dict):
            raise MalformedFileError(f"layer {k} must be an object")
        try:
            rows, cols, weights = layer["rows"], layer["cols"], layer["weights"]
        except KeyError as exc:
            raise MalformedFileError(f"layer {k} is missing key {exc.args[0]!r}") from exc
        if not _is_int(rows) or not _is_int(cols):
            raise MalformedFileError(f"layer {k} rows/cols must be integers")
        if rows < 1 or cols < 1:
            raise LayerShapeError(f"layer {k} must be at least 1x1, got {rows}x{cols}")
        if not isinstance(weights, list) or len(weights) != rows:
            raise LayerShapeError(f"layer {k} expects {rows} weight rows, got {_length(weights)}")
        for i, row in enumerate(weights):
            if not isinstance(row, list) or len(row) != cols:
                raise LayerShapeError(f"layer {k} row {i} expects {cols} entries, got {_length(row)}")
            for j, w in enumerate(row):
                if isinstance(w, bool) or not isinstance(w, (int, float)):
                    raise MalformedFileError(f"layer {k} entry ({i},{j}) is not a number")
                if not math.isfinite(w):
                    raise NonFiniteWeightError(f"layer {k} entry ({i},{j}) is not finite")
        mats.append(LayerMatrix(rows, cols, np.array(weights, dtype=np.float64)))

    return NetworkModel(tuple(mats), raw["output_size"], frozenset(used), raw["name"])


def serialize_weights(model: NetworkModel) -> bytes:
    """Inverse of :func:`parse_weights_file` up to 64-bit float precision."""
    payload = {
        "format_version": 1,
        "name": model.name,
        "output_size": model.output_size,
        "used_outputs": sorted(model.used_outputs),
        "layers": [
            {"rows": m.rows, "cols": m.cols, "weights": m.weights.tolist()} for m in model.layers
        ],
    }
    return (json.dumps(payload, separators=(",", ":")) + "\n").encode("utf-8")


class NetworkGraph:
    """Layered weighted DAG over globally numbered neurons.

    Numbering starts at 0 in the output layer and grows layer by layer toward
    the input, preserving within-layer matrix order, so every forward
    (input->output) edge runs from a higher index to a lower one.
    """

    def __init__(
        self,
        layer_sizes: tuple[int, ...],
        blocks: tuple[np.ndarray, ...],
        used_outputs: frozenset[int] = frozenset(),
        name: str = "",
    ):
        self.layer_sizes = tuple(int(s) for s in layer_sizes)  # [0] = output layer
        if len(blocks) != len(self.layer_sizes) - 1:
            raise LayerShapeError("need one weight block per adjacent layer pair")
        for k, block in enumerate(blocks):
            if block.shape != (self.layer_sizes[k + 1], self.layer_sizes[k]):
                raise LayerShapeError(f"block {k} shape {block.shape} does not match layer sizes")
        self.blocks = tuple(blocks)  # blocks[k]: weights from layer k+1 into layer k
        offsets = [0]
        for s in self.layer_sizes:
            offsets.append(offsets[-1] + s)
        self.offsets = tuple(offsets)
        self.n = offsets[-1]
        self.output_size = self.layer_sizes[0]
        self.used_outputs = frozenset(used_outputs)
        self.name = name
        self.output_ids = frozenset(range(self.output_size))
        self.unused_output_ids = self.output_ids - self.used_outputs

    def layer_of(self, i: NeuronId) -> int:
        """Layer index of a neuron: 0 for the output layer, increasing toward the input."""
        if not 0 <= i < self.n:
            raise ValueError(f"neuron id {i} outside 0..{self.n - 1}")
        return bisect.bisect_right(self.offsets, i) - 1

    def weight(self, i: NeuronId, j: NeuronId) -> float:
        """Forward weight on edge i -> j; zero when the neurons are not connected."""
        li, lj = self.layer_of(i), self.layer_of(j)
        if li != lj + 1:
            return 0.0
        return float(self.blocks[lj][i - self.offsets[li], j - self.offsets[lj]])

    def forward_edges(self) -> Iterator[tuple[NeuronId, NeuronId, float]]:
        """All edges with nonzero weight, as (source, destination, weight)."""
        for k, block in enumerate(self.blocks):
            src0, dst0 = self.offsets[k + 1], self.offsets[k]
            for a, b in zip(*np.nonzero(block)):
                yield src0 + int(a), dst0 + int(b), float(block[a, b])


def assign_global_indices(model: NetworkModel) -> NetworkGraph:
    """Number neurons from the output layer toward the input and expose the DAG."""
    sizes_in2out = [model.layers[0].rows] + [layer.cols for layer in model.layers]
    layer_sizes = tuple(reversed(sizes_in2out))
    blocks = tuple(layer.weights for layer in reversed(model.layers))
    return NetworkGraph(layer_sizes, blocks, model.used_outputs, model.name)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _length(x) -> str:
    return str(len(x)) if isinstance(x, list) else f"non-list {type(x).__name__}"
