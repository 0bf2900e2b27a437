"""Shared helpers: random layered models and small hand-built networks."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from topoprobe import weightnet as wn

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def random_layered_model(
    rng: np.random.Generator,
    max_neurons: int = 14,
    min_layers: int = 2,
    max_layers: int = 4,
    zero_fraction: float = 0.15,
) -> wn.NetworkModel:
    """Random chained model with signed weights and occasional exact zeros."""
    n_layers = int(rng.integers(min_layers, max_layers + 1))
    sizes = [1] * n_layers
    remaining = max_neurons - n_layers
    for k in range(n_layers):
        extra = int(rng.integers(0, remaining + 1))
        sizes[k] += extra
        remaining -= extra
    layers = []
    for rows, cols in zip(sizes, sizes[1:]):
        w = rng.normal(0.0, 1.0, size=(rows, cols))
        w[rng.random(w.shape) < zero_fraction] = 0.0
        layers.append(wn.LayerMatrix(rows, cols, w))
    output_size = sizes[-1]
    used = frozenset(
        int(i) for i in range(output_size) if rng.random() < 0.7
    )
    return wn.NetworkModel(tuple(layers), output_size, used, "random")


def tiny_chain_model() -> wn.NetworkModel:
    """2 inputs -> 2 hidden -> 1 output with weights covering negatives and zeros."""
    return wn.NetworkModel(
        layers=(
            wn.LayerMatrix(2, 2, np.array([[1.0, -1.0], [0.5, 2.0]])),
            wn.LayerMatrix(2, 1, np.array([[1.0], [3.0]])),
        ),
        output_size=1,
        used_outputs=frozenset({0}),
        name="tiny",
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
