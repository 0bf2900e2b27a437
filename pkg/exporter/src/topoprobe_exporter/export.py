"""Train small fully connected digit classifiers and export their weights.

The export format is the weights-JSON consumed by the topoprobe analyzer::

    {"format_version": 1, "name": str, "output_size": int,
     "used_outputs": [int, ...],
     "layers": [{"rows": int, "cols": int, "weights": [[num, ...], ...]}, ...]}

Layers run input -> output; ``weights[i][j]`` is the forward weight from
source neuron i to destination j.  Biases are trained but never exported --
the format has no slot for them.

Training happens in two phases: a dense warmup, then a sparsification phase
that applies a proximal L1 shrink (soft threshold) to the first and middle
weight layers after every optimizer step, driving unhelpful weights to exact
zero.  The output layer is left unregularized so that output neurons keep
whatever small weights training leaves them.  Everything is seeded and
single-threaded, so a fixed seed reproduces the exported weights bit for bit
on one platform/toolchain version.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from sklearn.datasets import load_digits
from torch import nn

INPUT_SIZE = 64  # 8x8 digit images, flattened
DEFAULT_MIN_ACCURACY = 0.9
DEFAULT_WARMUP_EPOCHS = 300
DEFAULT_SPARSIFY_EPOCHS = 3500
DEFAULT_CONSOLIDATE_EPOCHS = 500
DEFAULT_CONSOLIDATE_LR = 1e-4
DEFAULT_SHRINK_FIRST = 6e-4
DEFAULT_SHRINK_HIDDEN = 4e-4


class ExportError(ValueError):
    """Base class for exporter failures."""


class AccuracyBelowFloorError(ExportError):
    """Training finished below the configured test-accuracy floor."""


class UnsupportedLayerError(ExportError):
    """A saved model contains something other than dense layers."""


@dataclass(frozen=True)
class ExportJob:
    """One training-and-export run.

    ``layer_sizes`` is the full neuron-layer chain including input and output
    (e.g. (64, 32, 16, 10)); ``outputs`` must match its last element and may
    exceed ``classes`` to train with deliberately oversized output layers.
    ``epochs`` counts the sparsification phase; ``warmup_epochs`` the dense
    phase before it and ``consolidate_epochs`` the low-rate fine-tune after
    it (shrink strengths scale with the learning-rate drop).
    """

    classes: int
    outputs: int
    layer_sizes: tuple[int, ...]
    epochs: int = DEFAULT_SPARSIFY_EPOCHS
    seed: int = 0
    out: Path = Path("weights.json")
    min_accuracy: float = DEFAULT_MIN_ACCURACY
    warmup_epochs: int = DEFAULT_WARMUP_EPOCHS
    consolidate_epochs: int = DEFAULT_CONSOLIDATE_EPOCHS
    consolidate_lr: float = DEFAULT_CONSOLIDATE_LR
    shrink_first: float = DEFAULT_SHRINK_FIRST
    shrink_hidden: float = DEFAULT_SHRINK_HIDDEN
    batch_size: int = 32
    learning_rate: float = 1e-3

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ExportError("layer_sizes needs at least input and output")
        if self.layer_sizes[0] != INPUT_SIZE:
            raise ExportError(
                f"first layer must be {INPUT_SIZE} (8x8 digits), got {self.layer_sizes[0]}"
            )
        if self.layer_sizes[-1] != self.outputs:
            raise ExportError(
                f"outputs {self.outputs} does not match last layer size {self.layer_sizes[-1]}"
            )
        if not 1 <= self.classes <= 10:
            raise ExportError(f"classes must be 1..10, got {self.classes}")
        if self.classes > self.outputs:
            raise ExportError(f"cannot train {self.classes} classes on {self.outputs} outputs")
        total = self.epochs + self.warmup_epochs + self.consolidate_epochs
        if min(self.epochs, self.warmup_epochs, self.consolidate_epochs) < 0 or total < 1:
            raise ExportError("need at least one training epoch")


def train_and_export(job: ExportJob) -> Path:
    """Train on the digit classes 0..classes-1 and write the weights file.

    The classifier uses ReLU hidden layers and a sigmoid output trained
    against one-hot targets, so output neurons beyond the trained classes
    see only "off" targets.  Export is refused when the held-out accuracy
    ends up below the floor.
    """
    model, accuracy = _train(job)
    if accuracy < job.min_accuracy:
        raise AccuracyBelowFloorError(
            f"test accuracy {accuracy:.3f} below the floor {job.min_accuracy:.3f}; "
            "raise epochs or lower the floor"
        )
    name = f"digits-k{job.classes}-o{job.outputs}-seed{job.seed}-acc{accuracy:.3f}"
    payload = _payload(_dense_layers(model), job.outputs, sorted(range(job.classes)), name)
    job.out.parent.mkdir(parents=True, exist_ok=True)
    job.out.write_bytes(payload)
    return job.out


def convert_saved_model(path: Path, used_outputs: list[int] | None = None) -> bytes:
    """Weights-JSON bytes for a torch-saved model made solely of dense layers.

    Parameter-free glue (activations, dropout, flatten) is skipped; any other
    layer kind is a conversion error naming the module.
    """
    model = torch.load(path, map_location="cpu", weights_only=False)
    if not isinstance(model, nn.Module):
        raise UnsupportedLayerError(f"{path} does not hold a torch module")
    skippable = (
        nn.ReLU, nn.Sigmoid, nn.Tanh, nn.Softmax, nn.Dropout, nn.Flatten,
        nn.Identity, nn.Sequential, nn.ModuleList,
    )
    linears = []
    for name, module in model.named_modules():
        if name == "":
            continue  # the root container itself
        if isinstance(module, nn.Linear):
            linears.append(module)
        elif not isinstance(module, skippable):
            raise UnsupportedLayerError(
                f"module {name!r} ({type(module).__name__}) is not a dense layer"
            )
    if not linears:
        raise UnsupportedLayerError(f"{path} contains no dense layers")
    for k, (a, b) in enumerate(zip(linears, linears[1:])):
        if a.out_features != b.in_features:
            raise UnsupportedLayerError(
                f"dense layers {k} and {k + 1} do not chain: {a.out_features} != {b.in_features}"
            )
    output_size = linears[-1].out_features
    used = sorted(range(output_size)) if used_outputs is None else sorted(used_outputs)
    return _payload(linears, output_size, used, Path(path).stem)


def _payload(linears: list[nn.Linear], output_size: int, used: list[int], name: str) -> bytes:
    layers = []
    for module in linears:
        # torch stores (out, in); the file wants source-major (in, out)
        w = module.weight.detach().numpy().astype(np.float64).T
        layers.append({"rows": w.shape[0], "cols": w.shape[1], "weights": w.tolist()})
    doc = {
        "format_version": 1,
        "name": name,
        "output_size": output_size,
        "used_outputs": used,
        "layers": layers,
    }
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")


def _dense_layers(model: nn.Sequential) -> list[nn.Linear]:
    return [m for m in model if isinstance(m, nn.Linear)]


def _train(job: ExportJob) -> tuple[nn.Sequential, float]:
    torch.manual_seed(job.seed)
    torch.set_num_threads(1)
    x_train, y_train, x_test, y_test = _digit_split(job.classes, job.seed)

    stack: list[nn.Module] = []
    for a, b in zip(job.layer_sizes, job.layer_sizes[1:]):
        stack.append(nn.Linear(a, b))
        stack.append(nn.ReLU())
    stack[-1] = nn.Sigmoid()
    model = nn.Sequential(*stack)
    linears = _dense_layers(model)
    shrinks = [job.shrink_first] + [job.shrink_hidden] * (len(linears) - 2) + [0.0]

    targets = torch.zeros(len(y_train), job.outputs)
    targets[torch.arange(len(y_train)), y_train] = 1.0
    optimizer = torch.optim.Adam(model.parameters(), lr=job.learning_rate)
    loss_fn = nn.BCELoss()
    shuffler = torch.Generator().manual_seed(job.seed)

    def run_phase(n_epochs: int, lr: float, shrink_scale: float):
        for group in optimizer.param_groups:
            group["lr"] = lr
        for _ in range(n_epochs):
            order = torch.randperm(len(x_train), generator=shuffler)
            for start in range(0, len(order), job.batch_size):
                batch = order[start : start + job.batch_size]
                optimizer.zero_grad()
                loss_fn(model(x_train[batch]), targets[batch]).backward()
                optimizer.step()
                if shrink_scale:
                    with torch.no_grad():
                        for module, shrink in zip(linears, shrinks):
                            if shrink:
                                w = module.weight
                                cut = shrink * shrink_scale
                                w.copy_(torch.sign(w) * torch.clamp(w.abs() - cut, min=0))

    run_phase(job.warmup_epochs, job.learning_rate, 0.0)
    run_phase(job.epochs, job.learning_rate, 1.0)
    run_phase(job.consolidate_epochs, job.consolidate_lr, job.consolidate_lr / job.learning_rate)

    with torch.no_grad():
        predicted = model(x_test).argmax(dim=1)
    accuracy = float((predicted == y_test).float().mean())
    return model, accuracy


def _digit_split(classes: int, seed: int):
    data = load_digits()
    mask = data.target < classes
    x = torch.tensor(data.data[mask] / 16.0, dtype=torch.float32)
    y = torch.tensor(data.target[mask], dtype=torch.int64)
    order = np.random.default_rng(seed).permutation(len(x))
    cut = int(len(x) * 0.8)
    train, test = order[:cut], order[cut:]
    return x[train], y[train], x[test], y[test]
