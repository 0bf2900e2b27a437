"""Command line for training/exporting digit classifiers and converting saved models."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .export import DEFAULT_MIN_ACCURACY, ExportError, ExportJob, convert_saved_model, train_and_export


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="topoprobe-export",
        description="Train desk-scale digit classifiers and export topoprobe weights JSON.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="train on 8x8 digits and export the weights")
    p.add_argument("--classes", type=int, required=True, help="digit classes 0..K-1 to train on")
    p.add_argument("--outputs", type=int, required=True, help="output neurons (may exceed classes)")
    p.add_argument("--layers", required=True,
                   help="comma-separated neuron layer sizes, input through output, e.g. 64,32,16,10")
    p.add_argument("--epochs", type=int, default=None,
                   help="sparsification epochs (default: the recipe used for committed fixtures)")
    p.add_argument("--warmup", type=int, default=None, help="dense warmup epochs before sparsifying")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-accuracy", type=float, default=DEFAULT_MIN_ACCURACY)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_export)

    p = sub.add_parser("convert", help="convert a torch-saved dense model to weights JSON")
    p.add_argument("--model", required=True, help="path to a torch.save()d module")
    p.add_argument("--used-outputs", default=None,
                   help="comma-separated trained class indices (default: all outputs)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_convert)

    args = parser.parse_args(argv)
    try:
        args.handler(args)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_export(args):
    try:
        layer_sizes = tuple(int(s) for s in args.layers.split(","))
    except ValueError as exc:
        raise ExportError(f"layers must look like 64,32,16,10 (got {args.layers!r})") from exc
    overrides = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.warmup is not None:
        overrides["warmup_epochs"] = args.warmup
    job = ExportJob(
        classes=args.classes,
        outputs=args.outputs,
        layer_sizes=layer_sizes,
        seed=args.seed,
        out=Path(args.out),
        min_accuracy=args.min_accuracy,
        **overrides,
    )
    path = train_and_export(job)
    print(f"wrote {path}")


def _cmd_convert(args):
    used = None if args.used_outputs is None else [int(u) for u in args.used_outputs.split(",")]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(convert_saved_model(Path(args.model), used))
    print(f"wrote {out}")


if __name__ == "__main__":
    sys.exit(main())
