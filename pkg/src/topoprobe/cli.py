"""Command-line pipeline: weights file -> relevance -> complex -> persistence -> metrics + SVG.

Every stage is a subcommand that consumes the previous stage's file outputs,
so any stage can be replayed or diffed; ``pipeline`` runs them all in one
process against the same writers, producing byte-identical artifacts.  All
stages are deterministic; the TOPOPROBE_SEED environment variable is
reserved and unused.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import complexes, metrics, persistence, relevance, render, weightnet

EMIT_CHOICES = ("pairs", "metrics", "diagram", "barcode", "relevance", "simplices")
DEFAULT_EMIT = ("pairs", "metrics", "diagram", "barcode")
ALG1_MAX_NEURONS = 64


@dataclass
class RunConfig:
    input: Path
    out: Path
    dims: tuple[int, ...] = (0, 1)
    emit: tuple[str, ...] = DEFAULT_EMIT
    mode: str = "flag"  # "flag" or "alg1"
    workers: int | None = None  # None = available parallelism; output is identical either way
    max_dim: int = 2

    def __post_init__(self):
        self.input = Path(self.input)
        self.out = Path(self.out)
        if not self.input.exists():
            raise ValueError(f"input {self.input} does not exist")
        if self.max_dim != 2:
            raise ValueError("only max_dim=2 is supported")
        if self.mode not in ("flag", "alg1"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not set(self.dims) <= {0, 1}:
            raise ValueError(f"dims must be a subset of 0,1, got {self.dims}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")


class _Artifacts:
    """Tracks files written by one command so failures can clean up after themselves."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def write(self, name: str, data: str | bytes) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        if isinstance(data, str):
            path.write_text(data, encoding="utf-8")
        else:
            path.write_bytes(data)
        self.written.append(path)
        return path

    def discard(self):
        for path in self.written:
            path.unlink(missing_ok=True)


def run_pipeline(cfg: RunConfig) -> list[Path]:
    """All stages in sequence, writing the artifacts selected by cfg.emit."""
    arts = _Artifacts(cfg.out)
    try:
        model = weightnet.parse_weights_file(cfg.input.read_bytes())
        graph = weightnet.assign_global_indices(model)
        direct = relevance.direct_relevance(graph)
        extended = relevance.extended_relevance(direct, graph)
        arts.write("graph_meta.json", _graph_meta_json(graph))
        if "relevance" in cfg.emit:
            arts.write("direct_relevance.csv", relevance.relevance_csv(direct))
            arts.write("extended_relevance.csv", relevance.relevance_csv(extended))

        fc = _build_complex(extended, cfg.mode)
        if "simplices" in cfg.emit:
            arts.write("simplices.csv", complexes.simplices_csv(fc))

        diagram = persistence.reduce(persistence.boundary_matrix(fc))
        if "pairs" in cfg.emit:
            arts.write("pairs.csv", persistence.pairs_csv(diagram))

        if "metrics" in cfg.emit:
            for dim in cfg.dims:
                m = metrics.compute_metrics(diagram, dim, graph.unused_output_ids)
                arts.write(f"metrics_dim{dim}.json", metrics.metrics_json(m))

        spec = render.PlotSpec(dims=cfg.dims)
        if "diagram" in cfg.emit:
            arts.write("diagram.svg", render.diagram_svg(diagram, spec))
        if "barcode" in cfg.emit:
            arts.write("barcode.svg", render.barcode_svg(diagram, spec))
    except BaseException:
        arts.discard()
        raise
    return arts.written


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: [{args.command}] {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_relevance(args):
    arts = _Artifacts(Path(args.out))
    try:
        model = weightnet.parse_weights_file(Path(args.input).read_bytes())
        graph = weightnet.assign_global_indices(model)
        direct = relevance.direct_relevance(graph)
        extended = relevance.extended_relevance(direct, graph)
        arts.write("graph_meta.json", _graph_meta_json(graph))
        arts.write("direct_relevance.csv", relevance.relevance_csv(direct))
        arts.write("extended_relevance.csv", relevance.relevance_csv(extended))
    except BaseException:
        arts.discard()
        raise


def _cmd_complex(args):
    arts = _Artifacts(Path(args.out))
    try:
        meta = _read_graph_meta(Path(args.meta))
        extended = relevance.parse_relevance_csv(
            Path(args.input).read_text(encoding="utf-8"), meta["n"], "extended"
        )
        fc = _build_complex(extended, args.mode)
        arts.write("simplices.csv", complexes.simplices_csv(fc))
    except BaseException:
        arts.discard()
        raise


def _cmd_ph(args):
    arts = _Artifacts(Path(args.out))
    try:
        fc = complexes.parse_simplices_csv(Path(args.input).read_text(encoding="utf-8"))
        diagram = persistence.reduce(persistence.boundary_matrix(fc))
        arts.write("pairs.csv", persistence.pairs_csv(diagram))
    except BaseException:
        arts.discard()
        raise


def _cmd_metrics(args):
    arts = _Artifacts(Path(args.out))
    try:
        meta = _read_graph_meta(Path(args.meta))
        diagram = persistence.parse_pairs_csv(Path(args.input).read_text(encoding="utf-8"))
        unused = frozenset(meta["unused_output_ids"])
        for dim in _parse_dims(args.dims):
            m = metrics.compute_metrics(diagram, dim, unused)
            arts.write(f"metrics_dim{dim}.json", metrics.metrics_json(m))
    except BaseException:
        arts.discard()
        raise


def _cmd_render(args):
    arts = _Artifacts(Path(args.out))
    try:
        diagram = persistence.parse_pairs_csv(Path(args.input).read_text(encoding="utf-8"))
        spec = render.PlotSpec(dims=_parse_dims(args.dims))
        arts.write("diagram.svg", render.diagram_svg(diagram, spec))
        arts.write("barcode.svg", render.barcode_svg(diagram, spec))
    except BaseException:
        arts.discard()
        raise


def _cmd_pipeline(args):
    cfg = RunConfig(
        input=Path(args.input),
        out=Path(args.out),
        dims=_parse_dims(args.dims),
        emit=_parse_emit(args.emit),
        mode=args.mode,
        workers=args.workers,
    )
    run_pipeline(cfg)


def _build_complex(extended: relevance.RelevanceMatrix, mode: str) -> complexes.FilteredComplex:
    if mode == "flag":
        return complexes.build_filtered_complex(extended)
    if mode == "alg1":
        if extended.n > ALG1_MAX_NEURONS:
            raise ValueError(
                f"alg1 mode is restricted to {ALG1_MAX_NEURONS} neurons, got {extended.n}"
            )
        return complexes.algorithm1_complex(extended.values)
    raise ValueError(f"unknown mode {mode!r}")


def _graph_meta_json(graph: weightnet.NetworkGraph) -> str:
    payload = {
        "format_version": 1,
        "name": graph.name,
        "n": graph.n,
        "layer_sizes_out2in": list(graph.layer_sizes),
        "output_ids": sorted(graph.output_ids),
        "unused_output_ids": sorted(graph.unused_output_ids),
    }
    return json.dumps(payload, indent=2) + "\n"


def _read_graph_meta(path: Path) -> dict:
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"graph meta {path} is not valid JSON: {exc}") from exc
    for key in ("n", "unused_output_ids"):
        if key not in meta:
            raise ValueError(f"graph meta {path} is missing key {key!r}")
    return meta


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(d) for d in text.split(","))
    except ValueError as exc:
        raise ValueError(f"dims must look like '0,1', got {text!r}") from exc
    if not dims or not set(dims) <= {0, 1} or len(set(dims)) != len(dims):
        raise ValueError(f"dims must be a subset of 0,1 without repeats, got {text!r}")
    return dims


def _parse_emit(text: str) -> tuple[str, ...]:
    emit = tuple(e for e in text.split(",") if e)
    bad = [e for e in emit if e not in EMIT_CHOICES]
    if bad:
        raise ValueError(f"unknown emit targets {bad}; choose from {','.join(EMIT_CHOICES)}")
    return emit


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topoprobe",
        description="Topological complexity measurement of feed-forward network weights.",
        epilog="TOPOPROBE_SEED is reserved; every stage is deterministic in this version.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("relevance", help="weights JSON -> relevance CSVs + graph meta")
    p.add_argument("--input", required=True, help="weights JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=_cmd_relevance)

    p = sub.add_parser("complex", help="extended relevance CSV -> simplex CSV")
    p.add_argument("--input", required=True, help="extended_relevance.csv from the relevance stage")
    p.add_argument("--meta", required=True, help="graph_meta.json from the relevance stage")
    p.add_argument("--mode", choices=("flag", "alg1"), default="flag")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_complex)

    p = sub.add_parser("ph", help="simplex CSV -> persistence pairs CSV")
    p.add_argument("--input", required=True, help="simplices.csv from the complex stage")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_ph)

    p = sub.add_parser("metrics", help="pairs CSV -> metrics JSON per dimension")
    p.add_argument("--input", required=True, help="pairs.csv from the ph stage")
    p.add_argument("--meta", required=True, help="graph_meta.json from the relevance stage")
    p.add_argument("--dims", default="0,1")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("render", help="pairs CSV -> diagram and barcode SVGs")
    p.add_argument("--input", required=True, help="pairs.csv from the ph stage")
    p.add_argument("--dims", default="0,1")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_render)

    p = sub.add_parser("pipeline", help="run every stage on a weights JSON file")
    p.add_argument("--input", required=True, help="weights JSON file")
    p.add_argument("--out", required=True)
    p.add_argument("--dims", default="0,1")
    p.add_argument("--emit", default=",".join(DEFAULT_EMIT))
    p.add_argument("--mode", choices=("flag", "alg1"), default="flag")
    p.add_argument(
        "--workers",
        type=int,
        default=None,
        help="worker budget (defaults to available parallelism); results are identical for any value",
    )
    p.set_defaults(handler=_cmd_pipeline)
    return parser


if __name__ == "__main__":
    sys.exit(main())
