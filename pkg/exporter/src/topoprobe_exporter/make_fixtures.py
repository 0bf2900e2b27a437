"""Regenerate every committed weights fixture.

Usage: python -m topoprobe_exporter.make_fixtures [FIXTURES_DIR]

Trains 5 seeds for each class count in {10, 5, 1} on the (64, 32, 16, 10)
architecture plus one 20-output run, all with the package's default recipe,
and copies the k=5 seed-0 file to its unsuffixed alias.  Sequential runtime
is tens of minutes; the analyzer's test suite never calls this — it reads
the committed files.
"""

from __future__ import annotations

import shutil
import sys
import time
from pathlib import Path

from .export import ExportJob, train_and_export

# exporter/src/topoprobe_exporter/ -> repo root, assuming an editable install
DEFAULT_DIR = Path(__file__).resolve().parents[3] / "fixtures"


def generate(fixtures_dir: Path) -> list[Path]:
    jobs = []
    for classes in (10, 5, 1):
        for seed in range(5):
            jobs.append(
                ExportJob(
                    classes=classes,
                    outputs=10,
                    layer_sizes=(64, 32, 16, 10),
                    seed=seed,
                    out=fixtures_dir / f"fcn_digits_k{classes}_seed{seed}.json",
                )
            )
    jobs.append(
        ExportJob(
            classes=10,
            outputs=20,
            layer_sizes=(64, 32, 16, 20),
            seed=0,
            out=fixtures_dir / "fcn_digits_k10_outputs20.json",
        )
    )
    written = []
    for job in jobs:
        start = time.time()
        written.append(train_and_export(job))
        print(f"wrote {job.out.name} ({time.time() - start:.0f}s)", flush=True)
    alias = fixtures_dir / "fcn_digits_k5.json"
    shutil.copyfile(fixtures_dir / "fcn_digits_k5_seed0.json", alias)
    written.append(alias)
    print(f"copied fcn_digits_k5_seed0.json -> {alias.name}", flush=True)
    return written


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_DIR
    generate(target)
