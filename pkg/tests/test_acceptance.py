"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import itertools
import time
from collections import Counter
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from topoprobe import cli
from topoprobe import complexes as cx
from topoprobe import metrics as mx
from topoprobe import persistence as ph
from topoprobe import relevance as rel
from topoprobe import weightnet as wn

from conftest import FIXTURES, random_layered_model

TREND_SEEDS = (0, 1, 2, 3, 4)
TREND_CLASSES = (10, 5, 1)


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def full_run(model: wn.NetworkModel):
    g = wn.assign_global_indices(model)
    e = rel.extended_relevance(rel.direct_relevance(g), g)
    fc = cx.build_filtered_complex(e)
    pd = ph.reduce(ph.boundary_matrix(fc))
    return g, e, fc, pd


def fixture_metrics(path: Path) -> mx.DiagramMetrics:
    model = wn.parse_weights_file(path.read_bytes())
    g, _, _, pd = full_run(model)
    return mx.compute_metrics(pd, 1, g.unused_output_ids)


def test_betti_oracle():
    with criterion("betti oracle (200 graphs, exact, <60s)"):
        rng = np.random.default_rng(7001)
        start = time.monotonic()
        for _ in range(200):
            _, _, fc, pd = full_run(random_layered_model(rng))
            stages = sorted({s.filt_index for s in fc.simplices})
            for p in (0, 1):
                curve = ph.betti_curve(pd, p)
                expected_at = {n: ph.betti_brute_force(fc, n, p) for n in stages}
                value = 0
                for n in range(1, 65):
                    value = expected_at.get(n, value)
                    assert curve[n - 1] == value, f"stage {n} dim {p}"
        elapsed = time.monotonic() - start
        assert elapsed < 60, f"took {elapsed:.1f}s"


def test_relevance_oracle():
    with criterion("relevance oracle (200 graphs, 1e-12, <10s)"):
        rng = np.random.default_rng(7002)
        start = time.monotonic()
        for _ in range(200):
            g = wn.assign_global_indices(random_layered_model(rng))
            d = rel.direct_relevance(g)
            fast = rel.extended_relevance(d, g).values
            slow = rel.brute_force_extended_relevance(d, g).values
            assert np.max(np.abs(fast - slow)) <= 1e-12
        elapsed = time.monotonic() - start
        assert elapsed < 10, f"took {elapsed:.1f}s"


def test_schedule_anchors():
    with criterion("schedule anchors (exact values)"):
        sched = cx.threshold_schedule()
        assert sched.value(1) == 1.0
        assert sched.value(2) == 0.9
        assert sched.value(10) == 0.1
        assert sched.value(11) == 0.09
        assert sched.value(64) == 1e-7


def test_structural_invariants():
    with criterion("structural invariants (200 random instances)"):
        rng = np.random.default_rng(7003)
        for _ in range(200):
            _, _, fc, pd = full_run(random_layered_model(rng))
            entry = {s.vertices: s.filt_index for s in fc.simplices}

            # face closure and the flag rule
            for s in fc.simplices:
                for size in range(1, len(s.vertices)):
                    for face in itertools.combinations(s.vertices, size):
                        assert entry[face] <= s.filt_index
                if s.dim == 2:
                    assert s.filt_index == max(
                        entry[e] for e in itertools.combinations(s.vertices, 2)
                    )

            # filtration nesting: entry indices are the prefix order
            indices = [s.filt_index for s in fc.simplices]
            assert indices == sorted(indices)

            # pairing accounting
            counts = Counter(s.dim for s in fc.simplices)
            everything = list(pd.pairs) + list(pd.zero_pairs)
            finite = Counter((p.dim, p.death is None) for p in everything)
            assert finite[(0, False)] + finite[(0, True)] == counts[0]
            assert finite[(1, False)] + finite[(1, True)] == counts[1] - finite[(0, False)]
            assert finite[(1, False)] + len(pd.dim2_creator_indices) == counts[2]
            creators = [(p.dim, p.creator.vertices) for p in everything]
            destroyers = [p.destroyer.vertices for p in everything if p.destroyer]
            assert len(creators) == len(set(creators))
            assert len(destroyers) == len(set(destroyers))

            # representative cycles: zero boundary, latest edge at the birth index
            for pair in everything:
                if pair.dim == 1:
                    edges = pair.representative.simplices
                    degree = Counter(v for e in edges for v in e)
                    assert all(d % 2 == 0 for d in degree.values())
                    assert max(entry[e] for e in edges) == pair.birth

            # Euler characteristic at every occupied stage
            b0, b1 = ph.betti_curve(pd, 0), ph.betti_curve(pd, 1)
            for n in sorted({s.filt_index for s in fc.simplices}):
                stage_counts = Counter(s.dim for s in cx.complex_at(fc, n))
                b2 = sum(1 for k in pd.dim2_creator_indices if k <= n)
                assert (
                    stage_counts[0] - stage_counts[1] + stage_counts[2]
                    == b0[n - 1] - b1[n - 1] + b2
                )


def test_scaling_invariance():
    with criterion("per-layer positive rescaling leaves diagrams bit-identical"):
        rng = np.random.default_rng(7004)
        for _ in range(40):
            model = random_layered_model(rng)
            k = int(rng.integers(0, len(model.layers)))
            c = float(rng.uniform(0.05, 20.0))
            scaled_layers = list(model.layers)
            scaled_layers[k] = wn.LayerMatrix(
                model.layers[k].rows, model.layers[k].cols, model.layers[k].weights * c
            )
            scaled = wn.NetworkModel(
                tuple(scaled_layers), model.output_size, model.used_outputs, model.name
            )
            _, _, _, pd_a = full_run(model)
            _, _, _, pd_b = full_run(scaled)
            assert pd_a == pd_b
            assert ph.pairs_csv(pd_a) == ph.pairs_csv(pd_b)


def test_workers_determinism(tmp_path):
    with criterion("--workers 1 vs default: byte-identical artifacts on all fixtures"):
        emit = "pairs,metrics,diagram,barcode,relevance,simplices"
        for fixture in sorted(FIXTURES.glob("*.json")):
            out_default = tmp_path / f"{fixture.stem}_default"
            out_single = tmp_path / f"{fixture.stem}_w1"
            assert cli.main(["pipeline", "--input", str(fixture), "--out", str(out_default),
                             "--emit", emit]) == 0
            assert cli.main(["pipeline", "--input", str(fixture), "--out", str(out_single),
                             "--emit", emit, "--workers", "1"]) == 0
            a = {p.name: p.read_bytes() for p in sorted(out_default.iterdir())}
            b = {p.name: p.read_bytes() for p in sorted(out_single.iterdir())}
            assert a == b, f"artifacts differ for {fixture.name}"


def test_trend_reproduction():
    with criterion("trend: near-diagonal 0 at k=10/k=1, positive at k=5 (majority of seeds, <5min)"):
        start = time.monotonic()
        near: dict[int, list[int]] = {}
        for k in TREND_CLASSES:
            near[k] = []
            for seed in TREND_SEEDS:
                path = FIXTURES / f"fcn_digits_k{k}_seed{seed}.json"
                near[k].append(fixture_metrics(path).near_diagonal)
        majority = len(TREND_SEEDS) // 2 + 1
        print(f"  near-diagonal by class: {near}")
        assert sum(1 for v in near[10] if v == 0) >= majority, f"k=10 seeds: {near[10]}"
        assert sum(1 for v in near[1] if v == 0) >= majority, f"k=1 seeds: {near[1]}"
        assert sum(1 for v in near[5] if v > 0) >= majority, f"k=5 seeds: {near[5]}"
        elapsed = time.monotonic() - start
        assert elapsed < 300, f"took {elapsed:.1f}s"


def test_c1_monotone_sanity():
    with criterion("c1 monotone in unused set; c1=0 when every output is used"):
        for name in ("fcn_digits_k5.json", "tiny_3layer.json"):
            model = wn.parse_weights_file((FIXTURES / name).read_bytes())
            g, _, _, pd = full_run(model)
            outputs = sorted(g.output_ids)
            counts = [
                mx.classify_pairs(pd, frozenset(outputs[:k])).c1_count
                for k in range(len(outputs) + 1)
            ]
            assert counts == sorted(counts), f"not monotone on {name}: {counts}"

        # with every output in use nothing can touch an unused one
        k10 = wn.parse_weights_file((FIXTURES / "fcn_digits_k10_seed0.json").read_bytes())
        assert k10.used_outputs == frozenset(range(10))
        g, _, _, pd = full_run(k10)
        assert g.unused_output_ids == frozenset()
        assert mx.classify_pairs(pd, g.unused_output_ids).c1_count == 0
        assert mx.compute_metrics(pd, 1, g.unused_output_ids).c1 == 0
