import pytest

from topoprobe import complexes as cx
from topoprobe import persistence as ph
from topoprobe import relevance as rel
from topoprobe import render as rd
from topoprobe import weightnet as wn

from conftest import random_layered_model
from test_metrics import make_diagram


def random_diagram(rng):
    g = wn.assign_global_indices(random_layered_model(rng))
    fc = cx.build_filtered_complex(rel.extended_relevance(rel.direct_relevance(g), g))
    return ph.reduce(ph.boundary_matrix(fc))


class TestDiagramSvg:
    def test_empty_diagram_has_axes_and_diagonal_only(self):
        svg = rd.diagram_svg(make_diagram())
        assert svg.startswith(b"<svg")
        assert svg.count(b"<circle") == 0
        assert b"stroke-dasharray" in svg  # the diagonal reference line

    def test_single_pair_is_one_point(self):
        svg = rd.diagram_svg(make_diagram(dim1_pairs=[(3, 4)]))
        assert svg.count(b"<circle") == 1
        assert b"#2ca02c" in svg  # dimension 1 is green

    def test_coincident_pairs_collapse_to_shaded_point(self):
        svg = rd.diagram_svg(make_diagram(dim1_pairs=[(10, 20)] * 100))
        assert svg.count(b"<circle") == 1
        spec = rd.PlotSpec()
        assert f'fill-opacity="{spec.opacities[spec.bucket(100)]}"'.encode() in svg
        heavier = rd.diagram_svg(make_diagram(dim1_pairs=[(10, 20)] * 101))
        assert f'fill-opacity="{spec.opacities[-1]}"'.encode() in heavier

    def test_essentials_use_distinct_marker(self):
        svg = rd.diagram_svg(make_diagram(dim0_pairs=[(1, None)]))
        assert svg.count(b"<circle") == 0
        assert svg.count(b"<path") == 1
        assert b"#d62728" in svg  # dimension 0 is red

    def test_deterministic(self, rng):
        pd = random_diagram(rng)
        assert rd.diagram_svg(pd) == rd.diagram_svg(pd)

    def test_point_count_matches_distinct_coordinates(self, rng):
        pd = random_diagram(rng)
        finite = {(p.dim, p.birth, p.death) for p in pd.pairs if p.death is not None}
        essential = {(p.dim, p.birth) for p in pd.pairs if p.death is None}
        svg = rd.diagram_svg(pd)
        assert svg.count(b"<circle") == len(finite)
        assert svg.count(b"<path") == len(essential)

    def test_dims_filter(self):
        pd = make_diagram(dim1_pairs=[(3, 4)], dim0_pairs=[(1, 2)])
        svg = rd.diagram_svg(pd, rd.PlotSpec(dims=(1,)))
        assert svg.count(b"<circle") == 1
        assert b"#d62728" not in svg

    def test_axis_range_must_cover_essential_row(self):
        with pytest.raises(ValueError):
            rd.PlotSpec(axis_max=64)


class TestBarcodeSvg:
    def test_single_essential_class_is_full_width_bar(self):
        svg = rd.barcode_svg(make_diagram(dim0_pairs=[(1, None)]))
        assert svg.count(b"<line") >= 1
        assert b"#d62728" in svg

    def test_triangle_filtration_bar_count(self):
        from test_persistence import triangle_filtration

        pd = ph.reduce(ph.boundary_matrix(triangle_filtration()))
        svg = rd.barcode_svg(pd)
        bars = [line for line in svg.decode().splitlines() if "#d62728" in line or "#2ca02c" in line]
        assert len(bars) == 4  # three components plus one cycle

    def test_empty_diagram(self):
        svg = rd.barcode_svg(make_diagram())
        assert svg.startswith(b"<svg") and svg.rstrip().endswith(b"</svg>")

    def test_bar_count_equals_class_count(self, rng):
        pd = random_diagram(rng)
        svg = rd.barcode_svg(pd).decode()
        bars = [line for line in svg.splitlines() if "#d62728" in line or "#2ca02c" in line]
        assert len(bars) == len(pd.pairs)

    def test_deterministic(self, rng):
        pd = random_diagram(rng)
        assert rd.barcode_svg(pd) == rd.barcode_svg(pd)
