"""
Unit tests for PD parsing, orientation, faces and resolutions.
"""

import os
import sys

import pytest

# Add the main module to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from diagram import LinkDiagram, disjoint_union, load_pd, parse_pd, unlink
from errors import DiagramError, ParseError

TREFOIL = "PD[X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)]"
FIGURE_EIGHT = "PD[X(4,2,5,1),X(8,6,1,5),X(6,3,7,4),X(2,7,3,8)]"
HOPF = "PD[X(4,1,3,2),X(2,3,1,4)]"
CORPUS = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "corpus"
)


class TestParsing:
    """PD text to diagrams."""

    def test_trefoil(self):
        """Three crossings, one component, all positive."""
        d = parse_pd(TREFOIL)
        assert len(d) == 3
        assert d.loops == ()
        assert len(d.components()) == 1
        assert d.signs() == (3, 0)

    def test_figure_eight_writhe_zero(self):
        """The figure-eight diagram has two crossings of each sign."""
        assert parse_pd(FIGURE_EIGHT).signs() == (2, 2)

    def test_hopf_has_two_components(self):
        """Each Hopf component numbers its own two edges."""
        d = parse_pd(HOPF)
        assert len(d.components()) == 2
        assert d.signs() == (2, 0)

    def test_whitespace_and_loops(self):
        """Spaces are ignored and loops get labels after the edges."""
        d = parse_pd("PD[ X(1,4,2,5), X(3,6,4,1), X(5,2,6,3) ] loops=2")
        assert d.loops == (7, 8)

    def test_empty_diagram(self):
        """PD[] with loops is a crossingless unlink."""
        assert parse_pd("PD[] loops=2") == unlink(2)

    def test_malformed_text(self):
        """Garbage is a ParseError carrying the source."""
        with pytest.raises(ParseError) as info:
            parse_pd("PD[X(1,2,3)]", source="bad.pd", line=1)
        assert info.value.source == "bad.pd"
        assert str(info.value).startswith("bad.pd:1: ")

    def test_label_used_three_times(self):
        """Every edge label must appear exactly twice."""
        with pytest.raises(DiagramError, match="appears 3 times"):
            parse_pd("PD[X(1,1,1,2)]")

    def test_non_planar_code(self):
        """The virtual trefoil bounds two faces instead of four."""
        with pytest.raises(DiagramError, match="faces"):
            parse_pd("PD[X(2,1,3,4),X(3,2,4,1)]")

    def test_corpus_files_load(self):
        """Every bundled PD file parses and validates."""
        expected = {
            "unknot": 0, "unlink2": 0, "hopf": 2, "trefoil": 3,
            "figure_eight": 4, "square_knot": 6, "stevedore": 7,
        }
        for name, crossings in expected.items():
            assert len(load_pd(os.path.join(CORPUS, name + ".pd"))) == crossings

    def test_square_knot_signs(self):
        """A trefoil summed with its mirror has three crossings of each sign."""
        assert load_pd(os.path.join(CORPUS, "square_knot.pd")).signs() == (3, 3)


class TestFaces:
    """Face tracing obeys Euler's formula."""

    def test_trefoil_faces(self):
        """n crossings bound n + 2 faces."""
        d = parse_pd(TREFOIL)
        assert len(d.faces) == 5
        assert sum(len(f) for f in d.faces) == 12

    def test_each_edge_has_two_sides(self):
        """Every edge borders faces once along and once against its orientation."""
        d = parse_pd(FIGURE_EIGHT)
        for lab in d.edges:
            assert sorted(along for _, along in d.faces_of(lab)) == [False, True]

    def test_loop_faces(self):
        """A free loop contributes its inside and outside."""
        d = unlink(1)
        assert [f.edges for f in d.faces] == [((1, True),), ((1, False),)]


class TestDerivedDiagrams:
    """Mirror, union, relabelling and rendering."""

    def test_mirror_flips_signs(self):
        """Mirroring a positive trefoil gives three negative crossings."""
        assert parse_pd(TREFOIL).mirror().signs() == (0, 3)

    def test_disjoint_union_counts(self):
        """Crossings and loops add; labels of the second summand are shifted."""
        d = disjoint_union(parse_pd(TREFOIL), unlink(1))
        assert len(d) == 3
        assert d.loops == (7,)
        assert len(d.components()) == 2

    def test_render_reparses(self):
        """Rendered text parses back to a diagram with the same structure."""
        d = parse_pd(FIGURE_EIGHT)
        again = parse_pd(d.render())
        assert again.signs() == d.signs()
        assert len(again.faces) == len(d.faces)

    def test_relabel_keeps_structure(self):
        """Renaming labels is a bijection on edges."""
        d = parse_pd(TREFOIL).relabeled({1: 10})
        assert 10 in d.edges and 1 not in d.edges
        d.validate()

    def test_validate_rejects_bad_orientation_data(self):
        """over_in must have one entry per crossing."""
        with pytest.raises(DiagramError):
            LinkDiagram(((1, 4, 2, 5),), (), ()).validate()


class TestResolutions:
    """Circles of the cube of resolutions."""

    def test_trefoil_extreme_states(self):
        """The oriented resolution has two Seifert circles, the other extreme three."""
        d = parse_pd(TREFOIL)
        assert len(d.resolve((0, 0, 0))) == 2
        assert len(d.resolve((1, 1, 1))) == 3
        assert len(d.resolve((1, 0, 0))) == 1

    def test_loops_are_circles(self):
        """Free loops survive every resolution."""
        d = disjoint_union(parse_pd(TREFOIL), unlink(2))
        assert len(d.resolve((0, 0, 0))) == 4

    def test_wrong_vertex_length(self):
        """A vertex must pick a smoothing for every crossing."""
        with pytest.raises(DiagramError):
            parse_pd(TREFOIL).resolve((0, 1))
