"""
Unit tests for the Khovanov complex and its homology.
"""

import os
import sys

import pytest

# Add the main module to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from algebra import bar_natan_algebra
from chain_complex import (
    Eliminator,
    _deloop_pairs,
    build_complex,
    dims_convolution,
    homology,
    kauffman_euler,
    reduce,
)
from diagram import disjoint_union, load_pd, parse_pd, unlink

TREFOIL = "PD[X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)]"
HOPF = "PD[X(4,1,3,2),X(2,3,1,4)]"
CORPUS = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "corpus"
)

UNKNOT_DIMS = {(0, -1): 1, (0, 1): 1}
TREFOIL_DIMS = {(0, 1): 1, (0, 3): 1, (2, 5): 1, (2, 7): 1, (3, 7): 1, (3, 9): 1}
HOPF_DIMS = {(0, 0): 1, (0, 2): 1, (2, 4): 1, (2, 6): 1}


class TestBuildComplex:
    """Generators, gradings and d² = 0."""

    def test_generator_count_matches_state_sum(self):
        """Each vertex contributes 2^(number of circles) generators."""
        d = parse_pd(TREFOIL)
        cx = build_complex(d)
        vertices = {g.vertex for g in cx.generators}
        expected = sum(2 ** len(d.resolve(v)) for v in vertices)
        assert len(cx) == expected == 30

    def test_d_squared_and_grading(self):
        """The differential squares to zero and preserves q."""
        cx = build_complex(parse_pd(HOPF))
        cx.check_d_squared()
        cx.check_grading()

    def test_homological_range(self):
        """h runs from -n_minus to n_plus."""
        cx = build_complex(parse_pd(TREFOIL).mirror())
        assert cx.degrees() == [-3, -2, -1, 0]

    def test_bar_natan_is_ungraded(self):
        """The deformed algebra still gives a complex, without a q-grading."""
        cx = build_complex(parse_pd(HOPF), bar_natan_algebra())
        assert not cx.graded
        cx.check_d_squared()


class TestHomology:
    """Known homology groups over GF(2)."""

    def test_unknot(self):
        """The crossingless unknot has H = A."""
        assert homology(build_complex(unlink(1))).dims == UNKNOT_DIMS

    def test_two_component_unlink(self):
        """H(U ⊔ U) = A ⊗ A."""
        dims = homology(build_complex(unlink(2))).dims
        assert dims == {(0, -2): 1, (0, 0): 2, (0, 2): 1}

    def test_trefoil(self):
        """Positive trefoil over GF(2), torsion classes included."""
        hg = homology(build_complex(parse_pd(TREFOIL)))
        assert hg.dims == TREFOIL_DIMS
        assert hg.total_dim == 6

    def test_mirror_trefoil(self):
        """Mirroring negates both gradings."""
        hg = homology(build_complex(parse_pd(TREFOIL).mirror()))
        assert hg.dims == {(-h, -q): n for (h, q), n in TREFOIL_DIMS.items()}

    def test_hopf(self):
        """Positive Hopf link."""
        assert homology(build_complex(parse_pd(HOPF))).dims == HOPF_DIMS

    @pytest.mark.parametrize(
        "name,total", [("figure_eight", 10), ("square_knot", 18), ("stevedore", 18)]
    )
    def test_thin_knots_total_dimension(self, name, total):
        """For these knots dim H = 2·det over GF(2)."""
        d = load_pd(os.path.join(CORPUS, name + ".pd"))
        assert homology(build_complex(d)).total_dim == total

    def test_kink_does_not_change_homology(self):
        """A one-crossing unknot has the unknot's homology."""
        kink = parse_pd("PD[X(1,2,2,1)]")
        assert homology(build_complex(kink)).dims == UNKNOT_DIMS

    def test_reduce_and_oracle_agree(self):
        """Three computation paths give identical tables."""
        cx = build_complex(parse_pd(TREFOIL))
        reduced = homology(cx, use_reduce=True)
        plain = homology(cx, use_reduce=False)
        oracle = homology(cx, oracle=True)
        assert reduced.dims == plain.dims == oracle.dims
        methods = (reduced.method, plain.method, oracle.method)
        assert methods == ("reduced", "cancellation", "oracle")

    def test_representatives_project_to_basis(self):
        """Each representative has coordinates equal to its own basis vector."""
        cx = build_complex(parse_pd(HOPF))
        for hg in (homology(cx), homology(cx, oracle=True)):
            for i, rep in enumerate(hg.representatives):
                assert not cx.apply(rep)
                coords = hg.project(rep)
                assert [k for k, v in enumerate(coords) if v] == [i]

    def test_graded_euler_is_state_sum(self):
        """Σ(-1)^h dim H equals the Kauffman-bracket state sum."""
        d = parse_pd(TREFOIL)
        assert homology(build_complex(d)).graded_euler() == kauffman_euler(d)

    def test_kunneth(self):
        """Homology of a split union is the convolution of the factors."""
        t, u = parse_pd(TREFOIL), unlink(1)
        union = homology(build_complex(disjoint_union(t, u))).dims
        assert union == dims_convolution(TREFOIL_DIMS, UNKNOT_DIMS)

    def test_table_layout(self):
        """The table has a header row plus one row per q."""
        hg = homology(build_complex(parse_pd(TREFOIL)))
        lines = hg.table().splitlines()
        assert len(lines) == 1 + 5
        assert lines[0].split()[1:] == ["0", "2", "3"]
        assert hg.poincare_polynomial().startswith("t^0q^1")


class TestCancellation:
    """The Gaussian elimination engine."""

    def test_reduce_preserves_homology(self):
        """The reduced complex is smaller and keeps the same dims."""
        cx = build_complex(parse_pd(TREFOIL))
        small = reduce(cx)
        assert len(small) < len(cx)
        assert homology(cx).dims == homology(cx, use_reduce=False).dims

    def test_square_knot_reduces_strictly(self):
        """Delooping and cancellation shrink the square knot's complex, H unchanged."""
        cx = build_complex(load_pd(os.path.join(CORPUS, "square_knot.pd")))
        small = reduce(cx)
        assert len(small) < len(cx)
        small.complex.check_d_squared()
        small.complex.check_grading()
        assert homology(cx).dims == homology(cx, oracle=True).dims

    def test_deloop_pairs_are_unit_merge_entries(self):
        """Each delooping pivot is a differential entry along a merge edge."""
        cx = build_complex(parse_pd(TREFOIL))
        pairs = _deloop_pairs(cx)
        assert pairs
        for a, c in pairs:
            assert c in cx.differential[a]
            source, target = cx.generators[a], cx.generators[c]
            assert len(cx.circles_of(target)) == len(cx.circles_of(source)) - 1

    def test_reduced_maps_are_inverse_on_homology(self):
        """Projecting an included cycle gives it back."""
        cx = build_complex(parse_pd(HOPF))
        small = reduce(cx)
        for z in range(len(small)):
            assert small.project(small.include([z])) == {z}

    def test_eliminator_on_acyclic_pair(self):
        """Cancelling a ↦ b leaves nothing."""
        engine = Eliminator([frozenset({1}), frozenset()]).eliminate()
        assert engine.alive == []
