"""
Unit tests for ribbon concordances and the special movies built from them.
"""

import os
import random
import sys

import pytest

# Add the main module to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cobordism import Birth, Movie, MovieEvaluator, R2Plus, Saddle, parse_movie, reverse
from diagram import load_pd, parse_pd, unlink
from errors import EventError, RibbonSpecError
from ribbon import (
    BUNDLED_RIBBONS,
    Band,
    RibbonConcordanceSpec,
    alt_decomposition_movie,
    bundled_spec,
    concordance_movie,
    load_ribbon,
    parse_ribbon,
    neck_passing_movie,
    random_ribbon_spec,
    roundtrip_movie,
    saddle_pair_movie,
)

CORPUS = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "corpus"
)
TREFOIL = "PD[X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)]"


class TestRibbonSpec:
    """Shape rules of a ribbon presentation."""

    def test_bundled_specs_validate(self):
        """Every bundled concordance has as many births as bands."""
        for name in BUNDLED_RIBBONS:
            spec = bundled_spec(name)
            assert len(spec.births) == len(spec.bands)
            assert len(spec.target.components()) == 1

    def test_corpus_files_match_bundled_text(self):
        """Corpus ribbon files describe the same movies as the built-in copies."""
        for name in BUNDLED_RIBBONS:
            spec = load_ribbon(os.path.join(CORPUS, name + ".ribbon"))
            assert concordance_movie(spec) == concordance_movie(bundled_spec(name))

    def test_from_movie_splits_bands(self):
        """Routing events are grouped with the saddle that follows them."""
        spec = bundled_spec("two_band")
        assert [len(b.routing) for b in spec.bands] == [1, 1]
        assert all(isinstance(b.saddle, Saddle) for b in spec.bands)

    def test_unbalanced_births(self):
        """A birth without a band is rejected."""
        spec = RibbonConcordanceSpec(unlink(1), births=(Birth(),))
        with pytest.raises(RibbonSpecError, match="1 births"):
            spec.validate()

    def test_source_must_be_a_knot(self):
        """Concordances here start from a knot."""
        with pytest.raises(RibbonSpecError, match="knot"):
            RibbonConcordanceSpec(unlink(2)).validate()

    def test_band_must_fuse(self):
        """A band that splits a component is not a ribbon band."""
        spec = RibbonConcordanceSpec(
            unlink(1), births=(Birth(),), bands=(Band((), Saddle((1, 0), (1, 1))),)
        )
        with pytest.raises(RibbonSpecError):
            spec.validate()

    def test_routing_must_be_isotopy(self):
        """Births inside a band's routing are refused."""
        spec = RibbonConcordanceSpec(
            unlink(1),
            births=(Birth(),),
            bands=(Band((Birth(),), Saddle((1, 0), (2, 0))),),
        )
        with pytest.raises(RibbonSpecError, match="isotopy"):
            spec.validate()

    def test_load_requires_header(self, tmp_path):
        """A plain movie file is not a ribbon file."""
        path = tmp_path / "plain.ribbon"
        path.write_text("diagram PD[] loops=1\n")
        with pytest.raises(RibbonSpecError, match="ribbon"):
            load_ribbon(str(path))

    def test_dual_header_reverses(self):
        """A 'ribbon dual' file is read upside down and turned forwards."""
        spec = bundled_spec("square_knot")
        assert len(spec.births) == 1 and len(spec.bands) == 1
        assert [e.kind for e in spec.bands[0].routing] == ["r2+", "r2+", "r2+"]
        assert spec.source.crossings == ()

    def test_dual_must_reverse_to_a_ribbon(self):
        """A dual with a birth turns into a concordance with a death."""
        text = "ribbon dual\ndiagram PD[] loops=1\nbirth\n"
        with pytest.raises(RibbonSpecError):
            parse_ribbon(text, source="dual.ribbon")

    @pytest.mark.parametrize("name", ["square_knot", "stevedore"])
    def test_knotted_targets_match_corpus(self, name):
        """The unknot concordances end on the corpus square knot and stevedore."""
        spec = bundled_spec(name)
        target = load_pd(os.path.join(CORPUS, name + ".pd"))
        assert spec.target == target
        assert spec.source == unlink(1)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_specs_validate(self, seed):
        """Seeded random concordances satisfy the shape rules."""
        spec = random_ribbon_spec(random.Random(seed), bands=1 + seed % 2)
        movie = concordance_movie(spec)
        assert movie.count("death") == 0
        assert movie.count("birth") == movie.count("saddle")


class TestRibbonMaps:
    """The concordance map is injective with the reverse as left inverse."""

    @pytest.mark.parametrize("name", BUNDLED_RIBBONS)
    def test_left_inverse(self, name):
        """F(C̄)∘F(C) is the identity on H(source)."""
        ev = MovieEvaluator()
        induced = ev.homology_map(roundtrip_movie(bundled_spec(name)))
        assert induced.is_identity()

    def test_one_band_rank(self):
        """The one-band concordance map has full rank and degree zero."""
        ev = MovieEvaluator()
        movie = concordance_movie(bundled_spec("one_band"))
        forward = ev.homology_map(movie)
        assert forward.rank == forward.source.total_dim
        assert forward.q_shift == 0
        assert reverse(movie).count("death") == 1


class TestSpecialMovies:
    """Neck passing and the alternative decomposition."""

    @pytest.mark.parametrize("variant", ["weak", "full"])
    def test_neck_passing_returns_to_start(self, variant):
        """The go-around isotopy ends on its starting frame."""
        movie = neck_passing_movie(variant)
        assert movie.final == movie.initial
        assert movie.is_isotopy
        assert movie.count("r2+") == movie.count("r2-") == 2

    def test_full_neck_passing_is_identity(self):
        """Passing a free loop around a strand and back is the identity."""
        assert MovieEvaluator().homology_map(neck_passing_movie("full")).is_identity()

    def test_strong_neck_passing_on_trefoil_strand(self):
        """A loop routed around one trefoil strand induces the identity."""
        trefoil = parse_pd(TREFOIL)
        movie = neck_passing_movie("strong", trefoil, 1)
        assert movie.initial.loops == (7,)
        assert MovieEvaluator().homology_map(movie).is_identity()

    def test_unknown_variant(self):
        """Only weak, full and strong exist."""
        with pytest.raises(ValueError, match="unknown neck-passing variant"):
            neck_passing_movie("medium")

    def test_strong_needs_an_existing_edge(self):
        """The strand to go around must exist."""
        with pytest.raises(EventError, match="no edge"):
            neck_passing_movie("strong", parse_pd(TREFOIL), 42)

    def test_alt_decomposition_agrees(self):
        """Split-route-merge equals saddle followed by its dual."""
        ev = MovieEvaluator()
        for diagram, first, second in ((unlink(2), 1, 2), (unlink(1), 1, 1)):
            direct = ev.homology_map(saddle_pair_movie(diagram, first, second))
            routed = ev.homology_map(alt_decomposition_movie(diagram, first, second))
            assert direct.matrix == routed.matrix

    def test_alt_decomposition_routing_must_free_the_loop(self):
        """Routing that leaves the split loop tangled is refused."""
        with pytest.raises(EventError, match="free"):
            alt_decomposition_movie(unlink(2), 1, 2, routing=[R2Plus(3, 2, 1)])

    def test_saddle_pair_shape(self):
        """A saddle and its dual: two saddles, Euler characteristic -2."""
        movie = saddle_pair_movie(unlink(2), 1, 2)
        assert movie.count("saddle") == 2
        assert movie.euler_characteristic == -2
        assert isinstance(movie, Movie)
