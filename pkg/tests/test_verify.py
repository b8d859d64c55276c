"""
Tests for the verification suites and their reports.
"""

import json
import os
import sys

import pytest

# Add the main module to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from algebra import FrobeniusAlgebra, khovanov_algebra
from cobordism import Birth, Movie, MovieEvaluator, R1Plus
from diagram import disjoint_union, parse_pd, unlink
from ribbon import bundled_spec
from verify import (
    SUITES,
    VerificationReport,
    bundled_diagrams,
    bundled_movies,
    reports_table,
    reports_to_json,
    run_suite,
    tensor_transfer,
    verify_alt_decomposition,
    verify_degree_law,
    verify_disjoint_commutation,
    verify_multiplicativity,
    verify_neck_passing,
    verify_oracle,
    verify_ribbon,
    verify_theory_axioms,
)

TREFOIL = "PD[X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)]"
HOPF = "PD[X(4,1,3,2),X(2,3,1,4)]"


class TestReports:
    """Report objects and their renderings."""

    def test_json_fields(self):
        """A report serialises name, status, witness, timing and seed."""
        report = VerificationReport("x", "fail", {"rank": 1}, 12.345, seed=3)
        data = json.loads(report.to_json())
        assert data == {
            "name": "x",
            "status": "fail",
            "witness": {"rank": 1},
            "elapsed_ms": 12.3,
            "seed": 3,
        }
        assert not report.passed

    def test_json_without_timing_is_deterministic(self):
        """Dropping timings leaves only reproducible fields."""
        a = [VerificationReport("x", "pass", {}, 1.0)]
        b = [VerificationReport("x", "pass", {}, 2.0)]
        assert reports_to_json(a, timing=False) == reports_to_json(b, timing=False)

    def test_table_shows_witness_on_failure(self):
        """Failing rows print their witness."""
        rows = [
            VerificationReport("ok", "pass"),
            VerificationReport("bad", "fail", {"k": 1}),
        ]
        table = reports_table(rows)
        lines = table.splitlines()
        assert len(lines) == 3
        assert '{"k": 1}' in lines[2]


class TestChecks:
    """Individual property checks pass on correct inputs."""

    @pytest.mark.parametrize("level", ["weak", "full"])
    def test_neck_passing(self, level):
        """Weak and full neck passing hold."""
        assert verify_neck_passing(level).passed

    def test_strong_neck_passing_one_edge(self):
        """The strong relation holds for a chosen trefoil strand."""
        trefoil = parse_pd(TREFOIL)
        assert verify_neck_passing("strong", pairs=[(trefoil, 2)]).passed

    def test_ribbon(self):
        """The one-band concordance passes all ribbon checks."""
        report = verify_ribbon(bundled_spec("one_band"))
        assert report.passed, report.witness
        assert report.name == "ribbon/one_band"

    @pytest.mark.parametrize("name", ["square_knot", "stevedore"])
    def test_knotted_ribbon(self, name):
        """Unknot to square knot and stevedore: rank 2, left inverse, no drops."""
        spec = bundled_spec(name)
        report = verify_ribbon(spec)
        assert report.passed, report.witness
        ev = MovieEvaluator()
        source, target = ev.homology(spec.source).dims, ev.homology(spec.target).dims
        assert all(n <= target.get(key, 0) for key, n in source.items())

    def test_disjoint_commutation(self):
        """Events on different components commute on homology."""
        report = verify_disjoint_commutation()
        assert report.passed, report.witness

    def test_disjoint_commutation_needs_matching_frames(self):
        """Orders that end on different frames are an error, not a pass."""
        instance = ("births", unlink(1), Birth(), Birth())
        report = verify_disjoint_commutation([instance])
        assert report.passed
        clash = ("kinks", unlink(1), Birth(), R1Plus(1, "R", 1))
        assert "error" in verify_disjoint_commutation([clash]).witness

    def test_multiplicativity_with_movies(self):
        """F(S1 ⊔ S2) agrees with F(S1) ⊗ F(S2)."""
        trefoil = parse_pd(TREFOIL)
        movies = (Movie.identity(trefoil), Movie.build(unlink(1), [Birth()]))
        assert verify_multiplicativity(trefoil, unlink(1), movies=movies).passed

    def test_associativity(self):
        """The tensor transfer is associative on a triple union."""
        report = verify_multiplicativity(parse_pd(HOPF), unlink(1), third=unlink(1))
        assert report.passed

    def test_tensor_transfer_is_invertible(self):
        """H(D1) ⊗ H(D2) → H(D1 ⊔ D2) is an isomorphism."""
        ev = MovieEvaluator()
        u, t = unlink(1), parse_pd(TREFOIL)
        union = ev.homology(disjoint_union(u, t))
        transfer = tensor_transfer(ev.homology(u), ev.homology(t), union)
        assert transfer.shape == (12, 12)
        assert transfer.rank() == 12

    def test_theory_axioms(self):
        """The default algebra satisfies the axioms and the sphere evaluates to zero."""
        report = verify_theory_axioms(diagrams={"unknot": unlink(1)})
        assert report.passed, report.witness

    def test_theory_axioms_flag_bad_counit(self):
        """An algebra with ε(1) = 1 is reported with a witness."""
        good = khovanov_algebra()
        counit = {"1": 1, "X": 1}
        bad = FrobeniusAlgebra("bad", good.unit, counit, good.mult, good.comult)
        report = verify_theory_axioms(bad, diagrams={"unknot": unlink(1)})
        assert not report.passed
        assert "frobenius" in report.witness

    def test_oracle(self):
        """Reduction and brute force agree on small diagrams."""
        diagrams = {"trefoil": parse_pd(TREFOIL), "hopf": parse_pd(HOPF)}
        assert verify_oracle(diagrams).passed

    def test_degree_law(self):
        """A handful of random movies obey the degree law."""
        report = verify_degree_law(seed=11, count=5)
        assert report.passed, report.witness
        assert report.seed == 11

    def test_alt_decomposition(self):
        """Both default instances agree."""
        assert verify_alt_decomposition().passed


class TestCorpus:
    """Bundled inputs load."""

    def test_bundled_diagrams(self):
        """Every PD file in the corpus parses."""
        diagrams = bundled_diagrams()
        assert set(diagrams) == {
            "unknot",
            "unlink2",
            "hopf",
            "trefoil",
            "figure_eight",
            "square_knot",
            "stevedore",
        }

    def test_bundled_movies(self):
        """Movies and ribbon files load as movies."""
        movies = bundled_movies()
        expected = {"tube", "neck_passing", "cylinder", "one_band", "two_band"}
        assert expected | {"square_knot", "stevedore"} <= set(movies)
        assert movies["cylinder"].ribbon


class TestRunSuite:
    """The suite dispatcher."""

    def test_unknown_suite(self):
        """Unknown names raise ValueError listing the valid ones."""
        with pytest.raises(ValueError, match="unknown suite"):
            run_suite("everything")

    def test_alt_decomposition_suite(self):
        """A single suite returns its reports sorted by name."""
        reports = run_suite("alt-decomposition")
        assert [r.name for r in reports] == ["alt-decomposition"]
        assert all(r.passed for r in reports)

    def test_neck_passing_suite(self):
        """The neck-passing suite reports each level."""
        names = [r.name for r in run_suite("neck-passing")]
        expected = ["neck-passing/full", "neck-passing/strong", "neck-passing/weak"]
        assert names == expected

    def test_suite_names(self):
        """Every documented suite is available."""
        assert set(SUITES) == {
            "neck-passing",
            "ribbon",
            "multiplicativity",
            "axioms",
            "oracle",
            "degree-law",
            "alt-decomposition",
        }

    @pytest.mark.slow
    def test_all_suites_pass(self):
        """The full run passes with a reduced random budget."""
        reports = run_suite("all", random_movies=10)
        failed = {r.name: r.witness for r in reports if not r.passed}
        assert failed == {}
