"""
Executable property suites.

Every check returns a ``VerificationReport``. A failing report carries a
witness small enough to re-run by hand: the offending matrix, frame or
bidegree, and the seed when the inputs were random.
"""
from __future__ import annotations

import json
import logging
import os
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from algebra import DEFAULT_ALGEBRA, F2Matrix, FrobeniusAlgebra, check_frobenius
from chain_complex import (
    LABEL_INDEX,
    HomologyGroup,
    build_complex,
    dims_convolution,
    homology,
    kauffman_euler,
)
from cobordism import (
    Birth,
    Death,
    Event,
    Movie,
    MovieEvaluator,
    R1Plus,
    disjoint_movie,
    load_movie,
    pair_generators,
    random_diagram,
    random_movie,
    reverse,
    tensor_chain,
)
from diagram import LinkDiagram, disjoint_union, load_pd, parse_pd, unlink
from errors import KhovanovError
from ribbon import (
    RibbonConcordanceSpec,
    alt_decomposition_movie,
    concordance_movie,
    load_ribbon,
    neck_passing_movie,
    random_ribbon_spec,
    saddle_pair_movie,
)

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20190321
DEFAULT_RANDOM_MOVIES = 100
CORPUS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")

PD_FILES = (
    "unknot",
    "unlink2",
    "hopf",
    "trefoil",
    "figure_eight",
    "square_knot",
    "stevedore",
)
MOVIE_FILES = ("tube", "neck_passing")
RIBBON_FILES = ("cylinder", "one_band", "two_band", "square_knot", "stevedore")

TREFOIL_PD = "PD[X(1,4,2,5),X(3,6,4,1),X(5,2,6,3)]"
HOPF_PD = "PD[X(4,1,3,2),X(2,3,1,4)]"


@dataclass
class VerificationReport:
    name: str
    status: str
    witness: Dict[str, Any] = field(default_factory=dict)
    elapsed_ms: float = 0.0
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "name": self.name,
            "status": self.status,
            "witness": self.witness,
            "elapsed_ms": round(self.elapsed_ms, 1),
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def reports_to_json(reports: Sequence[VerificationReport], timing: bool = True) -> str:
    rows = []
    for r in reports:
        row = r.to_dict()
        if not timing:
            row.pop("elapsed_ms")
        rows.append(row)
    return json.dumps(rows, indent=2, sort_keys=True)


def reports_table(reports: Sequence[VerificationReport]) -> str:
    width = max([len("check")] + [len(r.name) for r in reports])
    lines = [f"{'check'.ljust(width)}  status  elapsed_ms  witness"]
    for r in reports:
        witness = "" if r.passed else json.dumps(r.witness, sort_keys=True)
        lines.append(
            f"{r.name.ljust(width)}  {r.status.ljust(6)}  "
            f"{r.elapsed_ms:10.1f}  {witness}"
        )
    return "\n".join(lines)


class _Check:
    """Collects failures for one report and times it"""

    def __init__(self, name: str, seed: Optional[int] = None):
        self.name = name
        self.seed = seed
        self.witness: Dict[str, Any] = {}
        self._start = time.perf_counter()

    def fail(self, key: str, value: Any) -> None:
        self.witness.setdefault(key, value)

    def expect(self, ok: bool, key: str, value: Any) -> bool:
        if not ok:
            self.fail(key, value)
        return ok

    def report(self) -> VerificationReport:
        elapsed = (time.perf_counter() - self._start) * 1000
        status = "fail" if self.witness else "pass"
        logger.info("%s: %s", self.name, status)
        return VerificationReport(self.name, status, self.witness, elapsed, self.seed)


def _guard(check: _Check, run: Callable[[], None]) -> VerificationReport:
    try:
        run()
    except KhovanovError as e:
        check.fail("error", f"{type(e).__name__}: {e}")
    return check.report()


def _corpus_path(name: str, suffix: str, corpus_dir: Optional[str] = None) -> str:
    return os.path.join(corpus_dir or CORPUS_DIR, name + suffix)


def bundled_diagrams(corpus_dir: Optional[str] = None) -> Dict[str, LinkDiagram]:
    return {name: load_pd(_corpus_path(name, ".pd", corpus_dir)) for name in PD_FILES}


def bundled_movies(corpus_dir: Optional[str] = None) -> Dict[str, Movie]:
    movies = {
        name: load_movie(_corpus_path(name, ".movie", corpus_dir))
        for name in MOVIE_FILES
    }
    for name in RIBBON_FILES:
        spec = load_ribbon(_corpus_path(name, ".ribbon", corpus_dir))
        movies[name] = concordance_movie(spec)
    return movies


# =============================================================================
# Neck passing
# =============================================================================

def _circle_slot(hg: HomologyGroup, rep: int, label: int) -> int:
    gen = hg.complex.generators[rep]
    circles = hg.complex.circles_of(gen)
    return next(i for i, circle in enumerate(circles) if label in circle)


def verify_neck_passing(
    level: str = "full",
    evaluator: Optional[MovieEvaluator] = None,
    pairs: Optional[Sequence[Tuple[LinkDiagram, int]]] = None,
) -> VerificationReport:
    """Neck passing at three strengths.

    weak: x⊗1 is fixed; full: the map is the identity; strong: identity for a
    loop around each strand.
    """
    ev = evaluator or MovieEvaluator()
    check = _Check(f"neck-passing/{level}")

    def run() -> None:
        if level == "strong":
            trefoil = parse_pd(TREFOIL_PD)
            for diagram, edge in pairs or [(trefoil, e) for e in trefoil.edges]:
                induced = ev.homology_map(neck_passing_movie("strong", diagram, edge))
                check.expect(
                    induced.is_identity(), f"edge {edge}", induced.matrix.tolist()
                )
            return
        movie = neck_passing_movie(level)
        induced = ev.homology_map(movie)
        check.expect(induced.q_shift == 0, "q_shift", induced.q_shift)
        if level == "full":
            check.expect(induced.is_identity(), "matrix", induced.matrix.tolist())
            return
        moving = movie.initial.loops[-1]
        hg = induced.source
        for i, rep in enumerate(hg.representatives):
            [g] = rep
            labels = hg.complex.generators[g].labels
            if labels[_circle_slot(hg, g, moving)] != LABEL_INDEX["1"]:
                continue
            column = induced.matrix.column_support(i)
            check.expect(column == [i], f"basis {i}", column)

    return _guard(check, run)


# =============================================================================
# Ribbon concordances
# =============================================================================

def verify_ribbon(
    spec: RibbonConcordanceSpec, evaluator: Optional[MovieEvaluator] = None
) -> VerificationReport:
    """F(C) is injective, F(C̄) is its left inverse, and F(C) preserves q.

    Injectivity in each bidegree also shows up in the dimensions: no
    H^{h,q} of the source is larger than the same group of the target.
    """
    ev = evaluator or MovieEvaluator()
    check = _Check(f"ribbon/{os.path.basename(spec.name) or 'spec'}")

    def run() -> None:
        movie = concordance_movie(spec)
        forward = ev.homology_map(movie)
        backward = ev.homology_map(reverse(movie))
        dim = forward.source.total_dim
        check.expect(forward.rank == dim, "rank", {"rank": forward.rank, "dim": dim})
        composite = backward.matrix @ forward.matrix
        identity = F2Matrix.identity(dim)
        check.expect(composite == identity, "left_inverse", composite.tolist())
        check.expect(forward.q_shift == 0, "q_shift", forward.q_shift)
        target_dims = forward.target.dims
        short = {
            f"{h},{q}": [n, target_dims.get((h, q), 0)]
            for (h, q), n in forward.source.dims.items()
            if n > target_dims.get((h, q), 0)
        }
        check.expect(not short, "bigraded_injection", short)
        f = ev.movie_map(movie)
        check.expect(f.q_shift == 0, "chain_q_shift", f.q_shift)

    return _guard(check, run)


# =============================================================================
# Multiplicativity
# =============================================================================

def tensor_transfer(
    left: HomologyGroup, right: HomologyGroup, union: HomologyGroup
) -> F2Matrix:
    """H(D1) ⊗ H(D2) → H(D1 ⊔ D2) on representatives, lexicographic pairs"""
    pair = pair_generators(left.complex, right.complex, union.complex)
    columns = []
    for a in left.representatives:
        for b in right.representatives:
            coords = union.project(tensor_chain(a, b, pair))
            columns.append([r for r, v in enumerate(coords) if v])
    return F2Matrix.from_columns(columns, len(union))


def verify_multiplicativity(
    first: LinkDiagram,
    second: LinkDiagram,
    movies: Optional[Tuple[Movie, Movie]] = None,
    third: Optional[LinkDiagram] = None,
    evaluator: Optional[MovieEvaluator] = None,
    name: str = "multiplicativity",
) -> VerificationReport:
    ev = evaluator or MovieEvaluator()
    check = _Check(name)

    def run() -> None:
        union = disjoint_union(first, second)
        h1, h2, h12 = ev.homology(first), ev.homology(second), ev.homology(union)
        expected = dims_convolution(h1.dims, h2.dims)
        check.expect(
            h12.dims == expected,
            "kunneth",
            {"union": str(h12.dims), "convolution": str(expected)},
        )
        transfer = tensor_transfer(h1, h2, h12)
        check.expect(transfer.rank() == len(h12), "transfer_rank", transfer.rank())
        if movies is not None:
            s1, s2 = movies
            if s1.initial != first or s2.initial != second:
                raise KhovanovError("movies must start at the given diagrams")
            lifted = disjoint_movie(s1, s2)
            whole = ev.homology_map(lifted)
            m1, m2 = ev.homology_map(s1), ev.homology_map(s2)
            chains = ev.movie_map(s1).tensor(
                ev.movie_map(s2), ev.complex(lifted.initial), ev.complex(lifted.final)
            )
            via_chains = ev.induced(chains)
            check.expect(
                via_chains == whole.matrix, "chain_tensor", via_chains.tolist()
            )
            t_src = tensor_transfer(h1, h2, ev.homology(lifted.initial))
            t_tgt = tensor_transfer(m1.target, m2.target, ev.homology(lifted.final))
            lhs = whole.matrix @ t_src
            rhs = t_tgt @ m1.matrix.kron(m2.matrix)
            check.expect(
                lhs == rhs, "tensor", {"lhs": lhs.tolist(), "rhs": rhs.tolist()}
            )
        if third is not None:
            h3 = ev.homology(third)
            h23 = ev.homology(disjoint_union(second, third))
            h123 = ev.homology(disjoint_union(union, third))
            eye1, eye3 = F2Matrix.identity(len(h1)), F2Matrix.identity(len(h3))
            inner12 = tensor_transfer(h1, h2, h12)
            left = tensor_transfer(h12, h3, h123) @ inner12.kron(eye3)
            inner23 = tensor_transfer(h2, h3, h23)
            right = tensor_transfer(h1, h23, h123) @ eye1.kron(inner23)
            check.expect(
                left == right,
                "associativity",
                {"left": left.tolist(), "right": right.tolist()},
            )

    return _guard(check, run)


# =============================================================================
# Theory axioms
# =============================================================================

def verify_theory_axioms(
    alg: FrobeniusAlgebra = DEFAULT_ALGEBRA,
    diagrams: Optional[Dict[str, LinkDiagram]] = None,
    movies: Optional[Dict[str, Movie]] = None,
) -> VerificationReport:
    check = _Check("theory-axioms")
    ev = MovieEvaluator(alg)

    def run() -> None:
        axioms = check_frobenius(alg)
        check.expect(axioms.passed, "frobenius", axioms.failures)
        check.expect(
            axioms.khovanov_like,
            "khovanov_like",
            axioms.failures.get("khovanov_like"),
        )
        targets = diagrams or {
            "unknot": unlink(1),
            "hopf": parse_pd(HOPF_PD),
            "trefoil": parse_pd(TREFOIL_PD),
        }
        for name, diagram in targets.items():
            born = Birth().apply(diagram).created[0]
            sphere = Movie.build(diagram, [Birth(), Death(born)])
            induced = ev.homology_map(sphere)
            check.expect(induced.is_zero(), f"sphere/{name}", induced.matrix.tolist())
        unknot_q = {q for _, q in ev.homology(unlink(1)).dims}
        check.expect(len(unknot_q) >= 2, "unknot_gradings", sorted(unknot_q))
        for name, movie in (movies or {}).items():
            f = ev.movie_map(movie)
            check.expect(
                f.q_shift == movie.euler_characteristic, f"degree/{name}", f.q_shift
            )

    return _guard(check, run)


def _commuting_pairs() -> List[Tuple[str, LinkDiagram, Event, Event]]:
    diagram = disjoint_union(parse_pd(TREFOIL_PD), unlink(1))
    [loop] = diagram.loops
    top = diagram.max_label
    kink = R1Plus(1, "R", 1, new=(top + 1, top + 2))
    return [
        ("death/kink", diagram, Death(loop), kink),
        ("birth/kink", diagram, Birth(top + 3), kink),
        ("birth/death", diagram, Birth(top + 1), Death(loop)),
    ]


def verify_disjoint_commutation(
    instances: Optional[Sequence[Tuple[str, LinkDiagram, Event, Event]]] = None,
    evaluator: Optional[MovieEvaluator] = None,
) -> VerificationReport:
    """Two events with disjoint supports induce the same map in either order"""
    ev = evaluator or MovieEvaluator()
    check = _Check("disjoint-commutation")

    def run() -> None:
        for key, diagram, first, second in instances or _commuting_pairs():
            one = Movie.build(diagram, [first, second])
            other = Movie.build(diagram, [second, first])
            if one.final != other.final:
                raise KhovanovError(f"{key}: the two orders end on different frames")
            a, b = ev.homology_map(one), ev.homology_map(other)
            check.expect(
                a.matrix == b.matrix,
                key,
                {"first": a.matrix.tolist(), "second": b.matrix.tolist()},
            )
            check.expect(
                a.q_shift == b.q_shift, f"{key}/q_shift", [a.q_shift, b.q_shift]
            )

    return _guard(check, run)


# =============================================================================
# Oracle equivalence, degree law, alternative decomposition
# =============================================================================

def verify_oracle(
    diagrams: Dict[str, LinkDiagram], name: str = "oracle-equivalence"
) -> VerificationReport:
    """Reduced homology equals the dense brute-force computation.

    Its graded Euler characteristic also has to match the state sum.
    """
    check = _Check(name)

    def run() -> None:
        for key, diagram in diagrams.items():
            cx = build_complex(diagram, check=True)
            fast = homology(cx, use_reduce=True).dims
            slow = homology(cx, oracle=True).dims
            check.expect(fast == slow, key, {"reduced": str(fast), "oracle": str(slow)})
            euler = homology(cx).graded_euler()
            check.expect(euler == kauffman_euler(diagram), f"{key}/euler", str(euler))

    return _guard(check, run)


def verify_degree_law(
    seed: int = DEFAULT_SEED,
    count: int = DEFAULT_RANDOM_MOVIES,
    movies: Optional[Dict[str, Movie]] = None,
) -> VerificationReport:
    """q-shift of every movie map equals the movie's Euler characteristic"""
    check = _Check("degree-law", seed)
    ev = MovieEvaluator()

    def run() -> None:
        rng = random.Random(seed)
        candidates = dict(movies or {})
        for k in range(count):
            candidates[f"random/{k}"] = random_movie(rng, max_crossings=4, max_events=6)
        for key, movie in candidates.items():
            for frame in (movie.initial, movie.final):
                ev.complex(frame).check_d_squared()
            f = ev.movie_map(movie)
            check.expect(
                f.q_shift == movie.euler_characteristic,
                key,
                [e.render() for e in movie.events],
            )

    return _guard(check, run)


def verify_alt_decomposition(
    instances: Optional[Sequence[Tuple[str, LinkDiagram, int, int]]] = None,
) -> VerificationReport:
    """Saddle then dual saddle equals split, route, merge on homology"""
    check = _Check("alt-decomposition")
    ev = MovieEvaluator()

    def run() -> None:
        default = [("U2", unlink(2), 1, 2), ("unknot", unlink(1), 1, 1)]
        for key, diagram, first, second in instances or default:
            direct = ev.homology_map(saddle_pair_movie(diagram, first, second))
            routed = ev.homology_map(alt_decomposition_movie(diagram, first, second))
            check.expect(
                direct.matrix == routed.matrix,
                key,
                {
                    "saddle_pair": direct.matrix.tolist(),
                    "alternative": routed.matrix.tolist(),
                },
            )
            check.expect(
                direct.q_shift == routed.q_shift,
                f"{key}/q_shift",
                [direct.q_shift, routed.q_shift],
            )

    return _guard(check, run)


# =============================================================================
# Suites
# =============================================================================

def _ribbon_suite(seed: int, corpus_dir: Optional[str]) -> List[VerificationReport]:
    ev = MovieEvaluator()
    rng = random.Random(seed)
    specs = [
        load_ribbon(_corpus_path(name, ".ribbon", corpus_dir)) for name in RIBBON_FILES
    ]
    out = [verify_ribbon(spec, ev) for spec in specs]
    for k in range(3):
        spec = random_ribbon_spec(rng, bands=1 + k % 2, name=f"random-{k}")
        report = verify_ribbon(spec, ev)
        report.seed = seed
        out.append(report)
    return out


def _multiplicativity_suite(corpus_dir: Optional[str]) -> List[VerificationReport]:
    diagrams = bundled_diagrams(corpus_dir)
    unknot, trefoil, hopf = diagrams["unknot"], diagrams["trefoil"], diagrams["hopf"]
    birth_right = Movie.build(unknot, [Birth()])
    ev = MovieEvaluator()
    return [
        verify_multiplicativity(
            unknot, unknot, evaluator=ev, name="multiplicativity/unknot+unknot"
        ),
        verify_multiplicativity(
            trefoil,
            unknot,
            movies=(Movie.identity(trefoil), birth_right),
            evaluator=ev,
            name="multiplicativity/trefoil+birth",
        ),
        verify_multiplicativity(
            hopf,
            unknot,
            third=trefoil,
            evaluator=ev,
            name="multiplicativity/associativity",
        ),
    ]


SUITES = (
    "neck-passing",
    "ribbon",
    "multiplicativity",
    "axioms",
    "oracle",
    "degree-law",
    "alt-decomposition",
)


def run_suite(
    suite: str = "all",
    seed: int = DEFAULT_SEED,
    random_movies: int = DEFAULT_RANDOM_MOVIES,
    corpus_dir: Optional[str] = None,
) -> List[VerificationReport]:
    """Run one named suite, or every suite for ``all``; reports sorted by name"""
    if suite != "all" and suite not in SUITES:
        expected = ", ".join(SUITES)
        raise ValueError(
            f"unknown suite {suite!r}; expected 'all' or one of {expected}"
        )
    wanted = SUITES if suite == "all" else (suite,)
    reports: List[VerificationReport] = []
    for name in wanted:
        logger.info("running suite %s", name)
        if name == "neck-passing":
            reports += [
                verify_neck_passing(level) for level in ("weak", "full", "strong")
            ]
        elif name == "ribbon":
            reports += _ribbon_suite(seed, corpus_dir)
        elif name == "multiplicativity":
            reports += _multiplicativity_suite(corpus_dir)
        elif name == "axioms":
            reports.append(verify_theory_axioms(movies=bundled_movies(corpus_dir)))
            reports.append(verify_disjoint_commutation())
        elif name == "oracle":
            diagrams = bundled_diagrams(corpus_dir)
            rng = random.Random(seed)
            for k in range(5):
                diagrams[f"random/{k}"] = random_diagram(rng, max_crossings=5)
            report = verify_oracle(diagrams)
            report.seed = seed
            reports.append(report)
        elif name == "degree-law":
            movies = bundled_movies(corpus_dir)
            reports.append(verify_degree_law(seed, random_movies, movies))
        elif name == "alt-decomposition":
            reports.append(verify_alt_decomposition())
    return sorted(reports, key=lambda r: r.name)
