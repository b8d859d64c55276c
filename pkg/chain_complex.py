"""
Cube-of-resolutions chain complexes over GF(2), Gaussian cancellation and homology.

Generators are enhanced states: a cube vertex plus a label (0 for 1, 1 for X)
on every circle of that resolution. Differentials are stored sparsely as
sets of target indices. One elimination engine serves ``homology``,
``reduce`` and the Reidemeister maps of the cobordism layer.
"""
from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from math import comb
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np

from algebra import (
    DEFAULT_ALGEBRA,
    F2Matrix,
    FrobeniusAlgebra,
    dense_kernel,
    dense_rref,
    dense_solve,
)
from diagram import CircleArrangement, LinkDiagram
from errors import ChainMapError, KhovanovError

logger = logging.getLogger(__name__)

LABEL_INDEX = {"1": 0, "X": 1}
LABEL_NAME = ("1", "X")


@dataclass(frozen=True)
class KhGenerator:
    vertex: Tuple[int, ...]
    labels: Tuple[int, ...]
    h: int
    q: int

    def describe(self, circles: Sequence[Tuple[int, ...]]) -> str:
        bits = "".join(str(b) for b in self.vertex) or "∅"
        parts = [
            f"{LABEL_NAME[lab]}@{circle[0]}"
            for lab, circle in zip(self.labels, circles)
        ]
        return f"[{bits}|{' '.join(parts)}]"


def xor_into(acc: Set[int], items: Iterable[int]) -> None:
    for item in items:
        if item in acc:
            acc.remove(item)
        else:
            acc.add(item)


# =============================================================================
# Chain complexes
# =============================================================================

@dataclass
class ChainComplex:
    """Bigraded complex with a sparse differential.

    ``differential[i]`` is the set of generator indices in d(generator i).
    Complexes produced by ``reduce`` keep the diagram's generators that
    survived, so ``generators`` is always a list of enhanced states.
    """

    diagram: LinkDiagram
    algebra: FrobeniusAlgebra
    generators: List[KhGenerator]
    differential: List[FrozenSet[int]]
    graded: bool = True
    arrangements: Dict[Tuple[int, ...], CircleArrangement] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.index = {g: i for i, g in enumerate(self.generators)}
        self.by_state = {(g.vertex, g.labels): i for i, g in enumerate(self.generators)}

    def __len__(self) -> int:
        return len(self.generators)

    @property
    def n_plus(self) -> int:
        return self.diagram.n_plus

    @property
    def n_minus(self) -> int:
        return self.diagram.n_minus

    def degrees(self) -> List[int]:
        return sorted({g.h for g in self.generators})

    def indices_at(self, h: int, q: Optional[int] = None) -> List[int]:
        return [
            i
            for i, g in enumerate(self.generators)
            if g.h == h and (q is None or g.q == q)
        ]

    def apply(self, chain: Iterable[int]) -> Set[int]:
        out: Set[int] = set()
        for i in chain:
            xor_into(out, self.differential[i])
        return out

    def matrix(self, h: int) -> F2Matrix:
        """d_h as a matrix whose columns are the degree-h generators"""
        return self.block_matrix(h, None)

    def block_matrix(self, h: int, q: Optional[int]) -> F2Matrix:
        sources = self.indices_at(h, q)
        targets = self.indices_at(h + 1, q)
        row_of = {t: r for r, t in enumerate(targets)}
        columns = []
        for s in sources:
            try:
                columns.append([row_of[t] for t in self.differential[s]])
            except KeyError as e:
                raise ChainMapError(
                    f"differential leaves the ({h + 1}, {q}) block"
                ) from e
        return F2Matrix.from_columns(columns, len(targets))

    def check_d_squared(self) -> None:
        for i in range(len(self.generators)):
            if self.apply(self.differential[i]):
                raise ChainMapError(f"d∘d != 0 on generator {i} {self.generators[i]}")

    def check_grading(self) -> None:
        for i, targets in enumerate(self.differential):
            src = self.generators[i]
            for t in targets:
                tgt = self.generators[t]
                if tgt.h != src.h + 1 or (self.graded and tgt.q != src.q):
                    raise ChainMapError(
                        f"differential entry {src} -> {tgt} breaks the grading"
                    )

    def arrangement(self, vertex: Tuple[int, ...]) -> CircleArrangement:
        found = self.arrangements.get(vertex)
        if found is None:
            found = self.arrangements[vertex] = self.diagram.resolve(vertex)
        return found

    def circles_of(self, gen: KhGenerator) -> Tuple[Tuple[int, ...], ...]:
        return self.arrangement(gen.vertex).circles


def quantum_degree(
    labels: Sequence[int], weight: int, n_plus: int, n_minus: int
) -> int:
    ones = labels.count(0)
    return (ones - (len(labels) - ones)) + weight + n_plus - 2 * n_minus


def _algebra_is_graded(alg: FrobeniusAlgebra) -> bool:
    deg = alg.degrees
    for (a, b), value in alg.mult.items():
        if any(deg[x] != deg[a] + deg[b] - 1 for x in value):
            return False
    for a, value in alg.comult.items():
        if any(deg[x] + deg[y] != deg[a] - 1 for x, y in value):
            return False
    return True


def _edge_images(
    alg: FrobeniusAlgebra,
    diagram: LinkDiagram,
    crossing: int,
    source: CircleArrangement,
    target: CircleArrangement,
) -> Callable[[Tuple[int, ...]], List[Tuple[int, ...]]]:
    """Labelling map along one cube edge: m on a merge, Δ on a split"""
    tup = diagram.crossings[crossing]
    a_idx = source.circle_of[tup[0]]
    b_idx = source.circle_of[tup[1]]
    carry = {
        i: target.circle_of[circle[0]]
        for i, circle in enumerate(source.circles)
        if i not in (a_idx, b_idx)
    }
    size = len(target.circles)

    if a_idx != b_idx:
        merged = target.circle_of[tup[0]]

        def merge(labels: Tuple[int, ...]) -> List[Tuple[int, ...]]:
            base = [0] * size
            for i, j in carry.items():
                base[j] = labels[i]
            out = []
            for value in alg.m(LABEL_NAME[labels[a_idx]], LABEL_NAME[labels[b_idx]]):
                img = list(base)
                img[merged] = LABEL_INDEX[value]
                out.append(tuple(img))
            return out

        return merge

    first = target.circle_of[tup[0]]
    second = target.circle_of[tup[2]]
    if first == second:
        raise ChainMapError(
            f"crossing {crossing}: expected a split between resolutions"
        )

    def split(labels: Tuple[int, ...]) -> List[Tuple[int, ...]]:
        base = [0] * size
        for i, j in carry.items():
            base[j] = labels[i]
        out = []
        for x, y in alg.delta(LABEL_NAME[labels[a_idx]]):
            img = list(base)
            img[first] = LABEL_INDEX[x]
            img[second] = LABEL_INDEX[y]
            out.append(tuple(img))
        return out

    return split


def build_complex(
    diagram: LinkDiagram, alg: FrobeniusAlgebra = DEFAULT_ALGEBRA, check: bool = True
) -> ChainComplex:
    """Khovanov complex of the cube of resolutions"""
    alg.validate_tables()
    n = len(diagram.crossings)
    n_plus, n_minus = diagram.signs()
    vertices = sorted(itertools.product((0, 1), repeat=n), key=lambda v: (sum(v), v))
    arrangements = {v: diagram.resolve(v) for v in vertices}

    generators: List[KhGenerator] = []
    for v in vertices:
        k = len(arrangements[v].circles)
        weight = sum(v)
        for labels in itertools.product((0, 1), repeat=k):
            generators.append(
                KhGenerator(
                    v,
                    labels,
                    weight - n_minus,
                    quantum_degree(labels, weight, n_plus, n_minus),
                )
            )
    index = {(g.vertex, g.labels): i for i, g in enumerate(generators)}

    differential: List[FrozenSet[int]] = []
    edge_maps: Dict[Tuple[Tuple[int, ...], int], Callable] = {}
    for g in generators:
        targets: Set[int] = set()
        for c in range(n):
            if g.vertex[c]:
                continue
            w = g.vertex[:c] + (1,) + g.vertex[c + 1:]
            key = (g.vertex, c)
            if key not in edge_maps:
                edge_maps[key] = _edge_images(
                    alg, diagram, c, arrangements[g.vertex], arrangements[w]
                )
            for img in edge_maps[key](g.labels):
                xor_into(targets, [index[(w, img)]])
        differential.append(frozenset(targets))

    graded = _algebra_is_graded(alg)
    cx = ChainComplex(diagram, alg, generators, differential, graded, arrangements)
    if check:
        cx.check_d_squared()
        cx.check_grading()
    logger.debug("built complex: %d crossings, %d generators", n, len(generators))
    return cx


# =============================================================================
# Gaussian cancellation
# =============================================================================

class Eliminator:
    """Sparse Gaussian elimination over GF(2) with inclusion/projection tracking.

    Cancelling a pair (a, c) with c in d(a) removes both generators and
    updates the remaining differential by the zig-zag rule. ``incl[x]`` is
    the image of surviving x in the original complex; ``proj_t[z]`` lists the
    original generators whose projection contains surviving z.
    """

    def __init__(
        self,
        differential: Sequence[Iterable[int]],
        alive: Optional[Iterable[int]] = None,
    ):
        keep = set(range(len(differential))) if alive is None else set(alive)
        self.d: Dict[int, Set[int]] = {i: set(differential[i]) & keep for i in keep}
        self.pred: Dict[int, Set[int]] = {i: set() for i in keep}
        for i, targets in self.d.items():
            for t in targets:
                self.pred[t].add(i)
        self.incl: Dict[int, Set[int]] = {i: {i} for i in keep}
        self.proj_t: Dict[int, Set[int]] = {i: {i} for i in keep}
        self.cancelled = 0

    @property
    def alive(self) -> List[int]:
        return sorted(self.d)

    def cancel(self, a: int, c: int) -> None:
        da = self.d[a]
        if c not in da:
            raise KhovanovError(f"cancellation pivot ({a}, {c}) has zero coefficient")
        alpha = da - {c}
        for x in list(self.pred[c]):
            if x == a:
                continue
            xor_into(self.incl[x], self.incl[a])
            dx = self.d[x]
            for t in da:
                if t in dx:
                    dx.remove(t)
                    self.pred[t].discard(x)
                else:
                    dx.add(t)
                    self.pred[t].add(x)
        for z in alpha:
            xor_into(self.proj_t[z], self.proj_t[c])
        for t in da:
            self.pred[t].discard(a)
        for y in self.pred.pop(a):
            self.d[y].discard(a)
        for t in self.d.pop(c):
            self.pred[t].discard(c)
        self.pred.pop(c)
        del self.d[a]
        del self.incl[a], self.incl[c]
        del self.proj_t[a], self.proj_t[c]
        self.cancelled += 1

    def eliminate(
        self,
        order: Optional[Iterable[int]] = None,
        allowed: Optional[Callable[[int, int], bool]] = None,
    ) -> "Eliminator":
        """Greedy cancellation in canonical order; ``allowed`` filters pivot pairs"""
        for a in list(order if order is not None else sorted(self.d)):
            while a in self.d and self.d[a]:
                targets = self.d[a]
                if allowed is None:
                    candidates = sorted(targets)
                else:
                    candidates = sorted(t for t in targets if allowed(a, t))
                if not candidates:
                    break
                self.cancel(a, candidates[0])
        return self

    def projection(self) -> Dict[int, Set[int]]:
        """Forward projection: original generator -> surviving generators"""
        forward: Dict[int, Set[int]] = defaultdict(set)
        for z, originals in self.proj_t.items():
            for y in originals:
                forward[y].add(z)
        return forward


def _deloop_pairs(cx: ChainComplex) -> List[Tuple[int, int]]:
    """Unit entries that deloop a merging circle.

    Where circles A and B merge along a cube edge, writing V_A as 1 ⊕ X
    makes 1_A ⊗ y -> y an isomorphism onto the target vertex.
    """
    pairs: List[Tuple[int, int]] = []
    for i, g in enumerate(cx.generators):
        source = cx.arrangement(g.vertex)
        for c, bit in enumerate(g.vertex):
            if bit:
                continue
            tup = cx.diagram.crossings[c]
            a, b = source.circle_of[tup[0]], source.circle_of[tup[1]]
            if a == b or g.labels[a] != LABEL_INDEX["1"]:
                continue
            w = g.vertex[:c] + (1,) + g.vertex[c + 1 :]
            target = cx.arrangement(w)
            labels = [0] * len(target)
            for k, circle in enumerate(source.circles):
                labels[target.circle_of[circle[0]]] = g.labels[k]
            labels[target.circle_of[tup[0]]] = g.labels[b]
            j = cx.by_state.get((w, tuple(labels)))
            if j is not None:
                pairs.append((i, j))
    return pairs


def reduce(cx: ChainComplex) -> "ReducedComplex":
    """Deloop merging circles, then cancel cube-edge pairs greedily.

    Every step cancels a unit entry of the current differential, so the
    result is homotopy equivalent to ``cx``.
    """
    gens = cx.generators

    def cube_edge(a: int, c: int) -> bool:
        va, vc = gens[a].vertex, gens[c].vertex
        return sum(x != y for x, y in zip(va, vc)) == 1

    engine = Eliminator(cx.differential)
    for a, c in _deloop_pairs(cx):
        if a in engine.d and c in engine.d[a]:
            engine.cancel(a, c)
    delooped = engine.cancelled
    engine.eliminate(allowed=cube_edge)
    survivors = engine.alive
    position = {old: new for new, old in enumerate(survivors)}
    differential = [frozenset(position[t] for t in engine.d[old]) for old in survivors]
    reduced = ChainComplex(
        cx.diagram,
        cx.algebra,
        [gens[i] for i in survivors],
        differential,
        cx.graded,
        cx.arrangements,
    )
    inclusion = [frozenset(engine.incl[old]) for old in survivors]
    forward = engine.projection()
    projection = {y: frozenset(position[z] for z in zs) for y, zs in forward.items()}
    logger.debug(
        "reduce: %d -> %d generators, %d pairs delooped",
        len(gens),
        len(survivors),
        delooped,
    )
    return ReducedComplex(reduced, cx, inclusion, projection)


@dataclass
class ReducedComplex:
    """A reduced complex with its inclusion into and projection from the original"""

    complex: ChainComplex
    original: ChainComplex
    inclusion: List[FrozenSet[int]]
    projection: Dict[int, FrozenSet[int]]

    def __len__(self) -> int:
        return len(self.complex)

    def project(self, chain: Iterable[int]) -> Set[int]:
        out: Set[int] = set()
        for y in chain:
            xor_into(out, self.projection.get(y, ()))
        return out

    def include(self, chain: Iterable[int]) -> Set[int]:
        out: Set[int] = set()
        for z in chain:
            xor_into(out, self.inclusion[z])
        return out


# =============================================================================
# Homology
# =============================================================================

@dataclass
class HomologyGroup:
    """Homology with a chosen basis of cycle representatives.

    ``basis[i]`` is the (h, q) of the i-th basis vector, ``representatives[i]``
    a cycle of the underlying complex. ``project`` writes a cycle in the basis.
    """

    complex: ChainComplex
    basis: List[Tuple[int, int]]
    representatives: List[FrozenSet[int]]
    _projector: Callable[[Iterable[int]], Tuple[int, ...]] = field(repr=False)
    method: str = "cancellation"

    @property
    def dims(self) -> Dict[Tuple[int, int], int]:
        out: Dict[Tuple[int, int], int] = defaultdict(int)
        for key in self.basis:
            out[key] += 1
        return dict(sorted(out.items()))

    @property
    def total_dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)

    def project(self, cycle: Iterable[int]) -> Tuple[int, ...]:
        return self._projector(cycle)

    def graded_euler(self) -> Dict[int, int]:
        """Σ_h (-1)^h dim H^{h,q}, per q"""
        out: Dict[int, int] = defaultdict(int)
        for (h, q), n in self.dims.items():
            out[q] += (-1) ** (h % 2) * n
        return {q: v for q, v in sorted(out.items()) if v}

    def poincare_polynomial(self) -> str:
        terms = []
        for (h, q), n in self.dims.items():
            coeff = "" if n == 1 else str(n)
            terms.append(f"{coeff}t^{h}q^{q}")
        return " + ".join(terms) if terms else "0"

    def table(self) -> str:
        """Bigraded dimension table, h across, q down"""
        dims = self.dims
        if not dims:
            return "(zero homology)"
        hs = sorted({h for h, _ in dims})
        qs = sorted({q for _, q in dims}, reverse=True)
        width = max(4, max(len(str(h)) for h in hs) + 1)
        lines = ["q\\h ".rjust(6) + "".join(str(h).rjust(width) for h in hs)]
        for q in qs:
            row = str(q).rjust(5) + " "
            row += "".join(
                (str(dims[(h, q)]) if (h, q) in dims else ".").rjust(width) for h in hs
            )
            lines.append(row)
        return "\n".join(lines)


def _homology_by_cancellation(
    cx: ChainComplex, reduced: Optional[ReducedComplex]
) -> HomologyGroup:
    base = reduced.complex if reduced is not None else cx
    engine = Eliminator(base.differential).eliminate()
    survivors = sorted(
        engine.alive,
        key=lambda z: (base.generators[z].h, -base.generators[z].q, z),
    )
    position = {z: i for i, z in enumerate(survivors)}
    basis = [(base.generators[z].h, base.generators[z].q) for z in survivors]
    if reduced is not None:
        reps = [frozenset(reduced.include(engine.incl[z])) for z in survivors]
    else:
        reps = [frozenset(engine.incl[z]) for z in survivors]
    forward = engine.projection()

    def project(cycle: Iterable[int]) -> Tuple[int, ...]:
        coords = [0] * len(survivors)
        chain = reduced.project(cycle) if reduced is not None else cycle
        for y in chain:
            for z in forward.get(y, ()):
                coords[position[z]] ^= 1
        return tuple(coords)

    method = "cancellation" if reduced is None else "reduced"
    return HomologyGroup(cx, basis, reps, project, method)


def _homology_by_rank(cx: ChainComplex) -> HomologyGroup:
    """Brute-force oracle: dense numpy elimination on every (h, q) block.

    Representatives are the kernel vectors that are pivots of
    [image | kernel], so each one is independent of the boundaries and of
    the representatives before it.
    """
    keys = sorted(
        {(g.h, g.q if cx.graded else 0) for g in cx.generators},
        key=lambda k: (k[0], -k[1]),
    )
    basis: List[Tuple[int, int]] = []
    reps: List[FrozenSet[int]] = []
    solvers: List[Tuple[List[int], np.ndarray, int, int]] = []
    for h, q in keys:
        qq = q if cx.graded else None
        here = cx.indices_at(h, qq)
        cycles = dense_kernel(cx.block_matrix(h, qq).to_array())
        boundaries = cx.block_matrix(h - 1, qq).to_array()
        stacked = np.concatenate([boundaries, cycles], axis=1)
        _, pivots = dense_rref(stacked)
        width = boundaries.shape[1]
        chosen = [p for p in pivots if p >= width]
        start = len(basis)
        for p in chosen:
            basis.append((h, q))
            reps.append(frozenset(here[i] for i in np.flatnonzero(stacked[:, p])))
        if chosen:
            columns = np.concatenate([stacked[:, chosen], boundaries], axis=1)
            solvers.append((here, columns, len(chosen), start))

    def project(cycle: Iterable[int]) -> Tuple[int, ...]:
        coords = [0] * len(basis)
        cycle = set(cycle)
        for here, columns, count, start in solvers:
            local = np.array([1 if i in cycle else 0 for i in here], dtype=np.uint8)
            if not local.any():
                continue
            solution = dense_solve(columns, local)
            if solution is None:
                raise KhovanovError("projected chain is not a cycle")
            for k in range(count):
                coords[start + k] ^= int(solution[k])
        return tuple(coords)

    return HomologyGroup(cx, basis, reps, project, "oracle")


def homology(
    cx: ChainComplex, use_reduce: bool = True, oracle: bool = False
) -> HomologyGroup:
    """Khovanov homology with deterministic basis representatives"""
    if oracle:
        hg = _homology_by_rank(cx)
    else:
        hg = _homology_by_cancellation(cx, reduce(cx) if use_reduce else None)
    logger.debug("homology (%s): %s", hg.method, hg.dims)
    return hg


def dims_convolution(
    first: Dict[Tuple[int, int], int], second: Dict[Tuple[int, int], int]
) -> Dict[Tuple[int, int], int]:
    out: Dict[Tuple[int, int], int] = defaultdict(int)
    for (h1, q1), a in first.items():
        for (h2, q2), b in second.items():
            out[(h1 + h2, q1 + q2)] += a * b
    return dict(sorted(out.items()))


def kauffman_euler(diagram: LinkDiagram) -> Dict[int, int]:
    """Graded Euler characteristic from the state sum over all resolutions"""
    n_plus, n_minus = diagram.signs()
    out: Dict[int, int] = defaultdict(int)
    for v in itertools.product((0, 1), repeat=len(diagram.crossings)):
        k = len(diagram.resolve(v))
        r = sum(v)
        sign = (-1) ** ((r - n_minus) % 2)
        # (q + q^-1)^k
        for j in range(k + 1):
            out[k - 2 * j + r + n_plus - 2 * n_minus] += sign * comb(k, j)
    return {q: v for q, v in sorted(out.items()) if v}
