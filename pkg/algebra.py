"""
GF(2) linear algebra and rank-2 Frobenius algebras.

Matrices store one Python int per row (bit c is column c), so row operations
are single XORs. The brute-force oracle works on dense numpy arrays with
its own elimination, so it shares no code with the cancellation path.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import AlgebraError, MatrixIndexError

logger = logging.getLogger(__name__)

BitVector = Tuple[int, ...]


# =============================================================================
# Bit matrices
# =============================================================================

class F2Matrix:
    """Immutable matrix over the two-element field"""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Optional[Sequence[int]] = None):
        if rows < 0 or cols < 0:
            raise AlgebraError(f"negative shape {rows}x{cols}")
        packed = tuple(data) if data is not None else (0,) * rows
        if len(packed) != rows:
            raise AlgebraError(f"expected {rows} rows, got {len(packed)}")
        limit = 1 << cols
        for r in packed:
            if r < 0 or r >= limit:
                raise AlgebraError(f"row bits exceed {cols} columns")
        self.rows = rows
        self.cols = cols
        self._data = packed

    # -- constructors --------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "F2Matrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None
    ) -> "F2Matrix":
        """Build from a list of 0/1 rows"""
        width = cols if cols is not None else (len(rows[0]) if rows else 0)
        data = []
        for row in rows:
            if len(row) != width:
                raise AlgebraError("ragged rows")
            bits = 0
            for c, v in enumerate(row):
                if v % 2:
                    bits |= 1 << c
            data.append(bits)
        return cls(len(rows), width, data)

    @classmethod
    def from_columns(cls, columns: Sequence[Iterable[int]], rows: int) -> "F2Matrix":
        """Build from columns given as iterables of nonzero row indices"""
        data = [0] * rows
        for c, support in enumerate(columns):
            for r in support:
                if not 0 <= r < rows:
                    raise MatrixIndexError(f"row {r} outside [0,{rows})")
                data[r] ^= 1 << c
        return cls(rows, len(columns), data)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "F2Matrix":
        arr = np.asarray(array, dtype=np.int64) % 2
        if arr.ndim != 2:
            raise AlgebraError("expected a 2-d array")
        return cls.from_rows(arr.tolist(), cols=arr.shape[1])

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for r, bits in enumerate(self._data):
            c = 0
            while bits:
                if bits & 1:
                    out[r, c] = 1
                bits >>= 1
                c += 1
        return out

    # -- access --------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def row_bits(self, r: int) -> int:
        if not 0 <= r < self.rows:
            raise MatrixIndexError(f"row {r} outside [0,{self.rows})")
        return self._data[r]

    def __getitem__(self, key: Tuple[int, int]) -> int:
        r, c = key
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise MatrixIndexError(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
        return (self._data[r] >> c) & 1

    def column(self, c: int) -> BitVector:
        if not 0 <= c < self.cols:
            raise MatrixIndexError(f"column {c} outside [0,{self.cols})")
        return tuple((bits >> c) & 1 for bits in self._data)

    def column_support(self, c: int) -> List[int]:
        return [r for r, v in enumerate(self.column(c)) if v]

    def tolist(self) -> List[List[int]]:
        return [[(bits >> c) & 1 for c in range(self.cols)] for bits in self._data]

    def is_zero(self) -> bool:
        return not any(self._data)

    def nnz(self) -> int:
        return sum(bin(b).count("1") for b in self._data)

    # -- arithmetic ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, F2Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __add__(self, other: "F2Matrix") -> "F2Matrix":
        if self.shape != other.shape:
            raise AlgebraError(f"cannot add {self.shape} and {other.shape}")
        data = [a ^ b for a, b in zip(self._data, other._data)]
        return F2Matrix(self.rows, self.cols, data)

    def __matmul__(self, other: "F2Matrix") -> "F2Matrix":
        if self.cols != other.rows:
            raise AlgebraError(f"inner dimensions differ: {self.shape} @ {other.shape}")
        out = []
        for bits in self._data:
            acc = 0
            k = 0
            while bits:
                if bits & 1:
                    acc ^= other._data[k]
                bits >>= 1
                k += 1
            out.append(acc)
        return F2Matrix(self.rows, other.cols, out)

    def apply(self, vector: Sequence[int]) -> BitVector:
        """Multiply by a column vector"""
        if len(vector) != self.cols:
            raise AlgebraError(f"vector length {len(vector)} != {self.cols}")
        v = bits_from_vector(vector)
        return tuple(bin(bits & v).count("1") & 1 for bits in self._data)

    def transpose(self) -> "F2Matrix":
        data = [0] * self.cols
        for r, bits in enumerate(self._data):
            c = 0
            while bits:
                if bits & 1:
                    data[c] |= 1 << r
                bits >>= 1
                c += 1
        return F2Matrix(self.cols, self.rows, data)

    def kron(self, other: "F2Matrix") -> "F2Matrix":
        """Kronecker product with lexicographic (self index, other index) ordering"""
        data = []
        for a in self._data:
            for b in other._data:
                row = 0
                for i in range(self.cols):
                    if (a >> i) & 1:
                        row |= b << (i * other.cols)
                data.append(row)
        return F2Matrix(self.rows * other.rows, self.cols * other.cols, data)

    def rank(self) -> int:
        return gf2_decompose(self).rank

    def __repr__(self) -> str:
        body = "; ".join("".join(str(v) for v in row) for row in self.tolist())
        return f"F2Matrix({self.rows}x{self.cols}: {body})"


def bits_from_vector(vector: Sequence[int]) -> int:
    bits = 0
    for i, v in enumerate(vector):
        if v % 2:
            bits |= 1 << i
    return bits


def vector_from_bits(bits: int, length: int) -> BitVector:
    return tuple((bits >> i) & 1 for i in range(length))


@dataclass(frozen=True)
class Decomposition:
    rank: int
    kernel_basis: List[BitVector]
    image_basis: List[BitVector]
    row_echelon: F2Matrix
    pivots: Tuple[int, ...] = ()


def gf2_decompose(matrix: F2Matrix) -> Decomposition:
    """Reduced row echelon form with rank, kernel and image bases.

    Pivots are taken leftmost column first, lowest available row first, so
    every basis returned is reproducible.
    """
    work = [matrix.row_bits(r) for r in range(matrix.rows)]
    pivots: List[int] = []
    row_idx = 0
    for col in range(matrix.cols):
        pivot = None
        for r in range(row_idx, len(work)):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[row_idx], work[pivot] = work[pivot], work[row_idx]
        for r in range(len(work)):
            if r != row_idx and (work[r] >> col) & 1:
                work[r] ^= work[row_idx]
        pivots.append(col)
        row_idx += 1
        if row_idx == len(work):
            break

    rank = len(pivots)
    pivot_set = set(pivots)
    kernel: List[BitVector] = []
    for free in range(matrix.cols):
        if free in pivot_set:
            continue
        bits = 1 << free
        for i, pc in enumerate(pivots):
            if (work[i] >> free) & 1:
                bits |= 1 << pc
        kernel.append(vector_from_bits(bits, matrix.cols))
    image = [matrix.column(pc) for pc in pivots]
    echelon = F2Matrix(matrix.rows, matrix.cols, work)
    return Decomposition(rank, kernel, image, echelon, tuple(pivots))


# =============================================================================
# Frobenius algebras
# =============================================================================

BASIS = ("1", "X")
Element = FrozenSet[str]
TensorElement = FrozenSet[Tuple[str, ...]]


def _elem(*labels: str) -> Element:
    out: set = set()
    for lab in labels:
        out ^= {lab}
    return frozenset(out)


def _tensor(*terms: Tuple[str, ...]) -> TensorElement:
    out: set = set()
    for t in terms:
        out ^= {t}
    return frozenset(out)


@dataclass(frozen=True)
class FrobeniusAlgebra:
    """Rank-2 commutative Frobenius algebra over GF(2) on the basis {1, X}.

    Elements are frozensets of basis labels (a sum over GF(2)); tensors are
    frozensets of label tuples.
    """

    name: str
    unit: Element
    counit: Dict[str, int]
    mult: Dict[Tuple[str, str], Element]
    comult: Dict[str, TensorElement]
    degrees: Dict[str, int] = field(default_factory=lambda: {"1": 1, "X": -1})

    def __hash__(self) -> int:
        return hash(self.name)

    def m(self, a: str, b: str) -> Element:
        try:
            return self.mult[(a, b)]
        except KeyError as e:
            raise AlgebraError(
                f"{self.name}: multiplication undefined on {a}⊗{b}"
            ) from e

    def delta(self, a: str) -> TensorElement:
        try:
            return self.comult[a]
        except KeyError as e:
            raise AlgebraError(f"{self.name}: comultiplication undefined on {a}") from e

    def eps(self, a: str) -> int:
        try:
            return self.counit[a] % 2
        except KeyError as e:
            raise AlgebraError(f"{self.name}: counit undefined on {a}") from e

    def validate_tables(self) -> None:
        missing = [
            f"m({a},{b})" for a in BASIS for b in BASIS if (a, b) not in self.mult
        ]
        missing += [f"Δ({a})" for a in BASIS if a not in self.comult]
        missing += [f"ε({a})" for a in BASIS if a not in self.counit]
        if missing:
            raise AlgebraError(f"{self.name}: incomplete tables: {', '.join(missing)}")


def khovanov_algebra() -> FrobeniusAlgebra:
    return FrobeniusAlgebra(
        name="khovanov",
        unit=_elem("1"),
        counit={"1": 0, "X": 1},
        mult={
            ("1", "1"): _elem("1"),
            ("1", "X"): _elem("X"),
            ("X", "1"): _elem("X"),
            ("X", "X"): _elem(),
        },
        comult={
            "1": _tensor(("1", "X"), ("X", "1")),
            "X": _tensor(("X", "X")),
        },
    )


def bar_natan_algebra() -> FrobeniusAlgebra:
    """Characteristic-2 Bar-Natan deformation (X² = X)"""
    return FrobeniusAlgebra(
        name="bar-natan",
        unit=_elem("1"),
        counit={"1": 0, "X": 1},
        mult={
            ("1", "1"): _elem("1"),
            ("1", "X"): _elem("X"),
            ("X", "1"): _elem("X"),
            ("X", "X"): _elem("X"),
        },
        comult={
            "1": _tensor(("1", "X"), ("X", "1"), ("1", "1")),
            "X": _tensor(("X", "X")),
        },
    )


DEFAULT_ALGEBRA = khovanov_algebra()


# -- linear extensions used by the axiom checker ------------------------------

def _mult_linear(alg: FrobeniusAlgebra, left: Element, right: Element) -> Element:
    out: set = set()
    for a in left:
        for b in right:
            out ^= alg.m(a, b)
    return frozenset(out)


def _apply_on_factor(
    alg: FrobeniusAlgebra, tensor: TensorElement, position: int, op: str
) -> TensorElement:
    """Apply m (to positions position, position+1), Δ, ε or id on a tensor factor"""
    out: set = set()
    for term in tensor:
        head, rest = term[:position], term[position:]
        if op == "m":
            images = {(x,) for x in alg.m(rest[0], rest[1])}
            tail = rest[2:]
        elif op == "delta":
            images = set(alg.delta(rest[0]))
            tail = rest[1:]
        elif op == "eps":
            images = {()} if alg.eps(rest[0]) else set()
            tail = rest[1:]
        else:
            raise AlgebraError(f"unknown op {op}")
        for img in images:
            out ^= {head + img + tail}
    return frozenset(out)


@dataclass(frozen=True)
class AxiomReport:
    algebra: str
    results: Dict[str, bool]
    failures: Dict[str, List[str]]

    @property
    def passed(self) -> bool:
        return all(v for k, v in self.results.items() if k != "khovanov_like")

    @property
    def khovanov_like(self) -> bool:
        return self.results["khovanov_like"]


def check_frobenius(alg: FrobeniusAlgebra) -> AxiomReport:
    """Check every Frobenius axiom by enumerating basis instances"""
    alg.validate_tables()
    failures: Dict[str, List[str]] = {}

    def record(axiom: str, ok: bool, instance: str) -> None:
        failures.setdefault(axiom, [])
        if not ok:
            failures[axiom].append(instance)

    for a in BASIS:
        single = frozenset({(a,)})
        record("unit", _mult_linear(alg, alg.unit, _elem(a)) == _elem(a), f"u·{a}")
        record("unit", _mult_linear(alg, _elem(a), alg.unit) == _elem(a), f"{a}·u")
        dd = alg.delta(a)
        left_eps = _apply_on_factor(alg, dd, 0, "eps")
        right_eps = _apply_on_factor(alg, dd, 1, "eps")
        record("counit", left_eps == single, f"(ε⊗id)Δ({a})")
        record("counit", right_eps == single, f"(id⊗ε)Δ({a})")
        record(
            "coassociativity",
            _apply_on_factor(alg, dd, 0, "delta")
            == _apply_on_factor(alg, dd, 1, "delta"),
            f"Δ({a})",
        )
        record(
            "cocommutativity",
            dd == frozenset((t[1], t[0]) for t in dd),
            f"Δ({a})",
        )
    for a, b in itertools.product(BASIS, repeat=2):
        record("commutativity", alg.m(a, b) == alg.m(b, a), f"{a}·{b}")
        pair = frozenset({(a, b)})
        delta_m: set = set()
        for x in alg.m(a, b):
            delta_m ^= alg.delta(x)
        left = _apply_on_factor(alg, _apply_on_factor(alg, pair, 1, "delta"), 0, "m")
        right = _apply_on_factor(alg, _apply_on_factor(alg, pair, 0, "delta"), 1, "m")
        both = frozenset(delta_m)
        record("frobenius", both == left, f"Δm({a},{b}) vs (m⊗id)(id⊗Δ)")
        record("frobenius", both == right, f"Δm({a},{b}) vs (id⊗m)(Δ⊗id)")
    for a, b, c in itertools.product(BASIS, repeat=3):
        record(
            "associativity",
            _mult_linear(alg, alg.m(a, b), _elem(c))
            == _mult_linear(alg, _elem(a), alg.m(b, c)),
            f"({a}{b}){c}",
        )

    results = {axiom: not bad for axiom, bad in failures.items()}
    # ker ε is one-dimensional and contains the unit
    eps_unit = sum(alg.eps(x) for x in alg.unit) % 2
    eps_nonzero = any(alg.eps(x) for x in BASIS)
    results["khovanov_like"] = eps_unit == 0 and eps_nonzero and bool(alg.unit)
    if not results["khovanov_like"]:
        failures["khovanov_like"] = [
            "ε(u) != 0" if eps_unit else "ε vanishes identically"
        ]
    logger.debug("axiom check for %s: %s", alg.name, results)
    return AxiomReport(alg.name, results, {k: v for k, v in failures.items() if v})


# =============================================================================
# Dense elimination for the oracle
# =============================================================================

def dense_rref(array: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form of a 0/1 array over GF(2), with its pivot columns"""
    work = (np.asarray(array, dtype=np.int64) % 2).astype(np.uint8)
    if work.ndim != 2:
        raise AlgebraError("expected a 2-d array")
    rows, cols = work.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.flatnonzero(work[r:, c])
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            work[[r, p], :] = work[[p, r], :]
        ones = np.flatnonzero(work[:, c])
        ones = ones[ones != r]
        if ones.size:
            work[ones, :] ^= work[r, :]
        pivots.append(c)
        r += 1
    return work, pivots


def dense_kernel(array: np.ndarray) -> np.ndarray:
    """Kernel basis as the columns of a (cols × nullity) array"""
    reduced, pivots = dense_rref(array)
    cols = reduced.shape[1]
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = np.zeros((cols, len(free)), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for r, p in enumerate(pivots):
            basis[p, k] = reduced[r, f]
    return basis


def dense_solve(array: np.ndarray, target: np.ndarray) -> Optional[np.ndarray]:
    """One solution x of array·x = target over GF(2), or None"""
    a = np.asarray(array, dtype=np.int64) % 2
    b = np.asarray(target, dtype=np.int64).reshape(-1, 1) % 2
    if b.shape[0] != a.shape[0]:
        raise AlgebraError(f"target length {b.shape[0]} != {a.shape[0]} rows")
    cols = a.shape[1]
    reduced, pivots = dense_rref(np.concatenate([a, b], axis=1))
    if pivots and pivots[-1] == cols:
        return None
    solution = np.zeros(cols, dtype=np.uint8)
    for r, p in enumerate(pivots):
        solution[p] = reduced[r, cols]
    return solution
