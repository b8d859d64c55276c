"""
Unit tests for GF(2) linear algebra and the Frobenius algebra tables.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the main module to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from algebra import (
    DEFAULT_ALGEBRA,
    F2Matrix,
    FrobeniusAlgebra,
    bar_natan_algebra,
    check_frobenius,
    dense_kernel,
    dense_rref,
    dense_solve,
    gf2_decompose,
    khovanov_algebra,
)
from errors import AlgebraError, MatrixIndexError


@st.composite
def matrices(draw, max_dim=6):
    rows = draw(st.integers(min_value=0, max_value=max_dim))
    cols = draw(st.integers(min_value=0, max_value=max_dim))
    entries = st.integers(min_value=0, max_value=(1 << cols) - 1)
    data = draw(st.lists(entries, min_size=rows, max_size=rows))
    return F2Matrix(rows, cols, data)


class TestF2Matrix:
    """Construction, access and arithmetic."""

    def test_identity_is_neutral(self):
        """I·A = A·I = A."""
        a = F2Matrix.from_rows([[1, 0, 1], [0, 1, 1]])
        assert F2Matrix.identity(2) @ a == a
        assert a @ F2Matrix.identity(3) == a

    def test_from_columns_matches_from_rows(self):
        """Column supports and row lists describe the same matrix."""
        by_rows = F2Matrix.from_rows([[1, 0], [1, 1], [0, 1]])
        by_cols = F2Matrix.from_columns([[0, 1], [1, 2]], 3)
        assert by_rows == by_cols
        assert by_cols.column_support(1) == [1, 2]

    def test_addition_is_xor(self):
        """A + A = 0 over GF(2)."""
        a = F2Matrix.from_rows([[1, 1], [0, 1]])
        assert (a + a).is_zero()

    def test_rank_of_repeated_rows(self):
        """Two equal rows have rank one."""
        assert F2Matrix.from_rows([[1, 1], [1, 1]]).rank() == 1
        assert F2Matrix.zeros(3, 4).rank() == 0

    def test_kron_ordering(self):
        """Kronecker product orders pairs lexicographically."""
        a = F2Matrix.from_rows([[0, 1], [1, 0]])
        eye = F2Matrix.identity(2)
        k = a.kron(eye)
        assert k.shape == (4, 4)
        assert k.tolist() == [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]

    def test_entry_out_of_range(self):
        """Reading outside the shape raises an IndexError subclass."""
        a = F2Matrix.identity(2)
        with pytest.raises(MatrixIndexError):
            a[2, 0]
        with pytest.raises(IndexError):
            a.column(5)

    def test_shape_mismatch(self):
        """Multiplying incompatible shapes raises AlgebraError."""
        with pytest.raises(AlgebraError, match="inner dimensions"):
            F2Matrix.identity(2) @ F2Matrix.identity(3)

    def test_numpy_round_trip(self):
        """Arrays are reduced mod 2 on the way in."""
        arr = np.array([[3, 2], [1, 0]])
        m = F2Matrix.from_array(arr)
        assert m.tolist() == [[1, 0], [1, 0]]
        assert (m.to_array() == np.array([[1, 0], [1, 0]], dtype=np.uint8)).all()


class TestElimination:
    """Rank, kernel and linear solves."""

    def test_kernel_vectors_are_in_the_kernel(self):
        """Every kernel basis vector is annihilated, and rank + nullity = cols."""
        m = F2Matrix.from_rows([[1, 1, 0, 1], [0, 1, 1, 1], [1, 0, 1, 0]])
        dec = gf2_decompose(m)
        assert dec.rank + len(dec.kernel_basis) == m.cols
        for vec in dec.kernel_basis:
            assert not any(m.apply(vec))

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_dense_rank_matches_bit_rank(self, m):
        """The numpy elimination and the bit-packed one agree on rank."""
        _, pivots = dense_rref(m.to_array())
        assert len(pivots) == m.rank()

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_dense_kernel_is_annihilated(self, m):
        """Dense kernel columns are independent and killed by the matrix."""
        kernel = dense_kernel(m.to_array())
        assert kernel.shape == (m.cols, m.cols - m.rank())
        assert not ((m.to_array().astype(int) @ kernel.astype(int)) % 2).any()
        if kernel.shape[1]:
            assert len(dense_rref(kernel)[1]) == kernel.shape[1]

    def test_dense_solve(self):
        """Dense solves reproduce the target or report inconsistency."""
        a = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
        x = dense_solve(a, np.array([1, 0]))
        assert x is not None
        assert ((a.astype(int) @ x.astype(int)) % 2).tolist() == [1, 0]
        assert dense_solve(np.array([[1, 0], [1, 0]]), np.array([1, 0])) is None

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_rank_is_transpose_invariant(self, m):
        """Row rank equals column rank."""
        assert m.rank() == m.transpose().rank()

    @settings(max_examples=40, deadline=None)
    @given(matrices(max_dim=4), matrices(max_dim=4))
    def test_kron_rank_multiplies(self, a, b):
        """rank(A ⊗ B) = rank(A)·rank(B)."""
        assert a.kron(b).rank() == a.rank() * b.rank()

    @settings(max_examples=40, deadline=None)
    @given(matrices(max_dim=5), st.data())
    def test_product_rank_bounded(self, a, data):
        """rank(AB) never exceeds either factor's rank."""
        cols = data.draw(st.integers(min_value=0, max_value=5))
        entry = st.integers(min_value=0, max_value=(1 << cols) - 1)
        rows = [data.draw(entry) for _ in range(a.cols)]
        b = F2Matrix(a.cols, cols, rows)
        assert (a @ b).rank() <= min(a.rank(), b.rank())


class TestFrobeniusAlgebra:
    """Axiom checks on the built-in and hand-made algebras."""

    def test_khovanov_algebra_passes(self):
        """The default algebra satisfies every axiom and has ε(1) = 0."""
        report = check_frobenius(DEFAULT_ALGEBRA)
        assert report.passed
        assert report.khovanov_like
        assert report.failures == {}

    def test_bar_natan_algebra_passes(self):
        """The X² = X deformation is also a Frobenius algebra."""
        assert check_frobenius(bar_natan_algebra()).passed

    def test_multiplication_table(self):
        """X·X = 0 and Δ(1) = 1⊗X + X⊗1."""
        alg = khovanov_algebra()
        assert alg.m("X", "X") == frozenset()
        assert alg.delta("1") == frozenset({("1", "X"), ("X", "1")})

    def test_bad_counit_is_reported(self):
        """ε(1) = ε(X) = 1 breaks the counit law and the ε(1) = 0 condition."""
        good = khovanov_algebra()
        counit = {"1": 1, "X": 1}
        bad = FrobeniusAlgebra("bad", good.unit, counit, good.mult, good.comult)
        report = check_frobenius(bad)
        assert not report.passed
        assert "counit" in report.failures
        assert not report.khovanov_like

    def test_incomplete_tables(self):
        """A missing product is an AlgebraError naming it."""
        good = khovanov_algebra()
        mult = dict(good.mult)
        del mult[("X", "X")]
        partial = FrobeniusAlgebra("partial", good.unit, good.counit, mult, good.comult)
        with pytest.raises(AlgebraError, match=r"m\(X,X\)"):
            check_frobenius(partial)
