"""Wedge and interior operators on (0,q)-forms."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levilens.form_algebra import (
    FormBasis,
    FormOperator,
    anticommutator,
    covector_interior,
    covector_wedge,
    dimension,
    embed_boundary_forms,
    interior_op,
    projection_operator,
    scaled_wedge_pair,
    wedge_op,
)


def permutation_sign(seq):
    """Sign by counting inversions, independent of the operator code."""
    inv = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return -1 if inv % 2 else 1


def test_basis_is_lexicographic():
    assert FormBasis(3, 2).subsets == ((1, 2), (1, 3), (2, 3))
    assert FormBasis(3, 0).subsets == ((),)
    assert dimension(4, 2) == 6
    assert dimension(3, 4) == 0
    assert dimension(3, -1) == 0


def test_wedge_examples():
    op = wedge_op(2, 3, 1)
    # e2 ^ e1 = -e1^e2, e2 ^ e3 = e2^e3
    b_in, b_out = op.basis_in.index, op.basis_out.index
    assert op.entries[b_out[(1, 2)], b_in[(1,)]] == -1
    assert op.entries[b_out[(2, 3)], b_in[(3,)]] == 1
    assert not np.any(op.entries[:, b_in[(2,)]])


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_wedge_matches_permutation_signs(m):
    for q in range(m):
        for j in range(1, m + 1):
            op = wedge_op(j, m, q)
            expected = np.zeros_like(op.entries)
            for col, J in enumerate(op.basis_in.subsets):
                if j not in J:
                    row = op.basis_out.index[tuple(sorted((j,) + J))]
                    expected[row, col] = permutation_sign((j,) + J)
            np.testing.assert_array_equal(op.entries, expected)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_interior_is_adjoint(m):
    for q in range(1, m + 1):
        for j in range(1, m + 1):
            assert interior_op(j, m, q).allclose(wedge_op(j, m, q - 1).adjoint, atol=0)
    assert interior_op(1, m, 0).entries.size == 0


@pytest.mark.parametrize("m", [2, 3, 4])
def test_canonical_anticommutation(m):
    for q in range(m + 1):
        for j, k in itertools.product(range(1, m + 1), repeat=2):
            ej = np.eye(m)[j - 1]
            ek = np.eye(m)[k - 1]
            expected = FormOperator.identity(m, q) * (1.0 if j == k else 0.0)
            assert anticommutator(ej, ek, q).allclose(expected, atol=0)
        for j in range(1, m + 1):
            if q + 2 <= m:
                assert (wedge_op(j, m, q + 1) @ wedge_op(j, m, q)).allclose(FormOperator.zeros(m, q, q + 2), atol=0)


@pytest.mark.parametrize("m, subset", [(3, (1,)), (4, (1, 3)), (4, ()), (5, (2, 4, 5))])
def test_projection_properties(m, subset):
    for q in range(m + 1):
        p = projection_operator(subset, m, q)
        assert (p @ p).allclose(p, atol=0)
        assert p.allclose(p.adjoint, atol=0)
        s = len(subset)
        expected = math.comb(m - s, q - s) if q >= s else 0
        assert p.trace() == expected


def test_projection_equals_product_of_number_operators():
    m, q = 4, 2
    prod = FormOperator.identity(m, q)
    for j in (1, 3):
        prod = prod @ (wedge_op(j, m, q - 1) @ interior_op(j, m, q))
    assert prod.allclose(projection_operator((1, 3), m, q), atol=0)


def test_projection_subset_outside_range():
    with pytest.raises(IndexError):
        projection_operator((4,), 3, 1)


cplx = st.builds(complex, st.floats(-3, 3), st.floats(-3, 3))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda m: st.tuples(st.lists(cplx, min_size=m, max_size=m), st.integers(0, m))))
def test_random_covector_anticommutator(args):
    w, q = args
    w = np.array(w)
    m = len(w)
    norm_sq = float(np.vdot(w, w).real)
    got = anticommutator(w, w, q)
    assert got.allclose(FormOperator.identity(m, q) * norm_sq, atol=1e-12 * max(1.0, norm_sq))
    pair = scaled_wedge_pair(w, q)
    assert pair.interior.allclose(pair.wedge.adjoint, atol=1e-14)
    if q + 2 <= m:
        square = covector_wedge(w, q + 1) @ covector_wedge(w, q)
        assert np.max(np.abs(square.entries)) <= 1e-12 * max(1.0, norm_sq)


def test_interior_is_antilinear():
    w = np.array([1j, 2.0, 0.5 - 1j])
    a = covector_interior(w, 2)
    b = covector_interior(w * 1j, 2)
    assert b.allclose(a * -1j, atol=1e-15)


def test_embedding_is_isometric():
    e = embed_boundary_forms(3, 2)
    assert (e.adjoint @ e).allclose(FormOperator.identity(3, 2), atol=0)
    assert e.basis_out.m == 4


def test_json_roundtrip_and_table():
    op = covector_wedge(np.array([1.0, 1j, -2.0]), 1)
    back = FormOperator.from_json(op.to_json())
    assert back.allclose(op, atol=0)
    rows = op.table()
    assert len(rows) == op.entries.size
