"""Model heat phase, transport flow on polynomials, degeneracy spectra."""
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from levilens import errors
from levilens.heat_model import (
    HomogPoly,
    ModelSymbol,
    degeneracy_spectrum,
    expm,
    hj_residual,
    model_phase,
    poly_flow,
    poly_flow_exp,
    poly_flow_matrix,
    poly_flow_rank,
    vanishes_exactly_when,
)

rng = np.random.default_rng(23)


def stable_matrix(d):
    m = rng.normal(size=(d, d))
    return m @ m.T + 0.5 * np.eye(d) + 0.3 * (m - m.T)


@pytest.mark.parametrize("scale", [0.01, 1.0, 30.0])
def test_expm_against_scipy(scale):
    a = rng.normal(size=(5, 5)) * scale
    ref = scipy.linalg.expm(a)
    assert np.max(np.abs(expm(a) - ref)) <= 1e-12 * np.max(np.abs(ref))
    c = a + 1j * rng.normal(size=(5, 5))
    np.testing.assert_allclose(expm(c), scipy.linalg.expm(c), rtol=1e-11, atol=1e-12 * np.max(np.abs(scipy.linalg.expm(c))))


def test_model_phase_examples():
    sym = ModelSymbol(np.array([[1.0]]), inert=1)
    assert model_phase(0.0, sym, [2.0, 1.0], [3.0, 1.0]) == pytest.approx(7.0)
    assert model_phase(1.0, sym, [0.0, 1.0], [0.0, 1.0]) == pytest.approx(math.exp(-1))
    late = [abs(model_phase(t, sym, [0.0, 1.0], [0.0, 1.0])) for t in (10.0, 20.0)]
    assert late[0] == pytest.approx(math.exp(-10)) and late[1] < late[0]
    with pytest.raises(ValueError):
        model_phase(-1.0, sym, [0, 1], [0, 1])


def test_model_symbol_needs_right_half_plane():
    with pytest.raises(ValueError):
        ModelSymbol(np.array([[1.0, 0], [0, -0.1]]))


def test_hamilton_jacobi_residual_and_wrong_branch():
    a = stable_matrix(3)
    sym = ModelSymbol(a, inert=2)
    for t in (0.0, 0.3, 2.0):
        x, eta = rng.normal(size=5), rng.normal(size=5)
        assert abs(hj_residual(t, sym, x, eta)) <= 1e-12 * max(1.0, np.linalg.norm(a, 2) * np.linalg.norm(x) * np.linalg.norm(eta))
        wrong = hj_residual(t, sym, x, eta, sign=1.0)
        expected = 2 * (a @ expm(t * a) @ x[2:]) @ eta[2:]
        assert wrong == pytest.approx(expected, rel=1e-10)


def test_flow_examples():
    diag = np.diag([2.0, 5.0])
    u = HomogPoly(2, 3, {(3, 0): 1.0})
    assert poly_flow(diag, u).allclose(HomogPoly(2, 3, {(3, 0): 6.0}))
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert poly_flow(swap, u).allclose(HomogPoly(2, 3, {(2, 1): 3.0}))
    mixed = HomogPoly(2, 2, {(1, 1): 1.0})
    assert poly_flow(np.diag([1.0, 2.0]), mixed).allclose(HomogPoly(2, 2, {(1, 1): 3.0}))


def test_homogeneity_enforced():
    with pytest.raises(ValueError):
        HomogPoly(2, 2, {(1, 0): 1.0})


@pytest.mark.parametrize("d, m", [(2, 2), (3, 3), (2, 4)])
def test_flow_exponential_matches_series(d, m):
    a = stable_matrix(d)
    basis = HomogPoly.monomials(d, m)
    u = HomogPoly.from_vector(d, m, rng.normal(size=len(basis)))
    t = 0.4
    by_matrix = HomogPoly.from_vector(d, m, expm(t * poly_flow_matrix(a, d, m)) @ u.vector())
    by_substitution = poly_flow_exp(t, a, u)
    scale = np.max(np.abs(by_substitution.vector()))
    assert by_matrix.allclose(by_substitution, atol=1e-11 * scale)
    x = rng.normal(size=d)
    assert by_substitution(x) == pytest.approx(u(expm(t * a) @ x), rel=1e-10)


def test_flow_ranks():
    a = stable_matrix(3)
    assert poly_flow_rank(a, 3, 0) == 0
    assert poly_flow_rank(a, 3, 2) == len(HomogPoly.monomials(3, 2))
    nilpotent = np.array([[0.0, 1.0], [0.0, 0.0]])
    # x2^m survives, everything else shifts down by one
    assert poly_flow_rank(nilpotent, 2, 3) == 3


@pytest.mark.parametrize(
    "lam, q, branch, expected",
    [
        ([1.0, -1.0], 1, 1, [0.0, 4.0]),
        ([1.0, -1.0], 0, 1, [2.0]),
        ([1.0], 1, 1, [0.0]),
        ([1.0, -1.0], 1, -1, [4.0, 0.0]),
    ],
)
def test_spectrum_examples(lam, q, branch, expected):
    spec = degeneracy_spectrum(lam, q, branch)
    np.testing.assert_array_equal(spec.values, expected)
    np.testing.assert_allclose(spec.fundamental_eigenvalues.imag, np.r_[2 * np.array(lam) * branch, -2 * np.array(lam) * branch])


def test_spectrum_rejects_zero():
    with pytest.raises(errors.DegenerateLevi):
        degeneracy_spectrum([1.0, 0.0], 1)


eigen = st.floats(0.1, 10).flatmap(lambda v: st.sampled_from([v, -v]))


@settings(max_examples=200, deadline=None)
@given(st.lists(eigen, min_size=1, max_size=5), st.sampled_from([1, -1]), st.floats(0.1, 5), st.data())
def test_infimum_vanishes_exactly_at_predicted_degree(lam, branch, sigma_abs, data):
    q = data.draw(st.integers(0, len(lam)))
    spec = degeneracy_spectrum(lam, q, branch, sigma_abs)
    assert (spec.infimum == 0.0) == vanishes_exactly_when(lam, q, branch)
    assert spec.infimum >= 0.0


def test_rotated_levi_matrix_has_same_spectrum():
    lam = np.array([2.0, -0.5, 1.0])
    u, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    levi = u @ np.diag(lam) @ u.conj().T
    for q in range(4):
        spec = degeneracy_spectrum(lam, q, 1, 1.0, levi_matrix=levi)
        np.testing.assert_allclose(np.sort(spec.operator_spectrum), np.sort(spec.values), atol=1e-12)
