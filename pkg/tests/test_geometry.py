"""Jets, normalization, frames and the Levi form."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levilens import errors
from levilens.autodiff import Jet2
from levilens.geometry import (
    DefiningFunctionSpec,
    MetricSpec,
    Polynomial,
    condition_Y,
    condition_Z,
    contact_form,
    eval_jet2,
    gamma_q_membership,
    holomorphic_tangent_frame,
    levi_form,
    normalize_defining,
    signature_of,
)

SQRT2 = math.sqrt(2.0)
EUCLID2 = MetricSpec.euclidean(2)
EUCLID3 = MetricSpec.euclidean(3)


def x1_squared(n=2):
    alpha = [0] * (2 * n)
    alpha[0] = 2
    return DefiningFunctionSpec.from_polynomial(n, [[alpha, 1.0]])


def test_jet_of_square():
    jet = eval_jet2(x1_squared(), [3.0, 0, 0, 0])
    assert jet.value == 9.0
    np.testing.assert_array_equal(jet.gradient, [6.0, 0, 0, 0])
    assert jet.hessian[0, 0] == 2.0
    assert np.count_nonzero(jet.hessian) == 1


def test_quadric_gradient_at_origin():
    jet = eval_jet2(DefiningFunctionSpec.builtin("quadric", [1.0]), np.zeros(4))
    np.testing.assert_allclose(jet.gradient, [0, 0, 0, SQRT2], atol=0)


def test_jet_arithmetic_rules():
    x, y = Jet2.coordinates([0.5, 2.0])
    f = (x * y + x**3) / y
    # f = x + x^3 / y
    assert f.value == pytest.approx(0.5 + 0.125 / 2)
    np.testing.assert_allclose(f.gradient, [1 + 3 * 0.25 / 2, -0.125 / 4])
    np.testing.assert_allclose(f.hessian, [[6 * 0.5 / 2, -3 * 0.25 / 4], [-3 * 0.25 / 4, 2 * 0.125 / 8]])
    s = (x * x + 1.0).sqrt()
    assert s.gradient[0] == pytest.approx(0.5 / math.sqrt(1.25))


coeff = st.floats(-2, 2, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(st.lists(coeff, min_size=6, max_size=6), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_cubic_matches_finite_differences(cs, point):
    alphas = [(3, 0, 0, 0), (1, 1, 1, 0), (0, 2, 0, 1), (0, 0, 1, 1), (1, 0, 0, 0), (0, 0, 0, 2)]
    poly = Polynomial.from_pairs(4, list(zip(alphas, cs)))
    p = np.array(point)
    jet = eval_jet2(poly, p)

    def value(v):
        return eval_jet2(poly, v).value

    h = 1e-4
    eye = np.eye(4)
    grad = np.array([(value(p + h * e) - value(p - h * e)) / (2 * h) for e in eye])
    hess = np.array(
        [[(value(p + h * a + h * b) - value(p + h * a - h * b) - value(p - h * a + h * b) + value(p - h * a - h * b)) / (4 * h * h) for b in eye] for a in eye]
    )
    scale = max(1.0, np.max(np.abs(jet.hessian)))
    np.testing.assert_allclose(grad.real, jet.gradient.real, atol=1e-6 * scale)
    np.testing.assert_allclose(hess.real, jet.hessian.real, atol=1e-5 * scale)


def test_sphere_normalized_to_unit_covector():
    nj = normalize_defining(DefiningFunctionSpec.builtin("sphere", n=2), EUCLID2, [1.0, 0, 0, 0])
    # |dx|^2 = 1/2 in the real metric built from g
    assert nj.scale == pytest.approx(1 / SQRT2, rel=1e-15)
    np.testing.assert_allclose(nj.jet.gradient, [SQRT2, 0, 0, 0], rtol=1e-15)


def test_linear_defining_function_scale():
    f = DefiningFunctionSpec.from_polynomial(2, [[[0, 0, 0, 1], 2.0]])
    nj = normalize_defining(f, EUCLID2, np.zeros(4))
    # |d x_4| = 1/sqrt(2), so |d(2 x_4)| = sqrt(2)
    assert nj.scale == pytest.approx(1 / SQRT2, rel=1e-15)


def test_vanishing_gradient_is_degenerate():
    with pytest.raises(errors.DegenerateBoundary):
        normalize_defining(x1_squared(), EUCLID2, np.zeros(4))


def test_contact_form_rotates_gradient():
    jet = Jet2(0.0, np.array([1.0, 2.0, 3.0, 4.0]), np.zeros((4, 4)))
    np.testing.assert_array_equal(contact_form(jet), [2.0, -1.0, 4.0, -3.0])
    nj = normalize_defining(DefiningFunctionSpec.builtin("quadric", [1.0]), EUCLID2, np.zeros(4))
    np.testing.assert_allclose(contact_form(nj.jet), [0, 0, SQRT2, 0], atol=1e-15)


def ellipsoid():
    # x1^2 + 2 x2^2 + 3 x3^2 + x4^2 + 0.5 x1 x3 + x5^2 + 4 x6^2 - 1 in C^3
    pairs = [
        [[2, 0, 0, 0, 0, 0], 1.0],
        [[0, 2, 0, 0, 0, 0], 2.0],
        [[0, 0, 2, 0, 0, 0], 3.0],
        [[0, 0, 0, 2, 0, 0], 1.0],
        [[1, 0, 1, 0, 0, 0], 0.5],
        [[0, 0, 0, 0, 2, 0], 1.0],
        [[0, 0, 0, 0, 0, 2], 4.0],
        [[0, 0, 0, 0, 0, 0], -1.0],
    ]
    return DefiningFunctionSpec.from_polynomial(3, pairs)


def test_frame_is_orthonormal_and_tangent():
    p = np.array([0, 0, 0, 0, 1.0, 0])
    nj = normalize_defining(ellipsoid(), EUCLID3, p)
    frame, gram = holomorphic_tangent_frame(nj)
    assert frame.shape == (2, 3)
    assert np.max(np.abs(gram - np.eye(2))) <= 1e-12
    dr = 0.5 * (nj.jet.gradient[0::2] - 1j * nj.jet.gradient[1::2])
    assert np.max(np.abs(frame @ dr)) <= 1e-12
    assert np.all(np.linalg.eigvalsh(gram) > 0)


def test_quadric_levi_eigenvalues_and_signature():
    data = levi_form(DefiningFunctionSpec.builtin("quadric", [2.0, -3.0]), EUCLID3, np.zeros(6))
    np.testing.assert_allclose(data.eigenvalues, [2.0, -3.0], rtol=1e-14)
    assert data.signature == (1, 1)
    assert not data.degenerate


def test_sphere_levi_eigenvalues_equal():
    data = levi_form(DefiningFunctionSpec.builtin("sphere", n=3), EUCLID3, [0, 0, 0, 0, 1.0, 0])
    np.testing.assert_allclose(data.eigenvalues, [1 / SQRT2] * 2, rtol=1e-14)
    shell = levi_form(DefiningFunctionSpec.builtin("shell", n=3), EUCLID3, [0, 0, 0, 0, 1.0, 0])
    np.testing.assert_allclose(shell.eigenvalues, [-1 / SQRT2] * 2, rtol=1e-14)


@pytest.mark.parametrize("factor", [0.25, 3.0, 40.0])
def test_levi_form_ignores_rescaling(factor):
    base = ellipsoid()
    scaled = DefiningFunctionSpec.from_polynomial(3, [[list(a), c.real * factor] for a, c in base.polynomial.terms])
    p = np.array([0, 0, 0, 0, 1.0, 0])
    a = levi_form(base, EUCLID3, p).eigenvalues
    b = levi_form(scaled, EUCLID3, p).eigenvalues
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_levi_matrix_hermitian_off_axis():
    p = np.array([0.3, 0.1, 0.2, 0, 0, 0])
    p[4] = math.sqrt((1 - p[0] ** 2 - 2 * p[1] ** 2 - 3 * p[2] ** 2 - 0.5 * p[0] * p[2]))
    data = levi_form(ellipsoid(), EUCLID3, p)
    assert np.allclose(data.levi_matrix, data.levi_matrix.conj().T, atol=1e-14)
    assert data.signature == (0, 2)


def test_point_off_boundary_rejected():
    with pytest.raises(errors.NotOnBoundary):
        levi_form(DefiningFunctionSpec.builtin("sphere", n=2), EUCLID2, [0.5, 0, 0, 0])


def test_nonflat_metric_changes_eigenvalues():
    one = [[[0, 0, 0, 0], 1.0]]
    metric = MetricSpec(2, ((Polynomial.from_pairs(4, [[[0, 0, 0, 0], 2.0]]), Polynomial.from_pairs(4, [])), (Polynomial.from_pairs(4, []), Polynomial.from_pairs(4, one))))
    f = DefiningFunctionSpec.builtin("quadric", [1.0])
    flat = levi_form(f, EUCLID2, np.zeros(4)).eigenvalues
    bent = levi_form(f, metric, np.zeros(4)).eigenvalues
    # |dz_1|^2 = 1/2 in g halves the eigenvalue relative to the frame
    np.testing.assert_allclose(bent, flat / 2, rtol=1e-14)


def test_indefinite_metric_rejected():
    zero = Polynomial.from_pairs(4, [])
    metric = MetricSpec(2, ((Polynomial.from_pairs(4, [[[0, 0, 0, 0], -1.0]]), zero), (zero, Polynomial.from_pairs(4, [[[0, 0, 0, 0], 1.0]]))))
    with pytest.raises(errors.MetricError):
        metric.matrix(np.zeros(4))


def test_non_hermitian_metric_rejected():
    zero = Polynomial.from_pairs(4, [])
    one = Polynomial.from_pairs(4, [[[0, 0, 0, 0], 1.0]])
    with pytest.raises(ValueError):
        MetricSpec(2, ((one, Polynomial.from_pairs(4, [[[0, 0, 0, 0], [0, 1]]])), (zero, one)))


@pytest.mark.parametrize(
    "lam, q, y, z",
    [
        ([1.0, -1.0], 1, False, False),
        ([1.0, -1.0], 0, True, True),
        ([1.0, -1.0], 2, True, True),
        ([1.0, 1.0], 0, False, False),
        ([1.0, 1.0], 1, True, True),
        ([1.0, 1.0], 2, False, True),
        ([-1.0, -2.0], 2, False, False),
    ],
)
def test_conditions_examples(lam, q, y, z):
    assert condition_Y(lam, q) is y
    assert condition_Z(lam, q) is z


eigen = st.floats(0.1, 10).flatmap(lambda v: st.sampled_from([v, -v]))


@settings(max_examples=200, deadline=None)
@given(st.lists(eigen, min_size=1, max_size=6), st.data())
def test_conditions_follow_signature(lam, data):
    q = data.draw(st.integers(0, len(lam)))
    n_minus, n_plus = signature_of(lam)
    assert condition_Y(lam, q) == (q not in (n_minus, n_plus))
    assert condition_Z(lam, q) == (q != n_minus)


def test_conditions_reject_zero_eigenvalue():
    with pytest.raises(errors.DegenerateLevi):
        condition_Z([1.0, 0.0], 1)
    with pytest.raises(errors.DegenerateLevi):
        condition_Y([1e-12, 1.0], 1)


def test_gamma_membership():
    quadric = DefiningFunctionSpec.builtin("quadric", [1.0, -1.0])
    assert gamma_q_membership(quadric, EUCLID3, np.zeros(6), 1)
    assert not gamma_q_membership(quadric, EUCLID3, np.zeros(6), 0)
    sphere = DefiningFunctionSpec.builtin("sphere", n=2)
    assert gamma_q_membership(sphere, EUCLID2, [1.0, 0, 0, 0], 0)
    assert not gamma_q_membership(sphere, EUCLID2, [1.0, 0, 0, 0], 1)


def test_defining_function_json_roundtrip():
    for f in (ellipsoid(), DefiningFunctionSpec.builtin("quadric", [1.0, -2.0])):
        assert DefiningFunctionSpec.from_json(f.to_json()) == f
