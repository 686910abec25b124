"""Second-order jets of the Szegő and Bergman phases and their leading symbols.

Both phases are written in normal coordinates at the base point, where the
Levi form is diagonal with eigenvalues ``lambda_1..lambda_{n-1}``. A jet is a
quadratic polynomial ``phi(v) = linear . v + v^T H v / 2`` in the stacked
variable ``v = (x, y)``.

Szegő: ``x, y`` are points of the hypersurface in ``R^{2n-1}``,
``z_j = x_{2j-1} + i x_{2j}``, ``w_j = y_{2j-1} + i y_{2j}`` for ``j < n``.
Bergman: ``x, y`` are points of ``R^{2n}`` (the variables ``z, w``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLevi, WrongDegree
from .form_algebra import (
    FormOperator,
    covector_interior,
    covector_wedge,
    embed_boundary_forms,
    projection_operator,
)
from .geometry import (
    DEFAULT_TOLERANCES,
    DefiningFunctionSpec,
    MetricSpec,
    Tolerances,
    contact_form,
    normalize_defining,
    real_metric,
    realification,
    signature_of,
)
from .serialize import complex_list, complex_matrix, parse_complex_list, parse_complex_matrix

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class PhaseJet2:
    n: int
    kind: str
    linear: np.ndarray
    hessian: np.ndarray
    base_point: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.base_point is None:
            object.__setattr__(self, "base_point", np.zeros(len(self.linear)))

    @property
    def half(self) -> int:
        """Number of real variables on each side."""
        return len(self.linear) // 2

    @property
    def labels(self) -> list[str]:
        k = self.half
        return [f"x{j}" for j in range(1, k + 1)] + [f"y{j}" for j in range(1, k + 1)]

    def __call__(self, x, y) -> complex:
        v = np.concatenate([np.asarray(x, dtype=float), np.asarray(y, dtype=float)]) - self.base_point
        return complex(self.linear @ v + 0.5 * v @ self.hessian @ v)

    def swapped(self) -> "PhaseJet2":
        """Jet of ``(x, y) -> phi(y, x)``."""
        k = self.half
        perm = np.r_[np.arange(k, 2 * k), np.arange(k)]
        return PhaseJet2(self.n, self.kind, self.linear[perm], self.hessian[np.ix_(perm, perm)])

    def axis(self, k: int, side: str) -> np.ndarray:
        """Unit direction of the real variable ``x_k`` or ``y_k`` (1-based)."""
        v = np.zeros(2 * self.half, dtype=complex)
        v[(k - 1) + (self.half if side == "y" else 0)] = 1.0
        return v

    def wirtinger(self, j: int, side: str, bar: bool = False) -> np.ndarray:
        """Direction of ``d/dz_j`` (side ``x``) or ``d/dw_j`` (side ``y``); ``bar`` conjugates."""
        sign = 1j if bar else -1j
        return 0.5 * (self.axis(2 * j - 1, side) + sign * self.axis(2 * j, side))

    def second(self, a: np.ndarray, b: np.ndarray) -> complex:
        """Second derivative of the jet along two (complex) constant directions."""
        return complex(a @ self.hessian @ b)

    def first(self, a: np.ndarray) -> complex:
        return complex(self.linear @ a)

    def d_x(self) -> np.ndarray:
        return self.linear[: self.half]

    def d_y(self) -> np.ndarray:
        return self.linear[self.half :]

    def block(self, a: str, b: str) -> np.ndarray:
        k = self.half
        sl = {"x": slice(0, k), "y": slice(k, 2 * k)}
        return self.hessian[sl[a], sl[b]]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "labels": self.labels,
            "linear": complex_list(self.linear),
            "hessian": complex_matrix(self.hessian),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PhaseJet2":
        linear = parse_complex_list(data["linear"])
        hessian = parse_complex_matrix(data["hessian"], (len(linear), len(linear)))
        return cls(data["n"], data["kind"], linear, hessian)


class _Quadratic:
    """Accumulates a quadratic polynomial from products of linear forms."""

    def __init__(self, size: int):
        self.linear = np.zeros(size, dtype=complex)
        self.hessian = np.zeros((size, size), dtype=complex)

    def add_linear(self, c, a):
        self.linear += c * a

    def add_product(self, c, a, b):
        # d^2 (a.v)(b.v) = a b^T + b a^T
        self.hessian += c * (np.outer(a, b) + np.outer(b, a))


def _unit(size: int, k: int) -> np.ndarray:
    v = np.zeros(size, dtype=complex)
    v[k] = 1.0
    return v


def _check_nonzero(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0):
        raise DegenerateLevi("phase jets need non-zero Levi eigenvalues")
    return lam


def szego_phase_jet(lam, c=None) -> PhaseJet2:
    """Jet of the Szegő phase ``phi_+`` with the smooth factor ``f`` set to zero."""
    lam = _check_nonzero(lam)
    n = len(lam) + 1
    k = 2 * n - 1
    c = np.zeros(n - 1, dtype=complex) if c is None else np.asarray(c, dtype=complex)
    if len(c) != n - 1:
        raise ValueError(f"expected {n - 1} coefficients c_j, got {len(c)}")
    size = 2 * k
    acc = _Quadratic(size)
    xt, yt = _unit(size, k - 1), _unit(size, 2 * k - 1)
    acc.add_linear(SQRT2, xt - yt)
    for j in range(n - 1):
        z = _unit(size, 2 * j) + 1j * _unit(size, 2 * j + 1)
        w = _unit(size, k + 2 * j) + 1j * _unit(size, k + 2 * j + 1)
        d = z - w
        acc.add_product(1j * abs(lam[j]), d, d.conj())
        acc.add_product(1j * lam[j], z, w.conj())
        acc.add_product(-1j * lam[j], z.conj(), w)
        acc.add_product(c[j], z, xt)
        acc.add_product(-c[j], w, yt)
        acc.add_product(np.conj(c[j]), z.conj(), xt)
        acc.add_product(-np.conj(c[j]), w.conj(), yt)
    return PhaseJet2(n, "szego", acc.linear, acc.hessian)


def bergman_phase_jet(lam, a=None) -> PhaseJet2:
    """Jet of the Bergman phase for the quadric normal form of ``r``.

    The products ``r(z)(1 + sum a_j x_j + a_2n x_2n / 2)`` are truncated at
    total degree two, so only the linear part ``sqrt(2) x_2n`` of ``r``
    multiplies the ``a`` terms.
    """
    lam = _check_nonzero(lam)
    n = len(lam) + 1
    k = 2 * n
    a = np.zeros(k, dtype=complex) if a is None else np.asarray(a, dtype=complex)
    if len(a) != k:
        raise ValueError(f"expected {k} coefficients a_j, got {len(a)}")
    size = 2 * k
    acc = _Quadratic(size)

    def add_r(offset: int, coeffs: np.ndarray):
        # -i r(.)(1 + sum coeffs_j v_j + coeffs_2n v_2n / 2)
        top = _unit(size, offset + k - 1)
        acc.add_linear(-1j * SQRT2, top)
        for j in range(n - 1):
            for part in (2 * j, 2 * j + 1):
                e = _unit(size, offset + part)
                acc.add_product(-1j * lam[j], e, e)
        weights = coeffs.copy()
        weights[-1] *= 0.5
        acc.add_product(-1j * SQRT2, top, sum(wt * _unit(size, offset + i) for i, wt in enumerate(weights)))

    acc.add_linear(-SQRT2, _unit(size, k - 2))
    acc.add_linear(SQRT2, _unit(size, 2 * k - 2))
    add_r(0, a)
    add_r(k, a.conj())
    for j in range(n - 1):
        z = _unit(size, 2 * j) + 1j * _unit(size, 2 * j + 1)
        w = _unit(size, k + 2 * j) + 1j * _unit(size, k + 2 * j + 1)
        d = z - w
        acc.add_product(1j * abs(lam[j]), d, d.conj())
        acc.add_product(1j * lam[j], z.conj(), w)
        acc.add_product(-1j * lam[j], z, w.conj())
    return PhaseJet2(n, "bergman", acc.linear, acc.hessian)


def quadric_r(lam, v) -> float:
    """``sqrt(2) x_2n + sum lambda_j |z_j|^2`` at the real point ``v``."""
    v = np.asarray(v, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return float(SQRT2 * v[-1] + np.sum(lam * (v[0:-2:2] ** 2 + v[1:-2:2] ** 2)))


def principal_symbol(h_inv: np.ndarray, zeta: np.ndarray) -> complex:
    """``sigma(x, zeta) = sum h^{jk} zeta_j zeta_k / 2``, bilinear in complex ``zeta``."""
    return complex(0.5 * zeta @ h_inv @ zeta)


def bergman_a_coeffs(
    metric: MetricSpec, f: DefiningFunctionSpec, p, tol: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """``a_j = (1/2) d sigma / d x_j`` at ``(p, -omega_0 - i dr)``.

    ``h^{jk}`` is the inverse of the real metric, differentiated exactly via
    ``d(h^-1) = -h^-1 (dh) h^-1``.
    """
    nj = normalize_defining(f, metric, p, tol)
    g, dg = metric.matrix_with_derivatives(p)
    h = real_metric(g)
    if abs(np.linalg.det(h)) < tol.zero:
        raise np.linalg.LinAlgError("real metric is not invertible")
    h_inv = np.linalg.inv(h)
    zeta = -contact_form(nj.jet) - 1j * nj.jet.gradient
    c = realification(len(g))
    d_inv = [-h_inv @ (2.0 * np.real(c.T @ dg[j] @ c.conj())) @ h_inv for j in range(len(zeta))]
    return a_coeffs_from_symbol_derivatives(d_inv, zeta)


def a_coeffs_from_symbol_derivatives(d_inv, zeta) -> np.ndarray:
    """``a_j = (1/2) sigma(d_j h^-1, zeta)`` given the derivatives ``d_j h^{jk}``.

    A metric built from a Hermitian ``g`` makes ``h^-1`` commute with the
    complex structure, and then every ``a_j`` vanishes because ``zeta`` is
    isotropic. Non-zero values need a real metric without that symmetry.
    """
    zeta = np.asarray(zeta, dtype=complex)
    return np.array([0.5 * principal_symbol(np.asarray(d), zeta) for d in d_inv], dtype=complex)


@dataclass(frozen=True, eq=False)
class LeadingData:
    """Leading coefficients at the diagonal in a diagonalizing orthonormal frame.

    ``eigenvalues`` are reordered (positives first for Szegő, negatives first
    for Bergman); ``permutation[k]`` is the input position of the k-th one.
    Szegő fills ``s0`` and ``F``; Bergman fills ``b0``, ``a0`` (both routes)
    and ``F``, with ambient forms using the normal direction as the last
    coframe element.
    """

    kind: str
    q: int
    eigenvalues: np.ndarray
    permutation: tuple[int, ...]
    prefactor: float
    F: FormOperator
    s0: FormOperator | None = None
    b0: FormOperator | None = None
    a0: FormOperator | None = None
    a0_projection_route: FormOperator | None = None

    @property
    def n(self) -> int:
        return len(self.eigenvalues) + 1

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "q": self.q,
            "eigenvalues": self.eigenvalues.tolist(),
            "permutation": list(self.permutation),
            "prefactor": self.prefactor,
            "F": self.F.to_json(),
        }
        for name in ("s0", "b0", "a0"):
            op = getattr(self, name)
            if op is not None:
                out[name] = op.to_json()
        if self.a0 is not None:
            out["a0_rank"] = self.a0.rank()
        return out


def _reorder(lam, negatives_first: bool) -> tuple[np.ndarray, tuple[int, ...]]:
    lam = np.asarray(lam, dtype=float)
    key = (lambda k: (0 if lam[k] < 0 else 1)) if negatives_first else (lambda k: (0 if lam[k] > 0 else 1))
    perm = tuple(sorted(range(len(lam)), key=key))
    return lam[list(perm)], perm


def _half_product_prefactor(lam: np.ndarray) -> float:
    n = len(lam) + 1
    return 0.5 * float(np.prod(np.abs(lam))) * math.pi ** (-n)


def szego_leading_symbol(lam, q: int, tol: Tolerances = DEFAULT_TOLERANCES) -> LeadingData:
    lam = np.asarray(lam, dtype=float)
    n_minus, n_plus = signature_of(lam, tol.zero)
    if n_minus + n_plus != len(lam):
        raise DegenerateLevi("leading symbols need a non-degenerate Levi form")
    if q != n_plus:
        raise WrongDegree(f"Szegő leading symbol needs q = n+ ; got q={q}, (n-, n+) = ({n_minus}, {n_plus})")
    ordered, perm = _reorder(lam, negatives_first=False)
    n = len(lam) + 1
    pref = _half_product_prefactor(ordered)
    s0 = projection_operator(range(1, n_plus + 1), n - 1, q) * pref
    return LeadingData("szego", q, ordered, perm, pref, F=s0 * math.factorial(n - 1), s0=s0)


def normal_covector(m_ambient: int, norm_dbar_r_sq: float = 0.5) -> np.ndarray:
    """Coefficients of ``dbar r`` in the ambient coframe whose last element is ``dbar r / |dbar r|``."""
    w = np.zeros(m_ambient, dtype=complex)
    w[-1] = math.sqrt(norm_dbar_r_sq)
    return w


def bergman_leading(lam, q: int, norm_dbar_r_sq: float = 0.5, tol: Tolerances = DEFAULT_TOLERANCES) -> LeadingData:
    lam = np.asarray(lam, dtype=float)
    n_minus, n_plus = signature_of(lam, tol.zero)
    if n_minus + n_plus != len(lam):
        raise DegenerateLevi("leading coefficients need a non-degenerate Levi form")
    if q != n_minus:
        raise WrongDegree(f"Bergman leading term needs q = n- ; got q={q}, (n-, n+) = ({n_minus}, {n_plus})")
    ordered, perm = _reorder(lam, negatives_first=True)
    n = len(lam) + 1
    pref = _half_product_prefactor(ordered)
    negatives = range(1, n_minus + 1)
    b0 = projection_operator(negatives, n - 1, q) * pref

    embed = embed_boundary_forms(n - 1, q)
    dbar_r = normal_covector(n, norm_dbar_r_sq)
    # (dbar r)^{^,*} (dbar r)^ on ambient degree-q forms
    normal_part = covector_interior(dbar_r, q + 1) @ covector_wedge(dbar_r, q)
    b0_ambient = embed @ b0 @ embed.adjoint
    a0 = b0_ambient @ normal_part * 4.0
    product = float(np.prod(np.abs(ordered))) * math.pi ** (-n)
    a0_alt = projection_operator(negatives, n, q) @ normal_part * (2.0 * product)
    if not a0.allclose(a0_alt, atol=1e-15 * max(1.0, product)):
        raise ArithmeticError("the two routes to a_0 disagree")
    return LeadingData(
        "bergman",
        q,
        ordered,
        perm,
        pref,
        F=a0 * math.factorial(n),
        b0=b0,
        a0=a0,
        a0_projection_route=a0_alt,
    )
