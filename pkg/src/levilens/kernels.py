"""Laplace moments, singularity expansions and oscillatory quadrature.

The kernels are written as ``int_0^inf exp(i phi t) s(t) dt`` with
``s(t) ~ sum_j s^j t^(k-1-j)``. Integrating term by term with the Laplace
moments gives ``F X^-k + G log X`` plus a smooth part, where
``X = -i(phi + i0)``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError
from .form_algebra import FormOperator
from .phase import szego_leading_symbol, szego_phase_jet

EULER_GAMMA = float(np.euler_gamma)
DEFAULT_EPSILON = 1e-9


def harmonic(k: int) -> float:
    return math.fsum(1.0 / j for j in range(1, k + 1))


def laplace_moment(m: int, x: complex) -> complex:
    """``int_0^inf exp(-t x) t^m dt``, taken as a finite part when ``m < 0``.

    ``m >= 0`` gives ``m! x^(-m-1)``. For ``m < 0`` with ``l = -m-1`` the value
    is ``(-1)^m / l! * x^l * (log x + gamma - H_l)``, principal branch.
    """
    x = complex(x)
    if x == 0:
        raise DomainError("Laplace moment is singular at x = 0")
    if x.real < 0:
        raise DomainError("Laplace moment needs Re x >= 0")
    if m >= 0:
        return math.factorial(m) * x ** (-m - 1)
    l = -m - 1
    sign = -1.0 if m % 2 else 1.0
    return sign / math.factorial(l) * x**l * (cmath.log(x) + EULER_GAMMA - harmonic(l))


def euler_constant_limit(levels: int = 9, base: int = 10) -> float:
    """Euler's constant from ``H_m - log m`` at ``m = base 2^k``, Richardson-extrapolated in ``1/m``."""
    table: list[list[float]] = []
    for k in range(levels):
        m = base * 2**k
        row = [harmonic(m) - math.log(m)]
        for j in range(1, k + 1):
            prev = table[k - 1][j - 1]
            row.append(row[j - 1] + (row[j - 1] - prev) / (2**j - 1))
        table.append(row)
    return table[-1][-1]


def _taylor_tail(z: complex, order: int) -> complex:
    """``exp(z) - sum_{k<=order} z^k/k!`` without cancellation for small ``z``."""
    if abs(z) >= 1:
        return cmath.exp(z) - sum(z**k / math.factorial(k) for k in range(order + 1))
    term = z ** (order + 1) / math.factorial(order + 1)
    total = 0j
    k = order + 1
    while abs(term) > 1e-18 * max(abs(total), 1e-300):
        total += term
        k += 1
        term *= z / k
    return total


def _complex_quad(fn, a: float, b: float) -> complex:
    # the 1e-12 request sits at the roundoff floor; accuracy is judged by the caller
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: fn(t).real, a, b, epsabs=0, epsrel=1e-12, limit=400)[0]
        im = integrate.quad(lambda t: fn(t).imag, a, b, epsabs=0, epsrel=1e-12, limit=400)[0]
    return complex(re, im)


def _damped_fourier(m: int, x: complex, start: float) -> complex:
    """``int_start^inf exp(-t x) t^m dt`` for ``Re x > 0``.

    The range is cut where ``exp(-t Re x) t^m`` falls below ``e^-45`` and
    split into chunks of a few oscillation periods so each adaptive call sees
    a tame integrand.
    """
    a, b = x.real, abs(x.imag)
    end = start + 45.0 / a
    for _ in range(50):
        end = max(start + 1.0, (45.0 + max(m, 0) * math.log(end)) / a)
    chunk = min(end - start, 8 * math.pi / b) if b > 0 else end - start
    edges = np.append(np.arange(start, end, chunk), end)
    parts = [_complex_quad(lambda t: cmath.exp(-t * x) * t**m, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))


def moment_by_quadrature(m: int, x: complex) -> complex:
    """Independent numeric value of the (finite-part) Laplace moment.

    ``m >= 0``: quadrature of ``exp(-tx) t^m``. ``m < 0``: Hadamard finite
    part. On ``[0, 1]`` the Taylor polynomial of ``exp(-tx)`` through degree
    ``-m-1`` is subtracted and its terms are integrated exactly, the ``t^-1``
    term contributing nothing; ``[1, inf)`` is integrated directly.
    Needs ``Re x > 0``.
    """
    x = complex(x)
    if x.real <= 0:
        raise DomainError("quadrature oracle needs Re x > 0")
    if m >= 0:
        return _complex_quad(lambda t: cmath.exp(-t * x) * t**m, 0, 1) + _damped_fourier(m, x, 1.0)
    l = -m - 1
    head = _complex_quad(lambda t: _taylor_tail(-t * x, l) * t**m if t > 0 else 0j, 0, 1)
    exact = sum((-x) ** k / math.factorial(k) / (m + k + 1) for k in range(l))
    return head + exact + _damped_fourier(m, x, 1.0)


def oscillatory_quadrature(phi: complex, degrees, coeffs=None, rtol: float = 1e-9) -> list[complex]:
    """``c_m int_0^inf exp(i phi t) t^m dt`` for each degree by composite Gauss-Legendre.

    The substitution ``s = Im(phi) t`` turns the decay into ``exp(-s)``; the
    panel count on ``[0, S]`` doubles until successive results agree well
    below ``rtol``. The real-axis sum cancels by a factor of about
    ``(Im phi / |phi|)^(m+1)``, so strongly oscillating phases lose digits.
    """
    phi = complex(phi)
    b = phi.imag
    if b <= 0:
        raise DomainError("oscillatory quadrature needs Im phi > 0")
    freq = phi.real / b
    degrees = list(degrees)
    coeffs = [1.0] * len(degrees) if coeffs is None else list(coeffs)
    if len(coeffs) != len(degrees):
        raise ValueError("coeffs and degrees differ in length")
    nodes, weights = np.polynomial.legendre.leggauss(24)
    out = []
    for m, c in zip(degrees, coeffs):
        if m < 0:
            raise ValueError("oscillatory quadrature covers non-negative degrees only")
        upper = 60.0 + 2.0 * m
        panels = max(8, int(abs(freq) * upper / 4) + 1)
        prev = None
        while True:
            edges = np.linspace(0.0, upper, panels + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            s = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
            w = (half[:, None] * weights[None, :]).ravel()
            val = np.sum(w * np.exp(-s + 1j * freq * s) * s**m) / b ** (m + 1)
            if prev is not None and abs(val - prev) <= 1e-2 * rtol * abs(val):
                break
            if panels > 2**16:
                raise ArithmeticError("oscillatory quadrature failed to converge")
            prev = val
            panels *= 2
        out.append(complex(c * val))
    return out


def scalar_operator(c: complex) -> FormOperator:
    """A 1x1 operator on degree-0 forms over an empty coframe."""
    return FormOperator.identity(0, 0) * complex(c)


@dataclass(frozen=True, eq=False)
class SingularityExpansion:
    """``sum F_j X^(j-k) + sum G_j X^j log X (+ sum E_j X^j)`` with ``X = -i(phi + i0)``.

    ``smooth_coeffs`` are the ``E_j`` that the moment integration produces
    alongside the log terms; they are smooth in ``phi`` and empty unless
    requested.
    """

    kind: str
    order: int
    truncation: int
    F_coeffs: list[FormOperator]
    G_coeffs: list[FormOperator]
    smooth_coeffs: list[FormOperator] = field(default_factory=list)

    @property
    def dropped_order(self) -> int:
        """Lowest power of ``X`` whose coefficient is not represented."""
        return self.truncation + 1 - self.order

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "order": self.order,
            "truncation": self.truncation,
            "F_coeffs": [op.to_json() for op in self.F_coeffs],
            "G_coeffs": [op.to_json() for op in self.G_coeffs],
            "smooth_coeffs": [op.to_json() for op in self.smooth_coeffs],
            "note": f"terms of order X^{self.dropped_order} log X and beyond are dropped",
        }


def expansion_order(n: int, kind: str) -> int:
    if kind == "szego":
        return n
    if kind == "bergman":
        return n + 1
    raise ValueError(f"kind must be 'szego' or 'bergman', got {kind!r}")


def assemble_expansion(s_coeffs, n: int, kind: str, include_smooth: bool = False) -> SingularityExpansion:
    """Group ``s^0..s^N`` into the ``F`` and ``G`` coefficient lists."""
    s_coeffs = list(s_coeffs)
    if not s_coeffs:
        raise ValueError("need at least the leading coefficient s^0")
    k = expansion_order(n, kind)
    N = len(s_coeffs) - 1
    F = [s_coeffs[j] * math.factorial(k - 1 - j) for j in range(min(k, N + 1))]
    G, E = [], []
    for l in range(N + 1 - k):
        c = (-1) ** (l + 1) / math.factorial(l)
        G.append(s_coeffs[k + l] * c)
        if include_smooth:
            E.append(s_coeffs[k + l] * (c * (EULER_GAMMA - harmonic(l))))
    return SingularityExpansion(kind, k, N, F, G, E)


def _regularized(phi: complex, epsilon: float) -> complex:
    x = -1j * (complex(phi) + 1j * epsilon)
    if x == 0:
        raise DomainError("phi + i epsilon vanishes")
    if x.real < 0:
        raise DomainError("-i(phi + i epsilon) must lie in the closed right half plane")
    return x


def evaluate_expansion(exp: SingularityExpansion, phi: complex, epsilon: float = DEFAULT_EPSILON) -> FormOperator:
    x = _regularized(phi, epsilon)
    log_x = cmath.log(x)
    ops = [op * x ** (j - exp.order) for j, op in enumerate(exp.F_coeffs)]
    ops += [op * (x**j * log_x) for j, op in enumerate(exp.G_coeffs)]
    ops += [op * x**j for j, op in enumerate(exp.smooth_coeffs)]
    total = ops[0]
    for op in ops[1:]:
        total = total + op
    return total


def direct_moment_sum(s_coeffs, n: int, kind: str, phi: complex, epsilon: float = DEFAULT_EPSILON) -> FormOperator:
    """``sum_j s^j L(k-1-j, X)``: the term-by-term integral without regrouping."""
    k = expansion_order(n, kind)
    x = _regularized(phi, epsilon)
    ops = [s * laplace_moment(k - 1 - j, x) for j, s in enumerate(s_coeffs)]
    total = ops[0]
    for op in ops[1:]:
        total = total + op
    return total


@dataclass(frozen=True, eq=False)
class CompositionReport:
    n: int
    eigenvalues: list[float]
    hessian: np.ndarray
    hessian_det: complex
    lhs: float
    rhs: float
    det_relative_error: float
    idempotency_residual: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "eigenvalues": self.eigenvalues,
            "hessian_det": self.hessian_det,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "det_relative_error": self.det_relative_error,
            "idempotency_residual": self.idempotency_residual,
            "pass": self.passed,
        }


def composition_hessian(lam, c=None) -> np.ndarray:
    """Hessian in ``(sigma, w)`` of ``phi_+(x, w) + sigma phi_+(w, y)`` at the base point.

    Block form ``[[0, omega_0], [omega_0^T, phi_xx + phi_yy]]`` built from the
    constructed Szegő jet.
    """
    jet = szego_phase_jet(lam, c)
    k = jet.half
    h = np.zeros((k + 1, k + 1), dtype=complex)
    h[0, 1:] = jet.d_x()
    h[1:, 0] = jet.d_x()
    h[1:, 1:] = jet.block("x", "x") + jet.block("y", "y")
    return h


def composition_check(lam, q: int, c=None, det_constant_scale: float = 1.0, rtol: float = 1e-8) -> CompositionReport:
    """Check ``det(H/i) = 2^(4n-3) prod lambda^2`` and that stationary phase reproduces ``s^0``.

    ``det_constant_scale`` multiplies the expected constant; values other
    than 1 exist to exercise the failure path.
    """
    lam = np.asarray(lam, dtype=float)
    n = len(lam) + 1
    leading = szego_leading_symbol(lam, q)
    h = composition_hessian(lam, c)
    det = complex(np.linalg.det(h / 1j))
    rhs = 2.0 ** (4 * n - 3) * float(np.prod(lam**2)) * det_constant_scale
    rel = abs(det - rhs) / abs(rhs)
    s0 = leading.s0
    # a_0 = det(H / 2 pi i)^(-1/2) s0 s0 sqrt(h(p)), h(p) = 2^(2n-1)
    det_scaled = det / (2 * math.pi) ** (2 * n)
    a0 = (s0 @ s0) * (cmath.sqrt(det_scaled) ** -1 * math.sqrt(2.0 ** (2 * n - 1)))
    scale = float(np.max(np.abs(s0.entries), initial=0.0))
    resid = float(np.max(np.abs((a0 - s0).entries), initial=0.0)) / max(scale, 1e-300)
    return CompositionReport(
        n=n,
        eigenvalues=lam.tolist(),
        hessian=h,
        hessian_det=det,
        lhs=det.real,
        rhs=rhs,
        det_relative_error=rel,
        idempotency_residual=resid,
        passed=bool(rel <= rtol and resid <= 1e-6),
    )


def idempotency_residual(lam) -> float:
    """``max |2 prod|lambda|^-1 pi^n s0 s0 - s0|`` in the leading Szegő symbol."""
    lam = np.asarray(lam, dtype=float)
    n_plus = int(np.sum(lam > 0))
    leading = szego_leading_symbol(lam, n_plus)
    n = len(lam) + 1
    s0 = leading.s0
    factor = 2.0 * math.pi**n / float(np.prod(np.abs(lam)))
    return float(np.max(np.abs((s0 @ s0 * factor - s0).entries), initial=0.0))

