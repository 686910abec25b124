"""Constant-coefficient slice of the heat-equation construction.

The model principal symbol is ``p0 = i <A x'', xi''>`` with a constant matrix
``A`` whose spectrum lies in the right half plane. Its phase
``<x', eta'> + <exp(-tA) x'', eta''>`` solves the Hamilton-Jacobi equation
exactly, and the transport operator acts on homogeneous polynomials through
the flow ``u -> <A x, grad u>``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLevi
from .form_algebra import FormBasis, FormOperator, interior_op, wedge_op


def expm(a: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor series.

    The matrix is scaled so its 1-norm is at most 1/2, the series is summed
    until the next term drops below ``tol`` relative to the partial sum,
    and the result is squared back.
    """
    a = np.asarray(a)
    dtype = np.result_type(a.dtype, float)
    d = a.shape[0]
    norm = np.linalg.norm(a, 1) if a.size else 0.0
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    scaled = a / 2.0**squarings
    result = np.eye(d, dtype=dtype)
    term = np.eye(d, dtype=dtype)
    for k in range(1, 60):
        term = term @ scaled / k
        result = result + term
        if np.linalg.norm(term, 1) <= tol * max(np.linalg.norm(result, 1), 1e-300):
            break
    for _ in range(squarings):
        result = result @ result
    return result


@dataclass(frozen=True, eq=False)
class ModelSymbol:
    """Constant matrix ``A`` acting on ``x''`` plus the size of the inert block ``x'``."""

    A: np.ndarray
    inert: int = 0

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A))
        if a.shape[0] != a.shape[1]:
            raise ValueError("A must be square")
        if a.size and np.min(np.linalg.eigvals(a).real) <= 0:
            raise ValueError("A must have spectrum in the open right half plane")
        object.__setattr__(self, "A", a)

    @property
    def active(self) -> int:
        return self.A.shape[0]

    def split(self, v) -> tuple[np.ndarray, np.ndarray]:
        v = np.asarray(v)
        if len(v) != self.inert + self.active:
            raise ValueError(f"expected a vector of length {self.inert + self.active}")
        return v[: self.inert], v[self.inert :]


def model_phase(t: float, sym: ModelSymbol, x, eta, sign: float = -1.0) -> complex:
    """``<x', eta'> + <exp(sign t A) x'', eta''>``; ``sign=+1`` is the wrong branch used as a control."""
    if t < 0:
        raise ValueError("t must be non-negative")
    x1, x2 = sym.split(x)
    e1, e2 = sym.split(eta)
    return complex(x1 @ e1 + (expm(sign * t * sym.A) @ x2) @ e2)


def hj_residual(t: float, sym: ModelSymbol, x, eta, sign: float = -1.0) -> complex:
    """``d_t psi - i p0(x, d_x psi)`` for the model phase.

    Both terms are evaluated in closed form: ``d_t psi = sign <A E x'', eta''>``
    and ``d_x'' psi = E^T eta''`` with ``E = exp(sign t A)``.
    """
    _, x2 = sym.split(x)
    _, e2 = sym.split(eta)
    e = expm(sign * t * sym.A)
    dt = sign * (sym.A @ e @ x2) @ e2
    grad = e.T @ e2
    p0 = 1j * (sym.A @ x2) @ grad
    return complex(dt - 1j * p0)


@dataclass(frozen=True, eq=False)
class HomogPoly:
    """Homogeneous polynomial of degree ``m`` in ``d`` variables, keyed by exponent tuples."""

    d: int
    m: int
    coeffs: dict[tuple[int, ...], complex]

    def __post_init__(self):
        for alpha in self.coeffs:
            if len(alpha) != self.d or sum(alpha) != self.m:
                raise ValueError(f"term {alpha} is not homogeneous of degree {self.m}")

    @staticmethod
    def monomials(d: int, m: int) -> list[tuple[int, ...]]:
        """Exponents of degree ``m`` in lexicographically decreasing order."""
        out = [a for a in itertools.product(range(m + 1), repeat=d) if sum(a) == m]
        return sorted(out, reverse=True)

    @classmethod
    def from_vector(cls, d: int, m: int, vec) -> "HomogPoly":
        return cls(d, m, {a: complex(c) for a, c in zip(cls.monomials(d, m), vec) if c != 0})

    def vector(self) -> np.ndarray:
        return np.array([self.coeffs.get(a, 0) for a in self.monomials(self.d, self.m)], dtype=complex)

    def __call__(self, x) -> complex:
        x = np.asarray(x)
        return complex(sum(c * np.prod(x ** np.array(a)) for a, c in self.coeffs.items()))

    def allclose(self, other: "HomogPoly", atol: float = 1e-10) -> bool:
        return self.m == other.m and bool(np.allclose(self.vector(), other.vector(), rtol=0, atol=atol))


def _substitute_linear(u: HomogPoly, b: np.ndarray) -> HomogPoly:
    """``u(B x)`` expanded back into monomials."""
    d = u.d
    result: dict[tuple[int, ...], complex] = {}
    for alpha, c in u.coeffs.items():
        # product over variables of (sum_k B_jk x_k)^{alpha_j}
        partial: dict[tuple[int, ...], complex] = {(0,) * d: complex(c)}
        for j, power in enumerate(alpha):
            for _ in range(power):
                nxt: dict[tuple[int, ...], complex] = {}
                for beta, coef in partial.items():
                    for k in range(d):
                        if b[j, k] == 0:
                            continue
                        gamma = list(beta)
                        gamma[k] += 1
                        key = tuple(gamma)
                        nxt[key] = nxt.get(key, 0) + coef * b[j, k]
                partial = nxt
        for beta, coef in partial.items():
            result[beta] = result.get(beta, 0) + coef
    return HomogPoly(d, u.m, {k: v for k, v in result.items() if v != 0})


def poly_flow(a: np.ndarray, u: HomogPoly) -> HomogPoly:
    """``<A x, grad u>``; preserves the degree."""
    a = np.asarray(a)
    out: dict[tuple[int, ...], complex] = {}
    for alpha, c in u.coeffs.items():
        for j, power in enumerate(alpha):
            if power == 0:
                continue
            # d/dx_j x^alpha = power x^(alpha - e_j); then multiply by (A x)_j
            for k in range(u.d):
                if a[j, k] == 0:
                    continue
                beta = list(alpha)
                beta[j] -= 1
                beta[k] += 1
                key = tuple(beta)
                out[key] = out.get(key, 0) + c * power * a[j, k]
    return HomogPoly(u.d, u.m, {k: v for k, v in out.items() if v != 0})


def poly_flow_exp(t: float, a: np.ndarray, u: HomogPoly) -> HomogPoly:
    """``exp(t 𝒜) u = u ∘ exp(tA)``."""
    return _substitute_linear(u, expm(t * np.asarray(a)))


def poly_flow_matrix(a: np.ndarray, d: int, m: int) -> np.ndarray:
    """Matrix of ``u -> <A x, grad u>`` on the monomial basis of degree ``m``."""
    basis = HomogPoly.monomials(d, m)
    cols = [poly_flow(a, HomogPoly(d, m, {alpha: 1.0})).vector() for alpha in basis]
    return np.array(cols).T.reshape(len(basis), len(basis))


def poly_flow_rank(a: np.ndarray, d: int, m: int) -> int:
    mat = poly_flow_matrix(a, d, m)
    return int(np.linalg.matrix_rank(mat)) if mat.size else 0


@dataclass(frozen=True, eq=False)
class DegeneracySpectrum:
    """Values of ``p0^s + tr F / 2`` on each q-subset, with the operator route and its spectrum."""

    q: int
    sigma: float
    subsets: tuple[tuple[int, ...], ...]
    values: np.ndarray
    operator: FormOperator
    operator_spectrum: np.ndarray
    fundamental_eigenvalues: np.ndarray

    @property
    def infimum(self) -> float:
        return float(np.min(self.values))

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "sigma": self.sigma,
            "subsets": [list(s) for s in self.subsets],
            "values": self.values.tolist(),
            "infimum": self.infimum,
            "fundamental_eigenvalues": [[0.0, float(v.imag)] for v in self.fundamental_eigenvalues],
        }


def _elementwise_fsum(mats: list[np.ndarray]) -> np.ndarray:
    stack = np.stack(mats)
    out = np.empty(stack.shape[1:])
    for idx in np.ndindex(*out.shape):
        out[idx] = math.fsum(stack[(slice(None),) + idx])
    return out


def degeneracy_spectrum(
    lam, q: int, branch: int = 1, sigma_abs: float = 1.0, levi_matrix=None, tol_zero: float = 1e-9
) -> DegeneracySpectrum:
    """Spectrum of ``p0^s + tr F / 2`` on degree-q forms at ``sigma = branch * sigma_abs``.

    The subset route sums ``|lambda||sigma| + sum_{j not in J} lambda sigma
    - sum_{j in J} lambda sigma`` for each q-subset. The operator route builds
    ``(sum L_jj - 2 sum L_kj e_j^ e_k^*) sigma + sum |lambda||sigma|`` from a
    Levi matrix (diagonal in ``lam`` unless ``levi_matrix`` is given). All
    sums use ``math.fsum`` so the two routes agree bit for bit on diagonal
    input.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(np.abs(lam) <= tol_zero):
        raise DegenerateLevi(f"eigenvalues {lam.tolist()} include a zero")
    if branch not in (1, -1) or sigma_abs <= 0:
        raise ValueError("branch must be +1 or -1 and sigma_abs positive")
    m = len(lam)
    if not 0 <= q <= m:
        raise ValueError(f"form degree q={q} outside 0..{m}")
    sigma = branch * sigma_abs
    basis = FormBasis(m, q)
    abs_terms = [abs(v) * abs(sigma) for v in lam]
    signed = [v * sigma for v in lam]
    values = np.array(
        [
            math.fsum(abs_terms + [s if j + 1 not in J else -s for j, s in enumerate(signed)])
            for J in basis.subsets
        ]
    )

    lmat = np.diag(lam).astype(complex) if levi_matrix is None else np.asarray(levi_matrix, dtype=complex)
    eye = np.eye(basis.dim)
    pieces: list[np.ndarray] = [eye * t for t in abs_terms]
    pieces += [eye * (lmat[j, j] * sigma) for j in range(m)]
    for j, k in itertools.product(range(m), repeat=2):
        if lmat[k, j] == 0 or q == 0:
            continue
        ek = wedge_op(j + 1, m, q - 1) @ interior_op(k + 1, m, q)
        pieces.append(-2.0 * (lmat[k, j] * sigma) * ek.entries)
    if all(np.isrealobj(p) or not np.any(np.imag(p)) for p in pieces):
        total = _elementwise_fsum([np.real(p) for p in pieces])
    else:
        total = np.sum(pieces, axis=0)
    operator = FormOperator(basis, basis, np.asarray(total, dtype=complex))
    if levi_matrix is None:
        spectrum = np.real(np.diag(operator.entries)).copy()
        if not np.array_equal(np.sort(spectrum), np.sort(values)):
            raise ArithmeticError("operator and subset routes disagree")
    else:
        spectrum = np.linalg.eigvalsh(operator.entries)
    fundamental = np.concatenate([2j * lam * sigma, -2j * lam * sigma])
    return DegeneracySpectrum(q, sigma, basis.subsets, values, operator, spectrum, fundamental)


def vanishes_exactly_when(lam, q: int, branch: int, tol_zero: float = 1e-9) -> bool:
    """The predicted vanishing of the infimum: ``q = n+`` on the positive branch, ``q = n-`` on the negative."""
    lam = np.asarray(lam, dtype=float)
    n_plus = int(np.sum(lam > tol_zero))
    n_minus = int(np.sum(lam < -tol_zero))
    return q == (n_plus if branch > 0 else n_minus)
