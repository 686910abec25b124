"""CR-geometric invariants of a real hypersurface in complex n-space.

Real coordinates are ``x_1..x_2n`` with ``z_j = x_{2j-1} + i x_{2j}``; arrays
are 0-based, so ``z_j`` occupies slots ``2j-2`` and ``2j-1``. A Hermitian
metric ``g`` on ``(1,0)``-vectors induces the real metric
``h = 2 Re(C^T g conj(C))`` where ``C`` maps a real vector to its
``(1,0)``-part. For the euclidean ``g`` this gives
``(d/dx_j | d/dx_k) = 2 delta_jk`` and ``|dx_j|^2 = 1/2``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .autodiff import Jet2
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateBoundary, DegenerateLevi, MetricError, NotOnBoundary
from .serialize import complex_pair, parse_complex

BUILTINS = ("quadric", "sphere", "shell")
# projected seeds shorter than this are dropped during Gram-Schmidt
FRAME_SKIP = 1e-8


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in ``nvars`` real variables, stored as (multi-index, coefficient) pairs."""

    nvars: int
    terms: tuple[tuple[tuple[int, ...], complex], ...]

    def __post_init__(self):
        for alpha, c in self.terms:
            if len(alpha) != self.nvars or any(a < 0 for a in alpha):
                raise ValueError(f"bad multi-index {alpha} for {self.nvars} variables")
            if not np.isfinite(c):
                raise ValueError("polynomial coefficients must be finite")

    @classmethod
    def from_pairs(cls, nvars: int, pairs) -> "Polynomial":
        terms = []
        for pair in pairs:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValueError(f"term must be [multi-index, coefficient], got {pair!r}")
            alpha, c = pair
            terms.append((tuple(int(a) for a in alpha), parse_complex(c)))
        return cls(nvars, tuple(terms))

    @property
    def is_real(self) -> bool:
        return all(complex(c).imag == 0 for _, c in self.terms)

    def coefficient_map(self) -> dict[tuple[int, ...], complex]:
        out: dict[tuple[int, ...], complex] = {}
        for alpha, c in self.terms:
            out[alpha] = out.get(alpha, 0) + complex(c)
        return {a: c for a, c in out.items() if c != 0}

    def conjugate(self) -> "Polynomial":
        return Polynomial(self.nvars, tuple((a, complex(c).conjugate()) for a, c in self.terms))

    def evaluate(self, coords: Sequence[Jet2]) -> Jet2:
        total = Jet2.constant(0.0, coords[0].dim)
        powers: dict[tuple[int, int], Jet2] = {}
        for alpha, c in self.terms:
            c = complex(c)
            term: Jet2 | complex = c.real if c.imag == 0 else c
            for k, a in enumerate(alpha):
                if a:
                    if (k, a) not in powers:
                        powers[(k, a)] = coords[k] ** a
                    term = powers[(k, a)] * term
            total = total + term
        return total

    def to_json(self) -> list:
        out = []
        for alpha, c in self.terms:
            c = complex(c)
            out.append([list(alpha), c.real if c.imag == 0 else complex_pair(c)])
        return out


def _quadric(params, x):
    n = len(x) // 2
    if len(params) != n - 1:
        raise ValueError(f"quadric in dimension {n} needs {n - 1} parameters, got {len(params)}")
    r = math.sqrt(2.0) * x[2 * n - 1]
    for j, lam in enumerate(params):
        r = r + lam * (x[2 * j] * x[2 * j] + x[2 * j + 1] * x[2 * j + 1])
    return r


def _radius(params) -> float:
    if len(params) > 1:
        raise ValueError("sphere/shell take at most one parameter (the radius)")
    radius = float(params[0]) if params else 1.0
    if radius <= 0:
        raise ValueError("radius must be positive")
    return radius


def _sphere(params, x):
    radius = _radius(params)
    return sum((xi * xi for xi in x[1:]), x[0] * x[0]) - radius**2


def _shell(params, x):
    return -_sphere(params, x)


_BUILTIN_EXPR = {"quadric": _quadric, "sphere": _sphere, "shell": _shell}


@dataclass(frozen=True)
class DefiningFunctionSpec:
    """A real defining function: a builtin model or a real polynomial in ``2n`` variables.

    Builtins: ``quadric`` (params = Levi eigenvalues) is
    ``sqrt(2) x_2n + sum lambda_j |z_j|^2``; ``sphere`` (params = [R], default 1)
    is ``|z|^2 - R^2``; ``shell`` is ``R^2 - |z|^2``.
    """

    n: int
    kind: str
    name: str | None = None
    params: tuple[float, ...] = ()
    polynomial: Polynomial | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("complex dimension n must be at least 2")
        if self.kind == "builtin":
            if self.name not in BUILTINS:
                raise ValueError(f"unknown builtin {self.name!r}; expected one of {BUILTINS}")
            if not all(np.isfinite(self.params)):
                raise ValueError("builtin parameters must be finite")
            # raises on bad parameter counts
            _BUILTIN_EXPR[self.name](self.params, [0.0] * (2 * self.n))
        elif self.kind == "polynomial":
            if self.polynomial is None or self.polynomial.nvars != 2 * self.n:
                raise ValueError("polynomial defining function needs terms in 2n variables")
            if not self.polynomial.is_real:
                raise ValueError("defining function must have real coefficients")
        else:
            raise ValueError(f"kind must be 'builtin' or 'polynomial', got {self.kind!r}")

    @classmethod
    def builtin(cls, name: str, params: Sequence[float] = (), n: int | None = None) -> "DefiningFunctionSpec":
        params = tuple(float(p) for p in params)
        if n is None:
            if name != "quadric":
                raise ValueError("n is required for sphere/shell")
            n = len(params) + 1
        return cls(n=n, kind="builtin", name=name, params=params)

    @classmethod
    def from_polynomial(cls, n: int, pairs) -> "DefiningFunctionSpec":
        return cls(n=n, kind="polynomial", polynomial=Polynomial.from_pairs(2 * n, pairs))

    @classmethod
    def from_json(cls, data: dict) -> "DefiningFunctionSpec":
        if not isinstance(data, dict):
            raise ValueError("defining function must be a JSON object")
        kind = data.get("kind")
        n = data.get("n")
        if kind == "builtin":
            name = data.get("name")
            params = data.get("params", [])
            if n is None and name == "quadric":
                n = len(params) + 1
            if not isinstance(n, int):
                raise ValueError("defining function needs an integer 'n'")
            return cls(n=n, kind="builtin", name=name, params=tuple(float(p) for p in params))
        if not isinstance(n, int):
            raise ValueError("defining function needs an integer 'n'")
        return cls.from_polynomial(n, data.get("terms", []))

    def to_json(self) -> dict:
        if self.kind == "builtin":
            return {"n": self.n, "kind": "builtin", "name": self.name, "params": list(self.params)}
        return {"n": self.n, "kind": "polynomial", "terms": self.polynomial.to_json()}

    def evaluate(self, coords: Sequence[Jet2]):
        if self.kind == "builtin":
            return _BUILTIN_EXPR[self.name](self.params, coords)
        return self.polynomial.evaluate(coords)


@dataclass(frozen=True)
class MetricSpec:
    """Hermitian metric ``g_jk = (d/dz_j | d/dz_k)``; ``entries=None`` means euclidean."""

    n: int
    entries: tuple[tuple[Polynomial, ...], ...] | None = None

    def __post_init__(self):
        if self.entries is None:
            return
        if len(self.entries) != self.n or any(len(row) != self.n for row in self.entries):
            raise ValueError("metric entries must form an n x n array")
        for j, k in itertools.product(range(self.n), repeat=2):
            a = self.entries[j][k].coefficient_map()
            b = self.entries[k][j].conjugate().coefficient_map()
            keys = set(a) | set(b)
            if any(abs(a.get(key, 0) - b.get(key, 0)) > 1e-14 for key in keys):
                raise ValueError(f"metric is not Hermitian at entry ({j + 1},{k + 1})")

    @classmethod
    def euclidean(cls, n: int) -> "MetricSpec":
        return cls(n)

    @classmethod
    def from_json(cls, data, n: int) -> "MetricSpec":
        if data is None or data == "euclidean":
            return cls(n)
        if not isinstance(data, dict):
            raise ValueError("metric must be 'euclidean' or a JSON object")
        if data.get("kind", "euclidean") == "euclidean":
            return cls(data.get("n", n))
        mn = data.get("n", n)
        rows = data.get("entries")
        if not isinstance(rows, list):
            raise ValueError("polynomial metric needs 'entries'")
        entries = tuple(tuple(Polynomial.from_pairs(2 * mn, cell) for cell in row) for row in rows)
        return cls(mn, entries)

    def to_json(self):
        if self.entries is None:
            return {"n": self.n, "kind": "euclidean"}
        return {
            "n": self.n,
            "kind": "polynomial",
            "entries": [[cell.to_json() for cell in row] for row in self.entries],
        }

    def matrix(self, p) -> np.ndarray:
        return self.matrix_with_derivatives(p)[0]

    def matrix_with_derivatives(self, p) -> tuple[np.ndarray, np.ndarray]:
        """``g(p)`` and ``dg[a] = d g / d x_a`` at ``p``; checks positivity."""
        p = np.asarray(p, dtype=float)
        dim = 2 * self.n
        if len(p) != dim:
            raise ValueError(f"point has length {len(p)}, expected {dim}")
        if self.entries is None:
            g = np.eye(self.n, dtype=complex)
            dg = np.zeros((dim, self.n, self.n), dtype=complex)
        else:
            coords = Jet2.coordinates(p)
            g = np.empty((self.n, self.n), dtype=complex)
            dg = np.empty((dim, self.n, self.n), dtype=complex)
            for j, k in itertools.product(range(self.n), repeat=2):
                jet = self.entries[j][k].evaluate(coords)
                g[j, k] = jet.value
                dg[:, j, k] = jet.gradient
        if np.linalg.eigvalsh(0.5 * (g + g.conj().T))[0] <= 0:
            raise MetricError(f"metric is not positive definite at {p.tolist()}")
        return g, dg


def realification(n: int) -> np.ndarray:
    """The ``n x 2n`` matrix sending a real vector to its ``(1,0)`` coefficients."""
    c = np.zeros((n, 2 * n), dtype=complex)
    for j in range(n):
        c[j, 2 * j] = 1.0
        c[j, 2 * j + 1] = 1j
    return c


def real_metric(g: np.ndarray) -> np.ndarray:
    c = realification(len(g))
    return 2.0 * np.real(c.T @ g @ c.conj())


def real_components(u: np.ndarray) -> np.ndarray:
    """Real-coordinate components of ``sum u_j d/dz_j``."""
    out = np.empty(2 * len(u), dtype=complex)
    out[0::2] = 0.5 * u
    out[1::2] = -0.5j * u
    return out


def dz_components(grad: np.ndarray) -> np.ndarray:
    """Coefficients of ``d r = sum (dr/dz_j) dz_j + ...``: ``(d_odd - i d_even)/2``."""
    return 0.5 * (grad[0::2] - 1j * grad[1::2])


def cotangent_norm(covector: np.ndarray, g: np.ndarray) -> float:
    h = real_metric(g)
    return math.sqrt(float(covector @ np.linalg.solve(h, covector)))


def eval_jet2(f: DefiningFunctionSpec | Polynomial, p) -> Jet2:
    """Exact value, gradient and Hessian of ``f`` at ``p``."""
    p = np.asarray(p, dtype=float)
    nvars = 2 * f.n if isinstance(f, DefiningFunctionSpec) else f.nvars
    if p.shape != (nvars,):
        raise ValueError(f"point has shape {p.shape}, expected ({nvars},)")
    coords = Jet2.coordinates(p)
    out = f.evaluate(coords)
    if not isinstance(out, Jet2):
        out = Jet2.constant(out, nvars)
    hess = 0.5 * (out.hessian + out.hessian.T)
    return Jet2(out.value, out.gradient, hess)


@dataclass(frozen=True, eq=False)
class NormalizedJet:
    """Jet of ``scale * r`` with ``scale = 1/|dr(p)|`` frozen at ``p``."""

    jet: Jet2
    scale: float
    point: np.ndarray
    metric_matrix: np.ndarray


def normalize_defining(
    f: DefiningFunctionSpec, metric: MetricSpec, p, tol: Tolerances = DEFAULT_TOLERANCES
) -> NormalizedJet:
    raw = eval_jet2(f, p)
    g = metric.matrix(p)
    norm = cotangent_norm(raw.gradient, g)
    if norm <= tol.zero:
        raise DegenerateBoundary(f"|dr| = {norm:.3e} at {np.asarray(p).tolist()}")
    scale = 1.0 / norm
    return NormalizedJet(raw * scale, scale, np.asarray(p, dtype=float), g)


def contact_form(jet: Jet2) -> np.ndarray:
    """``omega_0 = J^t(dr)`` with ``J^t dx_{2j-1} = -dx_{2j}`` and ``J^t dx_{2j} = dx_{2j-1}``."""
    d = np.asarray(jet.gradient, dtype=float)
    out = np.empty_like(d)
    out[0::2] = d[1::2]
    out[1::2] = -d[0::2]
    return out


def _contact_matrix(dim: int) -> np.ndarray:
    m = np.zeros((dim, dim))
    for j in range(0, dim, 2):
        m[j, j + 1] = 1.0
        m[j + 1, j] = -1.0
    return m


def tangent_frame_from(seeds: np.ndarray, grad: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Project ``seeds`` onto ``ker(dr) ∩ (1,0)`` and orthonormalize in ``g``, in order.

    Rows of the result are ``(1,0)``-vectors in the ``d/dz`` basis. At most
    ``n-1`` vectors are kept; near-dependent seeds are skipped.
    """
    n = len(g)
    dr = dz_components(grad)
    normal = np.linalg.solve(g, dr).conj()

    def inner(u, v):
        return u @ g @ v.conj()

    nn = inner(normal, normal).real
    frame: list[np.ndarray] = []
    for seed in seeds:
        v = np.asarray(seed, dtype=complex)
        v = v - inner(v, normal) / nn * normal
        for e in frame:
            v = v - inner(v, e) * e
        length = math.sqrt(max(inner(v, v).real, 0.0))
        if length < FRAME_SKIP:
            continue
        frame.append(v / length)
        if len(frame) == n - 1:
            break
    return np.array(frame, dtype=complex).reshape(len(frame), n)


def holomorphic_tangent_frame(nj: NormalizedJet) -> tuple[np.ndarray, np.ndarray]:
    """Frame of the holomorphic tangent space at the jet's point and its Gram matrix."""
    g = nj.metric_matrix
    n = len(g)
    frame = tangent_frame_from(np.eye(n), nj.jet.gradient, g)
    if len(frame) != n - 1:
        raise DegenerateBoundary("could not extract n-1 tangent directions")
    gram = frame @ g @ frame.conj().T
    return frame, gram


@dataclass(frozen=True, eq=False)
class LeviData:
    frame: np.ndarray
    levi_matrix: np.ndarray
    gram: np.ndarray
    eigenvalues: np.ndarray
    signature: tuple[int, int]
    omega0: np.ndarray
    scale: float
    point: np.ndarray = field(repr=False)
    tol_zero: float = DEFAULT_TOLERANCES.zero

    @property
    def n(self) -> int:
        return len(self.omega0) // 2

    @property
    def degenerate(self) -> bool:
        return sum(self.signature) < self.n - 1

    def to_json(self) -> dict:
        return {
            "point": self.point.tolist(),
            "scale": self.scale,
            "omega0": self.omega0.tolist(),
            "frame": [[complex_pair(v) for v in row] for row in self.frame],
            "gram": [[complex_pair(v) for v in row] for row in self.gram],
            "levi_matrix": [[complex_pair(v) for v in row] for row in self.levi_matrix],
            "eigenvalues": self.eigenvalues.tolist(),
            "signature": {"n_minus": self.signature[0], "n_plus": self.signature[1]},
            "degenerate": self.degenerate,
        }


def signature_of(eigenvalues, tol_zero: float = DEFAULT_TOLERANCES.zero) -> tuple[int, int]:
    lam = np.asarray(eigenvalues, dtype=float)
    return int(np.sum(lam < -tol_zero)), int(np.sum(lam > tol_zero))


def levi_matrix_from_hessian(frame: np.ndarray, hessian: np.ndarray) -> np.ndarray:
    """Levi matrix ``-(1/2i) <Z_j ^ conj(Z_k), d omega_0>`` from the Hessian of normalized ``r``.

    With ``omega_0 = M dr`` the exterior derivative has coefficients
    ``Omega = H M^T - M H``. Only tangential directions are paired, so the
    scale of ``r`` away from the point does not enter.
    """
    dim = len(hessian)
    m = _contact_matrix(dim)
    omega = hessian @ m.T - m @ hessian
    z = np.array([real_components(u) for u in frame])
    return -(z @ omega @ z.conj().T) / 2j


def levi_form(
    f: DefiningFunctionSpec, metric: MetricSpec, p, tol: Tolerances = DEFAULT_TOLERANCES
) -> LeviData:
    nj = normalize_defining(f, metric, p, tol)
    if abs(nj.jet.value) > tol.surface:
        raise NotOnBoundary(f"|r(p)| = {abs(nj.jet.value):.3e} exceeds {tol.surface:.1e}")
    frame, gram = holomorphic_tangent_frame(nj)
    levi = levi_matrix_from_hessian(frame, nj.jet.hessian)
    size = max(float(np.max(np.abs(levi), initial=0.0)), 1.0)
    if np.max(np.abs(levi - levi.conj().T), initial=0.0) > tol.herm * size:
        raise ArithmeticError("computed Levi matrix is not Hermitian")
    levi = 0.5 * (levi + levi.conj().T)
    gram = 0.5 * (gram + gram.conj().T)
    eig = scipy.linalg.eigh(levi, gram, eigvals_only=True)[::-1].copy()
    return LeviData(
        frame=frame,
        levi_matrix=levi,
        gram=gram,
        eigenvalues=eig,
        signature=signature_of(eig, tol.zero),
        omega0=contact_form(nj.jet),
        scale=nj.scale,
        point=nj.point,
        tol_zero=tol.zero,
    )


def _nondegenerate(eigenvalues, q: int, tol_zero: float) -> tuple[np.ndarray, int]:
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(np.abs(lam) <= tol_zero):
        raise DegenerateLevi(f"Levi eigenvalues {lam.tolist()} include a zero within {tol_zero:.1e}")
    n = len(lam) + 1
    if not 0 <= q <= n - 1:
        raise ValueError(f"form degree q={q} outside 0..{n - 1}")
    return lam, n


def condition_Y(eigenvalues, q: int, tol_zero: float = DEFAULT_TOLERANCES.zero) -> bool:
    """Subset inequality over all q-subsets; cross-checked against ``q not in {n-, n+}``."""
    lam, n = _nondegenerate(eigenvalues, q, tol_zero)
    holds = True
    for subset in itertools.combinations(range(n - 1), q):
        inside = set(subset)
        # sum|l| -+ (out - in) split into non-negative terms, so equality is exact
        below = math.fsum(abs(v) - v if j not in inside else abs(v) + v for j, v in enumerate(lam))
        above = math.fsum(abs(v) + v if j not in inside else abs(v) - v for j, v in enumerate(lam))
        if not (below > 0 and above > 0):
            holds = False
            break
    n_minus, n_plus = signature_of(lam, tol_zero)
    if holds != (q not in (n_minus, n_plus)):
        raise ArithmeticError("condition Y disagrees with the signature rule")
    return holds


def condition_Z(eigenvalues, q: int, tol_zero: float = DEFAULT_TOLERANCES.zero) -> bool:
    """At least ``n-q`` positive or at least ``q+1`` negative eigenvalues."""
    lam, n = _nondegenerate(eigenvalues, q, tol_zero)
    positive = int(np.sum(lam > 0))
    negative = int(np.sum(lam < 0))
    holds = positive >= n - q or negative >= q + 1
    if holds != (q != negative):
        raise ArithmeticError("condition Z disagrees with the signature rule")
    return holds


def gamma_q_membership(
    f: DefiningFunctionSpec, metric: MetricSpec, p, q: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> bool:
    """Whether condition Z(q) fails at ``p``."""
    data = levi_form(f, metric, p, tol)
    return not condition_Z(data.eigenvalues, q, tol.zero)
