"""Exterior algebra on (0,q)-forms over an orthonormal coframe ``e_1..e_m``.

The basis of degree-q forms is the list of q-subsets of ``{1..m}`` in
lexicographic order; ``e_J = e_{j1} ^ ... ^ e_{jq}`` with ``j1 < ... < jq``.
Degrees outside ``0..m`` give the zero space, which keeps compositions such
as ``e_j^ e_j^`` well defined at the top degree.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .serialize import complex_matrix, parse_complex_matrix


@dataclass(frozen=True)
class FormBasis:
    m: int
    q: int

    @cached_property
    def subsets(self) -> tuple[tuple[int, ...], ...]:
        if not 0 <= self.q <= self.m:
            return ()
        return tuple(itertools.combinations(range(1, self.m + 1), self.q))

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {s: k for k, s in enumerate(self.subsets)}

    @property
    def dim(self) -> int:
        return len(self.subsets)

    def label(self, k: int) -> str:
        s = self.subsets[k]
        return "1" if not s else "^".join(f"e{j}" for j in s)


@dataclass(frozen=True, eq=False)
class FormOperator:
    """Linear map between form spaces; ``entries`` has shape (dim out, dim in)."""

    basis_in: FormBasis
    basis_out: FormBasis
    entries: np.ndarray

    def __post_init__(self):
        shape = (self.basis_out.dim, self.basis_in.dim)
        if self.entries.shape != shape:
            raise ValueError(f"entries have shape {self.entries.shape}, expected {shape}")

    @classmethod
    def zeros(cls, m: int, q_in: int, q_out: int) -> "FormOperator":
        bi, bo = FormBasis(m, q_in), FormBasis(m, q_out)
        return cls(bi, bo, np.zeros((bo.dim, bi.dim), dtype=complex))

    @classmethod
    def identity(cls, m: int, q: int) -> "FormOperator":
        b = FormBasis(m, q)
        return cls(b, b, np.eye(b.dim, dtype=complex))

    @property
    def m(self) -> int:
        return self.basis_in.m

    def _check_same(self, other: "FormOperator"):
        if self.basis_in != other.basis_in or self.basis_out != other.basis_out:
            raise ValueError("operators act between different form spaces")

    def __matmul__(self, other: "FormOperator") -> "FormOperator":
        if other.basis_out != self.basis_in:
            raise ValueError("composition of operators with mismatched degrees")
        return FormOperator(other.basis_in, self.basis_out, self.entries @ other.entries)

    def __add__(self, other: "FormOperator") -> "FormOperator":
        self._check_same(other)
        return FormOperator(self.basis_in, self.basis_out, self.entries + other.entries)

    def __sub__(self, other: "FormOperator") -> "FormOperator":
        self._check_same(other)
        return FormOperator(self.basis_in, self.basis_out, self.entries - other.entries)

    def __mul__(self, c) -> "FormOperator":
        return FormOperator(self.basis_in, self.basis_out, self.entries * c)

    __rmul__ = __mul__

    def __neg__(self) -> "FormOperator":
        return self * -1

    @property
    def adjoint(self) -> "FormOperator":
        return FormOperator(self.basis_out, self.basis_in, self.entries.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def rank(self, tol: float = 1e-12) -> int:
        if self.entries.size == 0:
            return 0
        return int(np.linalg.matrix_rank(self.entries, tol=tol))

    def allclose(self, other: "FormOperator", atol: float = 1e-12) -> bool:
        self._check_same(other)
        return bool(np.allclose(self.entries, other.entries, rtol=0, atol=atol))

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "q_in": self.basis_in.q,
            "q_out": self.basis_out.q,
            "entries": complex_matrix(self.entries),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FormOperator":
        bi, bo = FormBasis(data["m"], data["q_in"]), FormBasis(data["m"], data["q_out"])
        entries = parse_complex_matrix(data["entries"], (bo.dim, bi.dim))
        return cls(bi, bo, entries)

    def table(self) -> list[dict]:
        """One row per matrix entry, for CSV export."""
        rows = []
        for i, j in itertools.product(range(self.basis_out.dim), range(self.basis_in.dim)):
            z = complex(self.entries[i, j])
            rows.append(
                {"row": self.basis_out.label(i), "col": self.basis_in.label(j), "re": z.real, "im": z.imag}
            )
        return rows


def _check_index(j: int, m: int):
    if not 1 <= j <= m:
        raise IndexError(f"coframe index {j} outside 1..{m}")


def _check_degree(q: int, m: int):
    if not 0 <= q <= m:
        raise IndexError(f"form degree {q} outside 0..{m}")


def wedge_op(j: int, m: int, q: int) -> FormOperator:
    """``e_j^``: degree q to q+1, sign of the permutation sorting ``(j, J)``."""
    _check_index(j, m)
    _check_degree(q, m)
    op = FormOperator.zeros(m, q, q + 1)
    for col, subset in enumerate(op.basis_in.subsets):
        if j in subset:
            continue
        sign = -1 if sum(1 for k in subset if k < j) % 2 else 1
        row = op.basis_out.index[tuple(sorted(subset + (j,)))]
        op.entries[row, col] = sign
    return op


def interior_op(j: int, m: int, q: int) -> FormOperator:
    """``e_j^{^,*}``: degree q to q-1, the adjoint of ``e_j^`` on degree q-1."""
    _check_index(j, m)
    _check_degree(q, m)
    if q == 0:
        return FormOperator.zeros(m, 0, -1)
    return wedge_op(j, m, q - 1).adjoint


def projection_operator(subset, m: int, q: int) -> FormOperator:
    """``prod_{j in S} e_j^ e_j^{^,*}``: diagonal, 1 on ``e_J`` exactly when ``S ⊆ J``."""
    s = set(subset)
    if not s <= set(range(1, m + 1)):
        raise IndexError(f"subset {sorted(s)} not contained in 1..{m}")
    _check_degree(q, m)
    b = FormBasis(m, q)
    diag = np.array([1.0 if s <= set(J) else 0.0 for J in b.subsets], dtype=complex)
    return FormOperator(b, b, np.diag(diag))


def covector_wedge(w, q: int) -> FormOperator:
    """``w^ = sum_j w_j e_j^`` on degree q, linear in ``w``."""
    w = np.asarray(w, dtype=complex)
    m = len(w)
    op = FormOperator.zeros(m, q, q + 1)
    if not 0 <= q <= m:
        return op
    for j, wj in enumerate(w, start=1):
        if wj != 0:
            op = op + wedge_op(j, m, q) * wj
    return op


def covector_interior(w, q: int) -> FormOperator:
    """``w^{^,*}``: degree q to q-1, antilinear in ``w``."""
    w = np.asarray(w, dtype=complex)
    m = len(w)
    op = FormOperator.zeros(m, q, q - 1)
    if not 0 <= q <= m:
        return op
    for j, wj in enumerate(w, start=1):
        if wj != 0:
            op = op + interior_op(j, m, q) * np.conj(wj)
    return op


@dataclass(frozen=True, eq=False)
class WedgePair:
    wedge: FormOperator
    interior: FormOperator


def scaled_wedge_pair(w, q: int) -> WedgePair:
    """``w^`` on degree q and its adjoint ``w^{^,*}`` on degree q+1.

    ``w`` holds the coefficients of a (0,1)-covector in the orthonormal
    coframe; for ambient forms the last slot is the coefficient along the
    unit normal ``dbar r / |dbar r|``.
    """
    return WedgePair(covector_wedge(w, q), covector_interior(w, q + 1))


def anticommutator(w, v, q: int) -> FormOperator:
    """``w^ v^{^,*} + v^{^,*} w^`` on degree q; equals ``(w|v) Id`` by the CAR."""
    w = np.asarray(w, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if len(w) != len(v):
        raise ValueError("covectors live in coframes of different size")
    m = len(w)
    first = covector_wedge(w, q - 1) @ covector_interior(v, q) if q >= 1 else FormOperator.zeros(m, q, q)
    second = covector_interior(v, q + 1) @ covector_wedge(w, q) if q < m else FormOperator.zeros(m, q, q)
    return first + second


def embed_boundary_forms(m_boundary: int, q: int) -> FormOperator:
    """Inclusion of boundary forms (coframe ``1..m``) into ambient forms (coframe ``1..m+1``)."""
    inner = FormBasis(m_boundary, q)
    outer = FormBasis(m_boundary + 1, q)
    entries = np.zeros((outer.dim, inner.dim), dtype=complex)
    for col, subset in enumerate(inner.subsets):
        entries[outer.index[subset], col] = 1.0
    return FormOperator(inner, outer, entries)


def dimension(m: int, q: int) -> int:
    return math.comb(m, q) if 0 <= q <= m else 0
