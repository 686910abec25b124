"""Second-order forward-mode automatic differentiation.

A ``Jet2`` carries the value, gradient and Hessian of a function at a fixed
point. Arithmetic on jets propagates all three exactly, so evaluating an
expression on coordinate jets yields its exact second-order Taylor data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True, eq=False)
class Jet2:
    value: complex | float
    gradient: np.ndarray
    hessian: np.ndarray

    @classmethod
    def constant(cls, c, dim: int) -> "Jet2":
        return cls(c, np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def variable(cls, index: int, point) -> "Jet2":
        """Jet of the coordinate function ``x[index]`` at ``point``."""
        dim = len(point)
        grad = np.zeros(dim)
        grad[index] = 1.0
        return cls(float(point[index]), grad, np.zeros((dim, dim)))

    @classmethod
    def coordinates(cls, point) -> list["Jet2"]:
        return [cls.variable(k, point) for k in range(len(point))]

    @property
    def dim(self) -> int:
        return len(self.gradient)

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(other, self.dim)

    def __add__(self, other) -> "Jet2":
        o = self._lift(other)
        return Jet2(self.value + o.value, self.gradient + o.gradient, self.hessian + o.hessian)

    __radd__ = __add__

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __sub__(self, other) -> "Jet2":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Jet2":
        return self._lift(other) - self

    def __mul__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            return Jet2(self.value * other, self.gradient * other, self.hessian * other)
        a, b = self, other
        cross = np.outer(a.gradient, b.gradient)
        return Jet2(
            a.value * b.value,
            a.value * b.gradient + b.value * a.gradient,
            a.value * b.hessian + b.value * a.hessian + cross + cross.T,
        )

    __rmul__ = __mul__

    def apply(self, f0, f1, f2) -> "Jet2":
        """Chain rule for a scalar function with value ``f0`` and derivatives ``f1``, ``f2`` at ``self.value``."""
        g = self.gradient
        return Jet2(f0, f1 * g, f1 * self.hessian + f2 * np.outer(g, g))

    def __pow__(self, k: int) -> "Jet2":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if k == 0:
            return Jet2.constant(1.0, self.dim)
        v = self.value
        f1 = k * v ** (k - 1)
        f2 = k * (k - 1) * v ** (k - 2) if k >= 2 else 0.0
        return self.apply(v**k, f1, f2)

    def reciprocal(self) -> "Jet2":
        v = self.value
        if v == 0:
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet2":
        return self.reciprocal() * other

    def sqrt(self) -> "Jet2":
        s = math.sqrt(self.value)
        return self.apply(s, 0.5 / s, -0.25 / s**3)

    def scaled(self, c: float) -> "Jet2":
        return self * c


def jet_of(fn: Callable[[list[Jet2]], Jet2], point) -> Jet2:
    """Evaluate ``fn`` on coordinate jets at ``point``; constants are lifted."""
    point = np.asarray(point, dtype=float)
    out = fn(Jet2.coordinates(point))
    if not isinstance(out, Jet2):
        out = Jet2.constant(out, len(point))
    return out
