"""Forward-mode differentiation with matrix-valued dual numbers.

A :class:`Dual` carries a value and a first-order perturbation, ``value + eps * der``
with ``eps**2 == 0``.  Both parts may be complex ndarrays, scalars, or Duals
themselves; nesting gives exact higher directional derivatives, which the 2-form
evaluators need (their coefficients already contain first derivatives of moment
maps).

Code that should run on both plain arrays and Duals uses the module-level
helpers :func:`inv`, :func:`tr`, :func:`eye_like` instead of numpy directly.
"""

from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("val", "der")
    # numpy must defer to our reflected operators (ndarray @ Dual).
    __array_ufunc__ = None

    def __init__(self, val, der):
        self.val = val
        self.der = der

    def __repr__(self):
        return f"Dual({self.val!r}, {self.der!r})"

    @property
    def shape(self):
        return np.shape(_base(self))

    @property
    def T(self):
        return Dual(self.val.T, self.der.T)

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.der + self.der * other.val)
        return Dual(self.val * other, self.der * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * reciprocal(other)
        return Dual(self.val / other, self.der / other)

    def __rtruediv__(self, other):
        return other * reciprocal(self)

    def __matmul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val @ other.val, self.val @ other.der + self.der @ other.val)
        return Dual(self.val @ other, self.der @ other)

    def __rmatmul__(self, other):
        return Dual(other @ self.val, other @ self.der)


def _base(x):
    while isinstance(x, Dual):
        x = x.val
    return x


def value(x):
    """Strip every dual layer and return the underlying array."""
    return _base(x)


def reciprocal(x):
    if isinstance(x, Dual):
        r = reciprocal(x.val)
        return Dual(r, -(r * x.der * r))
    return 1.0 / x


def inv(x):
    """Matrix inverse; d(X^{-1}) = -X^{-1} dX X^{-1}."""
    if isinstance(x, Dual):
        xi = inv(x.val)
        return Dual(xi, -(xi @ x.der @ xi))
    return np.linalg.inv(x)


def tr(x):
    if isinstance(x, Dual):
        return Dual(tr(x.val), tr(x.der))
    return np.trace(x)


def eye_like(x):
    n = np.shape(_base(x))[0]
    return np.eye(n, dtype=complex)


def lift(point, tangent):
    """Attach a tangent direction to every block of a point."""
    return tuple(Dual(p, t) for p, t in zip(point, tangent))


def derivative(x):
    """The first-order part of a Dual result (zero for constants)."""
    if isinstance(x, Dual):
        return x.der
    return np.zeros_like(np.asarray(_base(x)))


def directional(f, point, tangent):
    """Directional derivative of ``f`` (blocks -> array or list of arrays) at ``point``."""
    out = f(lift(point, tangent))
    if isinstance(out, (list, tuple)):
        return [derivative(o) for o in out]
    return derivative(out)
