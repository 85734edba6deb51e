"""Invariant pairing, Maurer-Cartan values and the Cartan 3-form on GL(n).

All evaluators accept plain arrays or :class:`~microlocal.linalg.dual.Dual`
values, so they can be differentiated along the base point.
"""

from __future__ import annotations

from itertools import permutations

from ..linalg.dual import inv, tr


def pairing(x, y):
    """The trace form ``(x, y) = tr(xy)`` on gl(n)."""
    return tr(x @ y)


def theta_left(g, x):
    return inv(g) @ x


def theta_right(g, x):
    return x @ inv(g)


def wedge_pair(alpha_x, alpha_y, beta_x, beta_y):
    """``(alpha, beta)(X, Y) = (alpha(X), beta(Y)) - (alpha(Y), beta(X))``."""
    return pairing(alpha_x, beta_y) - pairing(alpha_y, beta_x)


def _sign(perm):
    s = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def cartan_eta(g, x, y, z):
    """``eta = (1/12) (theta^L, [theta^L, theta^L])`` evaluated on three tangents at ``g``.

    The 3-form evaluation is the signed sum over all six orderings.
    """
    g_inv = inv(g)
    vals = (g_inv @ x, g_inv @ y, g_inv @ z)
    total = 0
    for perm in permutations(range(3)):
        p, r, s = (vals[k] for k in perm)
        total = total + _sign(perm) * pairing(p, r @ s - s @ r)
    return total / 12
