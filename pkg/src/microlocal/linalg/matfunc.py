"""Primary matrix functions by blocked Schur-Parlett.

The complex Schur form is reordered so that clustered eigenvalues are
contiguous, each diagonal block is evaluated by a Taylor expansion about its
mean eigenvalue, and the off-diagonal blocks follow from the Parlett recurrence
(one Sylvester solve per block pair).  Clustering keeps Sylvester equations
well conditioned and lets non-diagonalizable input through.

A :class:`FunctionSpec` supplies the scalar function and its Taylor
coefficients about an arbitrary centre.  Ready-made specs: :data:`EXP`,
:func:`exp_spec`, :data:`PHI` (``(exp(2 pi i z) - 1)/z``) and :data:`LOG_ARG0_2PI`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .core import DEFAULT_TOL, LinAlgError, ToleranceConfig, as_matrix, rel_diff

TWO_PI_I = 2j * math.pi
CLUSTER_DELTA = 0.1
PHI_SERIES_RADIUS = 1e-3
_EPS = np.finfo(float).eps


class BranchCutError(LinAlgError):
    """An eigenvalue sits on (or too close to) the logarithm's branch cut."""


class BranchCutWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FunctionSpec:
    """A scalar function together with its Taylor coefficients.

    ``taylor(sigma, k)`` returns ``[f(sigma), f'(sigma), f''(sigma)/2, ...]`` (k
    entries).  ``key`` maps eigenvalues to the coordinate used for clustering;
    functions with a branch cut use it to keep the two sides apart.
    ``domain_check`` raises if the function is undefined at an eigenvalue.
    ``centre_value(sigma, keys)`` overrides ``f(sigma)`` for a block centre so a
    branch function stays on the branch of the cluster members.
    """

    name: str
    scalar: Callable[[complex], complex]
    taylor: Callable[[complex, int], np.ndarray]
    key: Callable[[complex], complex] = field(default=lambda z: z)
    domain_check: Callable[[complex], None] | None = None
    centre_value: Callable[[complex, np.ndarray], complex] | None = None


# --- exp ---------------------------------------------------------------------

def exp_spec(c: complex = 1.0) -> FunctionSpec:
    """``z -> exp(c z)``."""
    c = complex(c)

    def taylor(sigma, k):
        out = np.empty(k, dtype=complex)
        term = np.exp(c * sigma)
        for j in range(k):
            out[j] = term
            term = term * c / (j + 1)
        return out

    return FunctionSpec(name=f"exp({c}*z)", scalar=lambda z: complex(np.exp(c * z)), taylor=taylor)


EXP = exp_spec(1.0)


# --- phi -----------------------------------------------------------------------

def phi_scalar(z: complex) -> complex:
    """``(exp(2 pi i z) - 1)/z`` with the removable singularity filled in (phi(0) = 2 pi i)."""
    z = complex(z)
    if abs(z) < PHI_SERIES_RADIUS:
        # sum_{m>=1} (2 pi i)^m z^(m-1) / m!
        total, term = 0j, 1.0 + 0j
        for m in range(1, 16):
            term = term * TWO_PI_I / m
            total += term * z ** (m - 1)
        return total
    return complex(np.expm1(TWO_PI_I * z) / z)


def phi_taylor(sigma: complex, k: int) -> np.ndarray:
    """Taylor coefficients of phi about ``sigma``.

    phi(z) = 2 pi i * int_0^1 exp(2 pi i z t) dt, so the k-th coefficient is
    (2 pi i)^(k+1)/k! * I_k with I_k = int_0^1 t^k exp(w t) dt, w = 2 pi i sigma.
    I_k is summed from whichever series has no sign cancellation.
    """
    w = TWO_PI_I * complex(sigma)
    out = np.empty(k, dtype=complex)
    nterms = int(abs(w)) + 60
    if w.real >= 0:
        # I_k = sum_j w^j / (j! (k+j+1))
        powers = np.empty(nterms, dtype=complex)
        powers[0] = 1.0
        for j in range(1, nterms):
            powers[j] = powers[j - 1] * w / j
        coef = TWO_PI_I  # (2 pi i)^(k+1) / k!
        for kk in range(k):
            denom = kk + 1 + np.arange(nterms)
            out[kk] = coef * np.sum(powers / denom)
            coef = coef * TWO_PI_I / (kk + 1)
    else:
        # I_k = e^w k! sum_j (-w)^j / (k+j+1)!
        ew = np.exp(w)
        coef = TWO_PI_I  # (2 pi i)^(k+1) / (k+1)!
        for kk in range(k):
            total, term = 0j, 1.0 + 0j
            for j in range(nterms):
                total += term
                term = term * (-w) / (kk + j + 2)
            out[kk] = ew * coef * total
            coef = coef * TWO_PI_I / (kk + 2)
    return out


PHI = FunctionSpec(name="phi", scalar=phi_scalar, taylor=phi_taylor)


# --- log with arg in [0, 2 pi) -------------------------------------------------

def _arg_0_2pi(z: complex, snap: float) -> float:
    """Argument in [0, 2 pi); points within ``snap`` (relative) below the positive axis get 0."""
    if z.real > 0 and abs(z.imag) <= snap * abs(z):
        return 0.0
    a = math.atan2(z.imag, z.real)
    return a + 2 * math.pi if a < 0 else a


def log_spec(snap: float = DEFAULT_TOL.rank_tol) -> FunctionSpec:
    def key(z):
        z = complex(z)
        if z == 0:
            return complex(-np.inf, 0.0)
        return complex(math.log(abs(z)), _arg_0_2pi(z, snap))

    def taylor(sigma, k):
        sigma = complex(sigma)
        out = np.empty(k, dtype=complex)
        out[0] = key(sigma)
        for j in range(1, k):
            out[j] = (-1) ** (j + 1) / (j * sigma**j)
        return out

    def check(z):
        if z == 0:
            raise LinAlgError("log: singular matrix (zero eigenvalue)")

    def centre(sigma, keys):
        base = complex(np.log(sigma))
        shift = round((np.mean(keys.imag) - base.imag) / (2 * math.pi))
        return base + 2j * math.pi * shift

    return FunctionSpec(
        name="log_arg0_2pi", scalar=key, taylor=taylor, key=key, domain_check=check, centre_value=centre
    )


LOG_ARG0_2PI = log_spec()


# --- Schur-Parlett -------------------------------------------------------------

def _clusters(keys: np.ndarray, delta: float) -> list[int]:
    """Label eigenvalues so that chains of neighbours closer than ``delta`` share a label."""
    n = len(keys)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(keys[i] - keys[j]) <= delta:
                parent[find(i)] = find(j)
    roots: dict[int, int] = {}
    return [roots.setdefault(find(i), len(roots)) for i in range(n)]


def _reorder(t, q, labels):
    """Make equal labels contiguous (clusters in order of first appearance)."""
    labels = list(labels)
    target = sorted(range(len(labels)), key=lambda i: (labels[i], i))
    want = [labels[i] for i in target]
    for pos in range(len(labels)):
        if labels[pos] == want[pos]:
            continue
        src = next(j for j in range(pos + 1, len(labels)) if labels[j] == want[pos])
        t, q, info = lapack.ztrexc(t, q, src + 1, pos + 1)
        if info != 0:
            raise LinAlgError(f"ztrexc failed (info={info})")
        labels.insert(pos, labels.pop(src))
    return t, q, labels


def _taylor_block(tb: np.ndarray, spec: FunctionSpec, keys: np.ndarray) -> np.ndarray:
    m = tb.shape[0]
    if m == 1:
        return np.array([[spec.scalar(tb[0, 0])]], dtype=complex)
    sigma = np.trace(tb) / m
    n_mat = tb - sigma * np.eye(m)
    coeffs = _centre_coeffs(spec, sigma, keys, 96)
    f = coeffs[0] * np.eye(m, dtype=complex)
    power = np.eye(m, dtype=complex)
    small = 0
    for k in range(1, 400):
        if k >= len(coeffs):
            coeffs = _centre_coeffs(spec, sigma, keys, 2 * len(coeffs))
        power = power @ n_mat
        term = coeffs[k] * power
        f = f + term
        if np.linalg.norm(term) <= _EPS * np.linalg.norm(f):
            small += 1
            if small >= 3 and k >= m:
                return f
        else:
            small = 0
        if not np.all(np.isfinite(f)):
            break
    raise LinAlgError(f"{spec.name}: Taylor series on a diagonal block did not converge")


def _centre_coeffs(spec, sigma, keys, k):
    coeffs = np.array(spec.taylor(sigma, k), dtype=complex)
    if spec.centre_value is not None:
        coeffs[0] = spec.centre_value(sigma, keys)
    return coeffs


def schur_parlett(m, spec: FunctionSpec, delta: float = CLUSTER_DELTA) -> np.ndarray:
    """Evaluate the primary matrix function ``spec(m)``."""
    m = as_matrix(m, square=True)
    n = m.shape[0]
    if n == 0:
        return m.copy()
    t, q = scipy.linalg.schur(m, output="complex")
    eig = np.diag(t).copy()
    if spec.domain_check is not None:
        for z in eig:
            spec.domain_check(z)
    keys = np.array([spec.key(z) for z in eig])
    labels = _clusters(keys, delta)
    if len(set(labels)) > 1:
        t, q, labels = _reorder(np.asarray(t, order="F"), np.asarray(q, order="F"), labels)
        eig = np.diag(t).copy()
        keys = np.array([spec.key(z) for z in eig])
    # block boundaries
    starts = [0] + [i for i in range(1, n) if labels[i] != labels[i - 1]]
    bounds = list(zip(starts, starts[1:] + [n]))
    f = np.zeros((n, n), dtype=complex)
    for lo, hi in bounds:
        f[lo:hi, lo:hi] = _taylor_block(t[lo:hi, lo:hi], spec, keys[lo:hi])
    nb = len(bounds)
    for jb in range(1, nb):
        jlo, jhi = bounds[jb]
        for ib in range(jb - 1, -1, -1):
            ilo, ihi = bounds[ib]
            tii, tjj, tij = t[ilo:ihi, ilo:ihi], t[jlo:jhi, jlo:jhi], t[ilo:ihi, jlo:jhi]
            rhs = f[ilo:ihi, ilo:ihi] @ tij - tij @ f[jlo:jhi, jlo:jhi]
            for kb in range(ib + 1, jb):
                klo, khi = bounds[kb]
                rhs = rhs + f[ilo:ihi, klo:khi] @ t[klo:khi, jlo:jhi] - t[ilo:ihi, klo:khi] @ f[klo:khi, jlo:jhi]
            f[ilo:ihi, jlo:jhi] = scipy.linalg.solve_sylvester(tii, -tjj, rhs)
    return q @ f @ q.conj().T


_NAMED = {"exp": EXP, "phi": PHI, "log": LOG_ARG0_2PI}


def matrix_function(m, f) -> np.ndarray:
    """Primary matrix function; ``f`` is a :class:`FunctionSpec` or one of "exp", "phi", "log"."""
    spec = _NAMED[f] if isinstance(f, str) else f
    return schur_parlett(m, spec)


def phi(m) -> np.ndarray:
    return schur_parlett(m, PHI)


def log_branch_arg0_2pi(m, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Matrix logarithm whose eigenvalues have imaginary part in [0, 2 pi).

    The cut runs along the positive real axis, approached from below.
    Eigenvalues within ``rank_tol`` of the cut are snapped onto the axis (arg 0)
    with a :class:`BranchCutWarning`; the result is accepted only if
    ``exp(L)`` reproduces ``m`` to ``eq_tol``.
    """
    m = as_matrix(m, square=True)
    if m.shape[0] == 0:
        return m.copy()
    eig = np.linalg.eigvals(m)
    scale = max(np.abs(eig).max(), 1.0)
    if np.min(np.abs(eig)) <= cfg.rank_tol * scale:
        raise LinAlgError("log: matrix is singular")
    near_cut = [z for z in eig if z.real > 0 and -cfg.rank_tol * abs(z) <= z.imag < 0]
    if near_cut:
        warnings.warn(
            f"log: {len(near_cut)} eigenvalue(s) within {cfg.rank_tol:g} below the positive real axis",
            BranchCutWarning,
            stacklevel=2,
        )
    spec = log_spec(cfg.rank_tol) if cfg.rank_tol != DEFAULT_TOL.rank_tol else LOG_ARG0_2PI
    out = schur_parlett(m, spec)
    if rel_diff(scipy.linalg.expm(out), m) > cfg.eq_tol:
        raise BranchCutError("log: exp(L) does not reproduce the input (branch-cut proximity)")
    return out
