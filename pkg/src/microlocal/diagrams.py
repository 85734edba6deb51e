"""Local linear algebra at a node.

Two models of a perverse sheaf on a disk with one singular point:

* :class:`PhiPsiDiagram` -- vanishing/nearby cycles ``Phi <-> Psi`` with maps
  ``a: Phi -> Psi``, ``b: Psi -> Phi`` and ``1 + ab`` invertible;
* :class:`UVDiagram` -- ``E <-> F`` with ``u: E -> F``, ``v: F -> E`` and the
  spectra of ``uv`` and ``vu`` in the strip ``0 <= Re z < 1``.

The Fourier transform acts on both (cluster transformation on the first,
``(u, v) -> (v, -u)`` on the second) and the Malgrange formulas
``a = u, b = phi(vu) v`` pass between them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    eigenvalues,
    identity,
    is_invertible,
    log_branch_arg0_2pi,
    matrix_from_json,
    matrix_to_json,
    phi,
    rel_diff,
    solve,
)


# malgrange_from_J round trip; looser than eq_tol because of the matrix logarithm
ROUNDTRIP_TOL = 1e-8


class DiagramError(ValueError):
    pass


class StripBoundaryWarning(UserWarning):
    """An eigenvalue lies within the tolerance collar of Re = 1."""


def strip_violations(eigs, cfg: ToleranceConfig = DEFAULT_TOL) -> list[complex]:
    """Eigenvalues outside ``0 <= Re z < 1``.

    A collar of width ``rank_tol`` is applied at both edges: values down to
    ``-rank_tol`` count as Re = 0 (inside); values from ``1 - rank_tol`` count as
    Re = 1 (outside) and trigger a :class:`StripBoundaryWarning` when they sit
    inside the collar.
    """
    bad = []
    tol = cfg.rank_tol
    for z in np.atleast_1d(eigs):
        re = z.real
        if abs(re - 1.0) <= tol:
            warnings.warn(f"eigenvalue {z:.6g} within {tol:g} of Re = 1; treated as outside", StripBoundaryWarning, stacklevel=2)
        if re < -tol or re >= 1.0 - tol:
            bad.append(complex(z))
    return bad


def _product_spectrum(x, y, cfg):
    return eigenvalues(x @ y, cfg) if x.shape[0] else np.zeros(0, dtype=complex)


@dataclass(frozen=True, eq=False)
class PhiPsiDiagram:
    a: np.ndarray  # Phi -> Psi, shape (dim_psi, dim_phi)
    b: np.ndarray  # Psi -> Phi, shape (dim_phi, dim_psi)

    def __post_init__(self):
        a = as_matrix(self.a, name="a")
        b = as_matrix(self.b, name="b")
        if b.shape != (a.shape[1], a.shape[0]):
            raise DiagramError(f"a {a.shape} and b {b.shape} are not composable both ways")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def zero(cls, dim_phi: int, dim_psi: int) -> "PhiPsiDiagram":
        return cls(np.zeros((dim_psi, dim_phi), complex), np.zeros((dim_phi, dim_psi), complex))

    @property
    def dim_phi(self) -> int:
        return self.a.shape[1]

    @property
    def dim_psi(self) -> int:
        return self.a.shape[0]

    def is_valid(self, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
        return is_invertible(identity(self.dim_psi) + self.a @ self.b, cfg)

    def check(self, cfg: ToleranceConfig = DEFAULT_TOL) -> "PhiPsiDiagram":
        if not self.is_valid(cfg):
            raise DiagramError("1 + ab is not invertible")
        return self

    def to_json(self) -> dict:
        return {"kind": "phi_psi", "a": matrix_to_json(self.a), "b": matrix_to_json(self.b)}


@dataclass(frozen=True, eq=False)
class UVDiagram:
    u: np.ndarray  # E -> F, shape (dim_f, dim_e)
    v: np.ndarray  # F -> E, shape (dim_e, dim_f)

    def __post_init__(self):
        u = as_matrix(self.u, name="u")
        v = as_matrix(self.v, name="v")
        if v.shape != (u.shape[1], u.shape[0]):
            raise DiagramError(f"u {u.shape} and v {v.shape} are not composable both ways")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def dim_e(self) -> int:
        return self.u.shape[1]

    @property
    def dim_f(self) -> int:
        return self.u.shape[0]

    def strip_violations(self, cfg: ToleranceConfig = DEFAULT_TOL) -> list[complex]:
        return strip_violations(_product_spectrum(self.v, self.u, cfg), cfg) + strip_violations(
            _product_spectrum(self.u, self.v, cfg), cfg
        )

    def is_valid(self, cfg: ToleranceConfig = DEFAULT_TOL) -> bool:
        return not self.strip_violations(cfg)

    def check(self, cfg: ToleranceConfig = DEFAULT_TOL) -> "UVDiagram":
        bad = self.strip_violations(cfg)
        if bad:
            raise DiagramError(f"eigenvalues outside the strip 0 <= Re < 1: {bad}")
        return self

    def to_json(self) -> dict:
        return {"kind": "uv", "u": matrix_to_json(self.u), "v": matrix_to_json(self.v)}


@dataclass(frozen=True, eq=False)
class DeRhamNodeData:
    u: np.ndarray  # E_{x'} -> E_{x''}
    v: np.ndarray  # E_{x''} -> E_{x'}
    res_source: np.ndarray
    res_target: np.ndarray

    def __post_init__(self):
        u = as_matrix(self.u, name="u")
        v = as_matrix(self.v, name="v")
        rs = as_matrix(self.res_source, square=True, name="res_source")
        rt = as_matrix(self.res_target, square=True, name="res_target")
        if v.shape != (u.shape[1], u.shape[0]) or rs.shape[0] != u.shape[1] or rt.shape[0] != u.shape[0]:
            raise DiagramError(f"shape mismatch: u {u.shape}, v {v.shape}, residues {rs.shape}, {rt.shape}")
        for name, val in (("u", u), ("v", v), ("res_source", rs), ("res_target", rt)):
            object.__setattr__(self, name, val)

    @classmethod
    def from_uv(cls, u, v) -> "DeRhamNodeData":
        u, v = as_matrix(u), as_matrix(v)
        return cls(u, v, v @ u, -(u @ v))

    def to_json(self) -> dict:
        return {
            "kind": "derham_node",
            "u": matrix_to_json(self.u),
            "v": matrix_to_json(self.v),
            "res_source": matrix_to_json(self.res_source),
            "res_target": matrix_to_json(self.res_target),
        }


@dataclass
class DeRhamReport:
    res_source_residual: float
    res_target_residual: float
    strip_violations: list[complex] = field(default_factory=list)
    tol: float = DEFAULT_TOL.eq_tol

    @property
    def valid(self) -> bool:
        return self.res_source_residual <= self.tol and self.res_target_residual <= self.tol and not self.strip_violations

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "res_source_residual": self.res_source_residual,
            "res_target_residual": self.res_target_residual,
            "strip_violations": [[z.real, z.imag] for z in self.strip_violations],
            "tol": self.tol,
        }


# --- operations ----------------------------------------------------------------

def ft_J(d: PhiPsiDiagram, cfg: ToleranceConfig = DEFAULT_TOL) -> PhiPsiDiagram:
    """Cluster transformation: ``(a, b) -> (-b, a (1 + ba)^{-1})``, swapping Phi and Psi."""
    d.check(cfg)
    t_phi = identity(d.dim_phi) + d.b @ d.a
    # a (1+ba)^{-1} computed as a right solve
    b_new = solve(t_phi.T, d.a.T, cfg).T if d.dim_phi else d.a.copy()
    return PhiPsiDiagram(-d.b, b_new)


def ft_I(d: UVDiagram, cfg: ToleranceConfig = DEFAULT_TOL, *, check: bool = True) -> UVDiagram:
    """``(u, v) -> (v, -u)``.  The output is returned as is, even when it leaves the strip."""
    if check:
        d.check(cfg)
    out = UVDiagram(d.v.copy(), -d.u)
    bad = out.strip_violations(cfg)
    if bad:
        warnings.warn(f"ft_I output leaves the strip: {bad}", StripBoundaryWarning, stacklevel=2)
    return out


def monodromies(d: PhiPsiDiagram, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """``(T_psi, T_phi) = (1 + ab, 1 + ba)``."""
    d.check(cfg)
    return identity(d.dim_psi) + d.a @ d.b, identity(d.dim_phi) + d.b @ d.a


def malgrange_to_J(d: UVDiagram, cfg: ToleranceConfig = DEFAULT_TOL, *, check: bool = True) -> PhiPsiDiagram:
    """``a = u``, ``b = phi(vu) v`` with ``phi(z) = (e^{2 pi i z} - 1)/z``."""
    if check:
        d.check(cfg)
    b = phi(d.v @ d.u) @ d.v
    out = PhiPsiDiagram(d.u.copy(), b)
    # phi has no zeros in the strip, so 1+ba = exp(2 pi i vu) stays invertible
    assert not check or out.is_valid(cfg)
    return out


def malgrange_from_J(d: PhiPsiDiagram, cfg: ToleranceConfig = DEFAULT_TOL) -> UVDiagram:
    """Inverse of :func:`malgrange_to_J`; ``vu`` is the [0, 2 pi)-branch logarithm of ``T_phi`` over 2 pi i."""
    _, t_phi = monodromies(d, cfg)
    x = log_branch_arg0_2pi(t_phi, cfg) / (2j * math.pi)
    v = solve(phi(x), d.b, cfg) if d.dim_phi else d.b.copy()
    out = UVDiagram(d.a.copy(), v)
    back = malgrange_to_J(out, cfg, check=False)
    if max(rel_diff(back.a, d.a), rel_diff(back.b, d.b)) > ROUNDTRIP_TOL:
        raise DiagramError("malgrange_from_J: round trip does not reproduce the input")
    return out


def validate_derham(d: DeRhamNodeData, cfg: ToleranceConfig = DEFAULT_TOL) -> DeRhamReport:
    vu = d.v @ d.u
    muv = -(d.u @ d.v)
    bad = strip_violations(_product_spectrum(d.v, d.u, cfg), cfg) + strip_violations(
        -_product_spectrum(d.u, d.v, cfg), cfg
    )
    return DeRhamReport(
        res_source_residual=rel_diff(d.res_source, vu),
        res_target_residual=rel_diff(d.res_target, muv),
        strip_violations=bad,
        tol=cfg.eq_tol,
    )


# --- isomorphisms ----------------------------------------------------------------

def intertwining_residuals(p, q, src: PhiPsiDiagram, dst: PhiPsiDiagram) -> tuple[float, float]:
    """Residuals of ``q a = a' p`` and ``p b = b' q`` for ``(p, q): src -> dst``."""
    p, q = as_matrix(p), as_matrix(q)
    return rel_diff(q @ src.a, dst.a @ p), rel_diff(p @ src.b, dst.b @ q)


def ft_J_squared_iso(d: PhiPsiDiagram) -> tuple[np.ndarray, np.ndarray]:
    """The isomorphism ``(1, 1 + ab)`` from ``ft_J(ft_J(d))`` to ``(-a, -b)``."""
    return identity(d.dim_phi), identity(d.dim_psi) + d.a @ d.b


def antipodal(d: PhiPsiDiagram) -> PhiPsiDiagram:
    return PhiPsiDiagram(-d.a, -d.b)


# --- JSON ------------------------------------------------------------------------

def diagram_from_json(obj):
    try:
        kind = obj["kind"]
        if kind == "phi_psi":
            return PhiPsiDiagram(matrix_from_json(obj["a"]), matrix_from_json(obj["b"]))
        if kind == "uv":
            return UVDiagram(matrix_from_json(obj["u"]), matrix_from_json(obj["v"]))
        if kind == "derham_node":
            return DeRhamNodeData(
                matrix_from_json(obj["u"]),
                matrix_from_json(obj["v"]),
                matrix_from_json(obj["res_source"]),
                matrix_from_json(obj["res_target"]),
            )
    except (KeyError, TypeError) as exc:
        raise DiagramError(f"malformed diagram JSON: {exc}") from None
    raise DiagramError(f"unknown diagram kind {obj.get('kind')!r}")
