"""Locating points of a moment fiber by damped Gauss-Newton."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg import matrix_to_json
from .spaces import QHSpace, SpaceError

SUCCESS_TOL = 1e-10


@dataclass
class FiberResult:
    success: bool
    point: tuple | None
    residual: float
    iterations: int
    seed: int
    message: str = ""

    def to_json(self, space: QHSpace | None = None) -> dict:
        out = {
            "success": self.success,
            "residual": self.residual,
            "tol": SUCCESS_TOL,
            "iterations": self.iterations,
            "seed": self.seed,
            "message": self.message,
        }
        if self.point is not None:
            names = [b.name for b in space.layout] if space is not None else [str(k) for k in range(len(self.point))]
            out["point"] = {nm: matrix_to_json(p) for nm, p in zip(names, self.point)}
        return out


def _targets(space: QHSpace, target, idx):
    if not isinstance(target, (list, tuple)):
        target = [target] * len(idx)
    if len(target) != len(idx):
        raise SpaceError(f"expected {len(idx)} target elements, got {len(target)}")
    out = []
    for k, t in zip(idx, target):
        n = space.slots[k].size
        t = np.asarray(t, complex)
        t = t * np.eye(n) if t.ndim == 0 else t
        if t.shape != (n, n):
            raise SpaceError(f"target for slot {space.slots[k].name!r} has shape {t.shape}, expected {(n, n)}")
        out.append(np.linalg.inv(t))
    return out


def fiber_residual(space: QHSpace, x, target_inv, idx) -> np.ndarray:
    m = space.moment_at(x)
    parts = [(m[k] @ ti - np.eye(ti.shape[0])).reshape(-1) for k, ti in zip(idx, target_inv)]
    return np.concatenate(parts) if parts else np.zeros(0, complex)


def fiber_jacobian(space: QHSpace, x, target_inv, idx) -> np.ndarray:
    jac = space.moment_jacobian(x)
    cols = [np.einsum("kab,bc->kac", jac[k], ti).reshape(space.dim, -1) for k, ti in zip(idx, target_inv)]
    return np.concatenate(cols, axis=1).T


def _safe_residual(space, x, target_inv, idx):
    try:
        with np.errstate(all="raise"):
            r = fiber_residual(space, x, target_inv, idx)
    except (np.linalg.LinAlgError, FloatingPointError):
        return None
    return r if np.all(np.isfinite(r)) else None


def solve_moment_fiber(
    space: QHSpace,
    target=1.0,
    seed: int = 0,
    max_iter: int = 200,
    slots=None,
    start=None,
) -> FiberResult:
    """Solve ``m_k(x) target_k^{-1} = e`` on the chosen slots (all by default).

    The start is the space's seeded sampler, or ``start`` when given.  Steps
    are least-squares Gauss-Newton steps, halved until the residual decreases.
    """
    idx = list(range(len(space.slots))) if slots is None else [space.slot_index(s) for s in slots]
    t_inv = _targets(space, target, idx)
    rng = np.random.default_rng(seed)
    x = space.check_point(start) if start is not None else space.sample(rng)
    r = _safe_residual(space, x, t_inv, idx)
    if r is None:
        return FiberResult(False, None, float("inf"), 0, seed, "start point outside the domain")
    norm = float(np.linalg.norm(r))
    for it in range(1, max_iter + 1):
        if norm < SUCCESS_TOL:
            return FiberResult(True, x, norm, it - 1, seed, "converged")
        jac = fiber_jacobian(space, x, t_inv, idx)
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        t, accepted = 1.0, False
        while t > 1e-10:
            cand = tuple(p + t * d for p, d in zip(x, space.unflatten(step)))
            rc = _safe_residual(space, cand, t_inv, idx)
            if rc is not None and np.linalg.norm(rc) < norm:
                x, r, norm, accepted = cand, rc, float(np.linalg.norm(rc)), True
                break
            t /= 2
        if not accepted:
            return FiberResult(False, x, norm, it, seed, "line search stalled")
    if norm < SUCCESS_TOL:
        return FiberResult(True, x, norm, max_iter, seed, "converged")
    return FiberResult(False, x, norm, max_iter, seed, f"no convergence after {max_iter} iterations")
