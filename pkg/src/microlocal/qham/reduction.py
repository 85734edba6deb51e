"""Tangent-level quasi-Hamiltonian reduction at a point of the unit fiber."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg import DEFAULT_TOL, ToleranceConfig, null_space, rank
from .spaces import QHSpace

FIBER_TOL = 1e-8


class ReductionError(ValueError):
    pass


@dataclass
class ReductionReport:
    space: str
    gauged_slots: list[str]
    moment_defect: float
    ambient_dim: int
    group_dim: int
    dmoment_rank: int
    ker_dmoment_dim: int
    orbit_rank: int
    reduced_dim: int
    reduced_form_rank: int
    ambient_form_rank: int
    tol: dict

    @property
    def stabilizer_dim(self) -> int:
        return self.group_dim - self.orbit_rank

    @property
    def formula_dim(self) -> int:
        return self.ambient_dim - 2 * self.group_dim + 2 * self.stabilizer_dim

    @property
    def nondegenerate(self) -> bool:
        return self.reduced_form_rank == self.reduced_dim

    @property
    def ambient_nondegenerate(self) -> bool:
        return self.ambient_form_rank == self.ambient_dim

    def to_json(self) -> dict:
        return {
            "space": self.space,
            "gauged_slots": list(self.gauged_slots),
            "moment_defect": {"value": self.moment_defect, "tol": self.tol["fiber"]},
            "ambient_dim": self.ambient_dim,
            "group_dim": self.group_dim,
            "dmoment_rank": self.dmoment_rank,
            "ker_dmoment_dim": self.ker_dmoment_dim,
            "orbit_rank": self.orbit_rank,
            "stabilizer_dim": self.stabilizer_dim,
            "reduced_dim": self.reduced_dim,
            "formula_dim": self.formula_dim,
            "reduced_form_rank": self.reduced_form_rank,
            "reduced_form_even": self.reduced_form_rank % 2 == 0,
            "nondegenerate": self.nondegenerate,
            "ambient_form_rank": self.ambient_form_rank,
            "ambient_nondegenerate": self.ambient_nondegenerate,
            "rank_tol": self.tol["rank"],
        }


def reduction_report(space: QHSpace, x, gauged_slots=None, cfg: ToleranceConfig = DEFAULT_TOL) -> ReductionReport:
    """Reduced tangent space ``ker dm / im(orbit map)`` and the rank of the induced form."""
    x = space.check_point(x)
    idx = list(range(len(space.slots))) if gauged_slots is None else [space.slot_index(s) for s in gauged_slots]
    m = space.moment_at(x)
    defect = max((float(np.linalg.norm(m[k] - np.eye(m[k].shape[0]))) for k in idx), default=0.0)
    if defect >= FIBER_TOL:
        raise ReductionError(f"point is not on the unit fiber of the gauged slots (defect {defect:.3g})")

    d = space.dim
    jac_all = space.moment_jacobian(x)
    jac = np.concatenate([jac_all[k].reshape(d, -1) for k in idx], axis=1).T if idx else np.zeros((0, d), complex)
    orbit = space.orbit_matrix(x, idx)
    gram = space.gram_matrix(x)

    jr = rank(jac, cfg) if jac.size else 0
    ker = null_space(jac, cfg, ncols=d) if jac.size else np.eye(d, dtype=complex)
    orank = rank(orbit, cfg) if orbit.size else 0
    # complement of the orbit directions inside ker dm
    coords = ker.conj().T @ orbit if orbit.size else np.zeros((ker.shape[1], 0), complex)
    comp = null_space(coords.conj().T, cfg, ncols=ker.shape[1]) if coords.size else np.eye(ker.shape[1], dtype=complex)
    basis = ker @ comp
    reduced = basis.T @ gram @ basis
    rrank = rank(reduced, cfg) if reduced.size else 0
    return ReductionReport(
        space=space.name,
        gauged_slots=[space.slots[k].name for k in idx],
        moment_defect=defect,
        ambient_dim=d,
        group_dim=sum(space.slots[k].size ** 2 for k in idx),
        dmoment_rank=jr,
        ker_dmoment_dim=ker.shape[1],
        orbit_rank=orank,
        reduced_dim=basis.shape[1],
        reduced_form_rank=rrank,
        ambient_form_rank=rank(gram, cfg) if gram.size else 0,
        tol={"fiber": FIBER_TOL, "rank": cfg.rank_tol},
    )
