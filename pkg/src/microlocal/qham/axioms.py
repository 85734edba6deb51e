"""Numerical verification of the quasi-Hamiltonian axioms.

QH1  d omega = -m^* eta, summed over slots;
QH2  omega(d_xi, .) = 1/2 sum_k (m_k^* (theta^L + theta^R), xi_k);
QH3  ker omega_x = { d_xi(x) : xi in ker(Ad_{m(x)} + 1) }.

``d omega`` comes from exact forward-mode derivatives of omega along constant
vector fields; a Richardson-extrapolated central difference is kept as an
independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from ..linalg import DEFAULT_TOL, ToleranceConfig, null_space, orth
from ..linalg.dual import derivative, lift
from .forms import cartan_eta
from .spaces import QHSpace

FD_STEP = 1e-5


def _rel(x, y) -> float:
    return abs(x - y) / max(1.0, abs(x), abs(y))


def d_omega(space: QHSpace, x, X, Y, Z) -> complex:
    def dir_(V, A, B):
        return complex(derivative(space.omega(lift(x, V), A, B)))

    return dir_(X, Y, Z) - dir_(Y, X, Z) + dir_(Z, X, Y)


def d_omega_fd(space: QHSpace, x, X, Y, Z, h: float = FD_STEP) -> complex:
    def central(V, A, B, step):
        xp = tuple(p + step * v for p, v in zip(x, V))
        xm = tuple(p - step * v for p, v in zip(x, V))
        return (complex(space.omega(xp, A, B)) - complex(space.omega(xm, A, B))) / (2 * step)

    def dir_(V, A, B):
        return (4 * central(V, A, B, h / 2) - central(V, A, B, h)) / 3

    return dir_(X, Y, Z) - dir_(Y, X, Z) + dir_(Z, X, Y)


def eta_pullback(space: QHSpace, x, X, Y, Z) -> complex:
    m = space.moment_at(x)
    dX, dY, dZ = (space.dmoment(x, V) for V in (X, Y, Z))
    return complex(sum(cartan_eta(m[k], dX[k], dY[k], dZ[k]) for k in range(len(m))))


def qh2_residual(space: QHSpace, x, Y) -> float:
    """Worst relative QH2 mismatch over the matrix-unit basis of every slot."""
    m = space.moment_at(x)
    dY = space.dmoment(x, Y)
    worst = 0.0
    for k, s in enumerate(space.slots):
        mk_inv = np.linalg.inv(m[k])
        one_form = mk_inv @ dY[k] + dY[k] @ mk_inv
        for i in range(s.size):
            for j in range(s.size):
                xis = [np.zeros((t.size, t.size), complex) for t in space.slots]
                xis[k][i, j] = 1.0
                lhs = complex(space.omega(x, space.orbit_vector(x, xis), Y))
                rhs = 0.5 * one_form[j, i]  # tr(one_form @ E_ij)
                worst = max(worst, _rel(lhs, rhs))
    return worst


def ad_kernel(m_list, cfg: ToleranceConfig = DEFAULT_TOL) -> list[list[np.ndarray]]:
    """Basis of ker(Ad_m + 1) as lists of per-slot matrices."""
    out = []
    for k, m in enumerate(m_list):
        n = m.shape[0]
        mi = np.linalg.inv(m)
        # vec(m xi m^{-1}) = (m kron m^{-T}) vec(xi) for row-major vec
        op = np.kron(m, mi.T) + np.eye(n * n)
        for col in null_space(op, cfg).T:
            xis = [np.zeros_like(mm) for mm in m_list]
            xis[k] = col.reshape(n, n)
            out.append(xis)
    return out


@dataclass
class QH3Result:
    kernel_dim: int
    orbit_dim: int
    max_angle: float

    def ok(self, cfg: ToleranceConfig) -> bool:
        return self.kernel_dim == self.orbit_dim and self.max_angle < cfg.fd_tol


def qh3_check(space: QHSpace, x, cfg: ToleranceConfig = DEFAULT_TOL) -> QH3Result:
    gram = space.gram_matrix(x)
    ker = null_space(gram, cfg, ncols=space.dim) if space.dim else np.zeros((0, 0))
    vecs = [space.flatten(space.orbit_vector(x, xis)) for xis in ad_kernel(space.moment_at(x), cfg)]
    span = orth(np.stack(vecs, axis=1), cfg) if vecs else np.zeros((space.dim, 0), complex)
    kd, od = ker.shape[1], span.shape[1]
    if kd == 0 or od == 0 or kd != od:
        angle = 0.0 if kd == od else float("inf")
    else:
        angle = float(np.max(subspace_angles(ker, span)))
    return QH3Result(kd, od, angle)


@dataclass
class AxiomReport:
    space: str
    points: int
    triples: int
    qh1_dual: float = 0.0
    qh1_fd: float = 0.0
    qh2: float = 0.0
    qh3_max_angle: float = 0.0
    qh3_dim_mismatches: int = 0
    qh3_kernel_dims: list = field(default_factory=list)
    antisymmetry: float = 0.0
    equivariance: float = 0.0
    tol: dict = field(default_factory=dict)
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        t = self.tol
        return (
            self.qh1_dual < t["qh1_dual"]
            and self.qh1_fd < t["qh1_fd"]
            and self.qh2 < t["qh2"]
            and self.qh3_dim_mismatches == 0
            and self.qh3_max_angle < t["qh3_angle"]
            and self.antisymmetry < t["qh2"]
            and self.equivariance < t["qh2"]
        )

    def to_json(self) -> dict:
        return {
            "space": self.space,
            "points": self.points,
            "triples": self.triples,
            "passed": self.passed,
            "checks": {
                "antisymmetry": {"residual": self.antisymmetry, "tol": self.tol["qh2"]},
                "equivariance": {"residual": self.equivariance, "tol": self.tol["qh2"]},
                "qh1_dual": {"residual": self.qh1_dual, "tol": self.tol["qh1_dual"]},
                "qh1_fd": {"residual": self.qh1_fd, "tol": self.tol["qh1_fd"]},
                "qh2": {"residual": self.qh2, "tol": self.tol["qh2"]},
                "qh3": {"max_angle": self.qh3_max_angle, "dim_mismatches": self.qh3_dim_mismatches, "kernel_dims": self.qh3_kernel_dims, "tol": self.tol["qh3_angle"]},
            },
            "conventions": {"pairing": "tr(xy)", "chi": "eta", "notes": list(self.notes)},
        }


def default_axiom_tols(cfg: ToleranceConfig = DEFAULT_TOL) -> dict:
    return {"qh1_dual": 1e-8, "qh1_fd": 1e-5, "qh2": cfg.eq_tol, "qh3_angle": cfg.fd_tol}


def _random_group(space, rng):
    return [np.eye(s.size) + 0.3 * (rng.normal(size=(s.size,) * 2) + 1j * rng.normal(size=(s.size,) * 2)) for s in space.slots]


def equivariance_residual(space: QHSpace, x, gs) -> float:
    y = space.act(gs, x)
    m_x, m_y = space.moment_at(x), space.moment_at(y)
    worst = 0.0
    for g, a, b in zip(gs, m_x, m_y):
        want = g @ a @ np.linalg.inv(g)
        worst = max(worst, float(np.linalg.norm(b - want) / max(1.0, np.linalg.norm(b), np.linalg.norm(want))))
    return worst


def check_qh_axioms(space: QHSpace, points: int = 20, triples: int = 10, cfg: ToleranceConfig = DEFAULT_TOL, seed: int = 0, tols: dict | None = None) -> AxiomReport:
    rng = np.random.default_rng(seed)
    rep = AxiomReport(space.name, points, triples, tol=dict(tols or default_axiom_tols(cfg)), notes=space.notes)
    for _ in range(points):
        x = space.sample(rng)
        rep.equivariance = max(rep.equivariance, equivariance_residual(space, x, _random_group(space, rng)))
        for _ in range(triples):
            X, Y, Z = (space.random_tangent(rng) for _ in range(3))
            lhs = d_omega(space, x, X, Y, Z)
            rhs = -eta_pullback(space, x, X, Y, Z)
            rep.qh1_dual = max(rep.qh1_dual, _rel(lhs, rhs))
            rep.qh1_fd = max(rep.qh1_fd, _rel(d_omega_fd(space, x, X, Y, Z), rhs))
            rep.qh2 = max(rep.qh2, qh2_residual(space, x, Y))
            w_xy, w_yx = complex(space.omega(x, X, Y)), complex(space.omega(x, Y, X))
            rep.antisymmetry = max(rep.antisymmetry, _rel(w_xy, -w_yx))
        r3 = qh3_check(space, x, cfg)
        rep.qh3_kernel_dims.append(r3.kernel_dim)
        if r3.kernel_dim != r3.orbit_dim:
            rep.qh3_dim_mismatches += 1
        rep.qh3_max_angle = max(rep.qh3_max_angle, r3.max_angle if np.isfinite(r3.max_angle) else 0.0)
    return rep
