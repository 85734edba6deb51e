"""Quasi-Hamiltonian GL-spaces in the ambient-coordinate model.

A point is a tuple of complex matrices (one per layout block); a tangent
vector is a tuple of the same shapes.  Every space is an open subset of its
block product, so its complex dimension is the total number of entries.

Evaluators are written against the dual-number helpers so that moments and
2-forms can be differentiated along the point, which fusion relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..linalg.dual import Dual, derivative, inv, lift, tr, value
from .forms import wedge_pair


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    name: str
    shape: tuple[int, int]

    @property
    def size(self) -> int:
        return self.shape[0] * self.shape[1]


@dataclass(frozen=True)
class Slot:
    name: str
    size: int


@dataclass(frozen=True, eq=False)
class QHSpace:
    """A GL(n_1) x ... x GL(n_k) quasi-Hamiltonian space.

    ``act(gs, x)``, ``moment(x)`` and ``omega(x, X, Y)`` must accept dual
    numbers in place of matrices.  ``gram`` may supply a faster exact Gram
    matrix of omega; otherwise it is assembled entry by entry.
    """

    name: str
    layout: tuple[Block, ...]
    slots: tuple[Slot, ...]
    act: Callable
    moment: Callable
    omega: Callable
    sampler: Callable
    gram: Callable | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for s in self.slots:
            if s.size < 1:
                raise SpaceError(f"slot {s.name!r} must have positive size")
        names = [s.name for s in self.slots]
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate slot names {names}")

    @property
    def dim(self) -> int:
        return sum(b.size for b in self.layout)

    @property
    def group_dim(self) -> int:
        return sum(s.size**2 for s in self.slots)

    def slot_index(self, slot) -> int:
        if isinstance(slot, int):
            if not -len(self.slots) <= slot < len(self.slots):
                raise SpaceError(f"slot index {slot} out of range")
            return slot % len(self.slots)
        for k, s in enumerate(self.slots):
            if s.name == slot:
                return k
        raise SpaceError(f"no slot named {slot!r}")

    # tangent bookkeeping

    def zero_tangent(self) -> tuple:
        return tuple(np.zeros(b.shape, complex) for b in self.layout)

    def flatten(self, tangent) -> np.ndarray:
        if not self.layout:
            return np.zeros(0, complex)
        return np.concatenate([np.asarray(t, complex).reshape(-1) for t in tangent])

    def unflatten(self, vec) -> tuple:
        out, k = [], 0
        for b in self.layout:
            out.append(np.asarray(vec[k:k + b.size], complex).reshape(b.shape))
            k += b.size
        return tuple(out)

    def basis(self) -> list[tuple]:
        eye = np.eye(self.dim, dtype=complex)
        return [self.unflatten(eye[k]) for k in range(self.dim)]

    def random_tangent(self, rng) -> tuple:
        return tuple(rng.normal(size=b.shape) + 1j * rng.normal(size=b.shape) for b in self.layout)

    def sample(self, rng) -> tuple:
        return tuple(np.asarray(p, complex) for p in self.sampler(rng))

    def check_point(self, x) -> tuple:
        x = tuple(np.asarray(p, complex) for p in x)
        if len(x) != len(self.layout) or any(p.shape != b.shape for p, b in zip(x, self.layout)):
            raise SpaceError(f"point does not match layout {[b.shape for b in self.layout]}")
        return x

    # derived evaluators

    def moment_at(self, x) -> list[np.ndarray]:
        return [np.asarray(value(m), complex) for m in self.moment(x)]

    def dmoment(self, x, tangent) -> list[np.ndarray]:
        return [derivative(m) for m in self.moment(lift(x, tangent))]

    def moment_jacobian(self, x) -> list[np.ndarray]:
        """Per slot, an array of shape (dim, n, n) of directional derivatives along the basis."""
        cols = [self.dmoment(x, t) for t in self.basis()]
        out = []
        for k, s in enumerate(self.slots):
            if cols:
                out.append(np.stack([np.broadcast_to(c[k], (s.size, s.size)) for c in cols]))
            else:
                out.append(np.zeros((0, s.size, s.size), complex))
        return out

    def orbit_vector(self, x, xis) -> tuple:
        """``d/dt exp(t xi) . x`` at t = 0 for a Lie algebra element ``xis`` (one matrix per slot)."""
        gs = [Dual(np.eye(s.size, dtype=complex), np.asarray(xi, complex)) for s, xi in zip(self.slots, xis)]
        out = self.act(gs, x)
        return tuple(np.broadcast_to(derivative(o), b.shape).astype(complex) for o, b in zip(out, self.layout))

    def orbit_matrix(self, x, slots: Sequence[int] | None = None) -> np.ndarray:
        """Columns are orbit vectors for the matrix-unit basis of the chosen slots."""
        idx = range(len(self.slots)) if slots is None else slots
        cols = []
        for k in idx:
            n = self.slots[k].size
            for i in range(n):
                for j in range(n):
                    xis = [np.zeros((s.size, s.size), complex) for s in self.slots]
                    xis[k][i, j] = 1.0
                    cols.append(self.flatten(self.orbit_vector(x, xis)))
        if not cols:
            return np.zeros((self.dim, 0), complex)
        return np.stack(cols, axis=1)

    def gram_matrix(self, x) -> np.ndarray:
        """``G[i, j] = omega(x, e_i, e_j)`` on the coordinate basis."""
        if self.gram is not None:
            return self.gram(x)
        return gram_by_entries(self, x)


def gram_by_entries(space: QHSpace, x) -> np.ndarray:
    basis = space.basis()
    d = len(basis)
    g = np.zeros((d, d), complex)
    for i in range(d):
        for j in range(i + 1, d):
            g[i, j] = space.omega(x, basis[i], basis[j])
            g[j, i] = -g[i, j]
    return g


def _rand(rng, shape, scale):
    return scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


def _rand_gl(rng, n, scale=0.4):
    return np.eye(n, dtype=complex) + _rand(rng, (n, n), scale / np.sqrt(n))


# --- building blocks -------------------------------------------------------------

DOUBLE_MOMENTS = ("ab,a^-1b^-1", "ab,b^-1a^-1")


def double(n: int, moment_variant: str = DOUBLE_MOMENTS[0]) -> QHSpace:
    """The double GL(n)^2 with action ``(g1 a g2^{-1}, g2 b g1^{-1})`` and moment ``(ab, a^{-1} b^{-1})``.

    ``moment_variant="ab,b^-1a^-1"`` selects the other candidate second
    component; it fails the axiom checks and exists so the choice can be rerun.
    """
    if n < 1:
        raise SpaceError("double: n must be positive")
    if moment_variant not in DOUBLE_MOMENTS:
        raise SpaceError(f"unknown moment variant {moment_variant!r}")
    swap = moment_variant == DOUBLE_MOMENTS[1]

    def act(gs, x):
        g1, g2 = gs
        a, b = x
        return (g1 @ a @ inv(g2), g2 @ b @ inv(g1))

    def moment(x):
        a, b = x
        return [a @ b, inv(b) @ inv(a) if swap else inv(a) @ inv(b)]

    def omega(x, X, Y):
        a, b = x
        ai, bi = inv(a), inv(b)
        # (a^* theta^L, b^* theta^R) + (a^* theta^R, b^* theta^L), halved
        t1 = wedge_pair(ai @ X[0], ai @ Y[0], X[1] @ bi, Y[1] @ bi)
        t2 = wedge_pair(X[0] @ ai, Y[0] @ ai, bi @ X[1], bi @ Y[1])
        return 0.5 * (t1 + t2)

    return QHSpace(
        name=f"double({n})" if not swap else f"double({n}; {moment_variant})",
        layout=(Block("a", (n, n)), Block("b", (n, n))),
        slots=(Slot("1", n), Slot("2", n)),
        act=act,
        moment=moment,
        omega=omega,
        sampler=lambda rng: (_rand_gl(rng, n), _rand_gl(rng, n)),
        notes=(f"moment ({moment_variant.replace(',', ', ')})",),
    )


def vdb_space(n1: int, n2: int) -> QHSpace:
    """Pairs ``a: W1 -> W2``, ``b: W2 -> W1`` with ``1 + ab`` invertible.

    Slots are ``(W2, W1)`` with moment ``((1 + ab)^{-1}, 1 + ba)`` and action
    ``(g2 a g1^{-1}, g1 b g2^{-1})``.  The 2-form carries an overall minus sign
    relative to ``1/2 (tr (1+ab)^{-1} da db - tr (1+ba)^{-1} db da)``; with the
    trace pairing this is the sign for which the axioms hold together with the
    moment as written.
    """
    if n1 < 1 or n2 < 1:
        raise SpaceError("vdb_space: n1, n2 must be positive")

    def act(gs, x):
        g2, g1 = gs
        a, b = x
        return (g2 @ a @ inv(g1), g1 @ b @ inv(g2))

    def moment(x):
        a, b = x
        return [inv(np.eye(n2, dtype=complex) + a @ b), np.eye(n1, dtype=complex) + b @ a]

    def omega(x, X, Y):
        a, b = x
        p = inv(np.eye(n2, dtype=complex) + a @ b)
        r = inv(np.eye(n1, dtype=complex) + b @ a)
        return -0.5 * (tr(p @ (X[0] @ Y[1] - Y[0] @ X[1])) - tr(r @ (X[1] @ Y[0] - Y[1] @ X[0])))

    def sampler(rng):
        for _ in range(100):
            a, b = _rand(rng, (n2, n1), 0.3), _rand(rng, (n1, n2), 0.3)
            if np.linalg.cond(np.eye(n2) + a @ b) < 1e3:
                return a, b
        raise SpaceError("vdb_space: could not sample a well-conditioned point")

    return QHSpace(
        name=f"vdb({n1},{n2})",
        layout=(Block("a", (n2, n1)), Block("b", (n1, n2))),
        slots=(Slot("W2", n2), Slot("W1", n1)),
        act=act,
        moment=moment,
        omega=omega,
        sampler=sampler,
        notes=("2-form sign negated relative to the printed expression",),
    )


def point_space(n: int, slot: str = "1") -> QHSpace:
    """A point with trivial GL(n) action and moment e."""
    eye = np.eye(n, dtype=complex)
    return QHSpace(
        name=f"point({n})",
        layout=(),
        slots=(Slot(slot, n),),
        act=lambda gs, x: (),
        moment=lambda x: [eye],
        omega=lambda x, X, Y: 0.0,
        sampler=lambda rng: (),
        gram=lambda x: np.zeros((0, 0), complex),
    )


# --- combinators -------------------------------------------------------------------

def rename(space: QHSpace, *, blocks: Sequence[str] | None = None, slots: Sequence[str] | None = None, name: str | None = None) -> QHSpace:
    layout = space.layout if blocks is None else tuple(Block(nm, b.shape) for nm, b in zip(blocks, space.layout))
    sl = space.slots if slots is None else tuple(Slot(nm, s.size) for nm, s in zip(slots, space.slots))
    if len(layout) != len(space.layout) or len(sl) != len(space.slots):
        raise SpaceError("rename: wrong number of names")
    return QHSpace(name or space.name, layout, sl, space.act, space.moment, space.omega, space.sampler, space.gram, space.notes)


def product(spaces: Sequence[QHSpace], prefixes: Sequence[str] | None = None, name: str | None = None) -> QHSpace:
    """Cartesian product; block and slot names are prefixed to stay unique."""
    spaces = list(spaces)
    if prefixes is None:
        prefixes = [f"{k}." for k in range(len(spaces))]
    nblocks = [len(s.layout) for s in spaces]
    nslots = [len(s.slots) for s in spaces]

    def split(seq, counts):
        out, k = [], 0
        for c in counts:
            out.append(tuple(seq[k:k + c]))
            k += c
        return out

    def act(gs, x):
        out = []
        for s, g_part, x_part in zip(spaces, split(gs, nslots), split(x, nblocks)):
            out.extend(s.act(list(g_part), x_part))
        return tuple(out)

    def moment(x):
        out = []
        for s, x_part in zip(spaces, split(x, nblocks)):
            out.extend(s.moment(x_part))
        return out

    def omega(x, X, Y):
        total = 0
        for s, xp, Xp, Yp in zip(spaces, split(x, nblocks), split(X, nblocks), split(Y, nblocks)):
            if s.layout:
                total = total + s.omega(xp, Xp, Yp)
        return total

    def sampler(rng):
        out = []
        for s in spaces:
            out.extend(s.sample(rng))
        return tuple(out)

    def gram(x):
        from scipy.linalg import block_diag

        parts = [s.gram_matrix(xp) for s, xp in zip(spaces, split(x, nblocks))]
        return block_diag(*parts).astype(complex) if parts else np.zeros((0, 0), complex)

    layout = tuple(Block(p + b.name, b.shape) for s, p in zip(spaces, prefixes) for b in s.layout)
    slots = tuple(Slot(p + sl.name, sl.size) for s, p in zip(spaces, prefixes) for sl in s.slots)
    notes = tuple(n for s in spaces for n in s.notes)
    return QHSpace(name or " x ".join(s.name for s in spaces), layout, slots, act, moment, omega, sampler, gram, notes)


def fuse(space: QHSpace, slot_i, slot_j, name: str | None = None) -> QHSpace:
    """Intrinsic fusion of two equal-size slots.

    The merged slot takes the position and name ``"<i>*<j>"`` of slot ``i``,
    its moment is ``m_i m_j``, and the 2-form gains
    ``1/2 (m_i^* theta^L, m_j^* theta^R)``.
    """
    i, j = space.slot_index(slot_i), space.slot_index(slot_j)
    if i == j:
        raise SpaceError("fuse: slots must be distinct")
    si, sj = space.slots[i], space.slots[j]
    if si.size != sj.size:
        raise SpaceError(f"fuse: slot sizes differ ({si.size} vs {sj.size})")
    new_slots = []
    for k, s in enumerate(space.slots):
        if k == i:
            new_slots.append(Slot(f"{si.name}*{sj.name}", si.size))
        elif k != j:
            new_slots.append(s)
    # old slot index -> new slot index
    old_to_new = []
    for k in range(len(space.slots)):
        kk = i if k == j else k
        old_to_new.append(kk - (1 if kk > j else 0))

    def act(gs, x):
        return space.act([gs[old_to_new[k]] for k in range(len(space.slots))], x)

    def moment(x):
        m = space.moment(x)
        merged = m[i] @ m[j]
        out = []
        for k, mk in enumerate(m):
            if k == i:
                out.append(merged)
            elif k != j:
                out.append(mk)
        return out

    def omega(x, X, Y):
        m = space.moment(x)
        dX = [derivative(v) for v in space.moment(lift(x, X))]
        dY = [derivative(v) for v in space.moment(lift(x, Y))]
        mi_inv, mj_inv = inv(m[i]), inv(m[j])
        corr = wedge_pair(mi_inv @ dX[i], mi_inv @ dY[i], dX[j] @ mj_inv, dY[j] @ mj_inv)
        return space.omega(x, X, Y) + 0.5 * corr

    def gram(x):
        g0 = space.gram_matrix(x)
        if not space.layout:
            return g0
        m = space.moment_at(x)
        jac = space.moment_jacobian(x)
        left = np.einsum("ab,kbc->kac", np.linalg.inv(m[i]), jac[i]).reshape(space.dim, -1)
        right = np.einsum("kab,bc->kca", jac[j], np.linalg.inv(m[j])).reshape(space.dim, -1)
        # tr(L_x R_y) = sum_ab L_x[a,b] R_y[b,a]; ``right`` is stored transposed
        c = left @ right.T
        return g0 + 0.5 * (c - c.T)

    return QHSpace(
        name=name or f"fuse({space.name};{si.name},{sj.name})",
        layout=space.layout,
        slots=tuple(new_slots),
        act=act,
        moment=moment,
        omega=omega,
        sampler=space.sampler,
        gram=gram,
        notes=space.notes,
    )


def fused_double(n: int) -> QHSpace:
    """``fuse(double(n), 1, 2)``: a GL(n)-space with moment ``[a, b] = a b a^{-1} b^{-1}``."""
    return rename(fuse(double(n), 0, 1), slots=["1"], name=f"fused_double({n})")


def extrinsic_fuse(m1: QHSpace, m2: QHSpace, slot_i, slot_j, name: str | None = None) -> QHSpace:
    """Fusion of ``m1 x m2`` along slot ``slot_i`` of ``m1`` and ``slot_j`` of ``m2``."""
    i = m1.slot_index(slot_i)
    j = m2.slot_index(slot_j)
    prod = product([m1, m2], prefixes=["L.", "R."])
    return fuse(prod, i, len(m1.slots) + j, name=name or f"{m1.name} (*) {m2.name}")
