"""Representations of framed, higher-genus multiplicative preprojective algebras.

At a vertex ``i`` the relation is the ordered product

    (1 + v_i u_i) * prod_{h in}(1 + a_h b_h) * prod_{h out}(1 + b_h a_h)^{-1} * prod_nu [alpha_nu, beta_nu]

which must equal ``q^{d_i}`` (or ``1`` when the vertex is framed).  The framing
factor is present only for framed vertices; edge factors follow the global
edge order; ``[x, y] = x y x^{-1} y^{-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import DimensionVector, NodalCurveGraph
from .diagrams import PhiPsiDiagram, ft_J, monodromies
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    fro,
    identity,
    is_invertible,
    matrix_from_json,
    matrix_to_json,
    rel_diff,
    solve,
)

MAX_ATTEMPTS = 100


class RepresentationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Framing:
    u: np.ndarray  # V_i -> W_i
    v: np.ndarray  # W_i -> V_i

    @property
    def dim_w(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True, eq=False)
class Representation:
    dims: DimensionVector
    a: dict  # edge id -> V_s -> V_t
    b: dict  # edge id -> V_t -> V_s
    alpha: dict = field(default_factory=dict)  # vertex id -> list of handle matrices
    beta: dict = field(default_factory=dict)
    framing: dict = field(default_factory=dict)  # vertex id -> Framing

    def handles(self, vid: str) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.alpha.get(vid, []), self.beta.get(vid, [])))


def commutator(x, y) -> np.ndarray:
    return x @ y @ np.linalg.inv(x) @ np.linalg.inv(y)


def _inv(m, cfg, what):
    if not is_invertible(m, cfg):
        raise RepresentationError(f"{what} is not invertible")
    return solve(m, identity(m.shape[0]), cfg)


def validate_representation(rep: Representation, g: NodalCurveGraph, cfg: ToleranceConfig = DEFAULT_TOL) -> list[str]:
    """Shape and invertibility problems (empty iff ``rep`` is a valid representation of ``g``)."""
    out = []
    n = rep.dims.v

    def shape(m, want, what):
        if m.shape != want:
            out.append(f"{what}: shape {m.shape}, expected {want}")
            return False
        return True

    for vid in g.vertex_ids:
        if vid not in n:
            out.append(f"no dimension for vertex {vid!r}")
    if out:
        return out
    for e in g.edges:
        if e.id not in rep.a or e.id not in rep.b:
            out.append(f"edge {e.id!r}: missing a or b")
            continue
        ns, nt = n[e.source], n[e.target]
        ok = shape(rep.a[e.id], (nt, ns), f"a[{e.id}]") & shape(rep.b[e.id], (ns, nt), f"b[{e.id}]")
        if ok:
            if not is_invertible(identity(nt) + rep.a[e.id] @ rep.b[e.id], cfg):
                out.append(f"edge {e.id!r}: 1 + ab is not invertible")
            if not is_invertible(identity(ns) + rep.b[e.id] @ rep.a[e.id], cfg):
                out.append(f"edge {e.id!r}: 1 + ba is not invertible")
    extra = set(rep.a) - {e.id for e in g.edges}
    if extra:
        out.append(f"maps for unknown edges {sorted(extra)}")
    for v in g.vertices:
        al, be = rep.alpha.get(v.id, []), rep.beta.get(v.id, [])
        if len(al) != v.genus or len(be) != v.genus:
            out.append(f"vertex {v.id!r}: expected {v.genus} handle pairs, got {len(al)}/{len(be)}")
            continue
        for k, (x, y) in enumerate(zip(al, be), start=1):
            for name, m in (("alpha", x), ("beta", y)):
                if shape(m, (n[v.id], n[v.id]), f"{name}[{v.id}][{k}]") and not is_invertible(m, cfg):
                    out.append(f"{name}[{v.id}][{k}] is not invertible")
    for vid, fr in rep.framing.items():
        if not g.is_framed(vid):
            out.append(f"framing data on unframed vertex {vid!r}")
            continue
        w = fr.u.shape[0]
        if shape(fr.u, (w, n[vid]), f"u[{vid}]") & shape(fr.v, (n[vid], w), f"v[{vid}]"):
            if not is_invertible(identity(n[vid]) + fr.v @ fr.u, cfg):
                out.append(f"vertex {vid!r}: 1 + vu is not invertible")
            if not is_invertible(identity(w) + fr.u @ fr.v, cfg):
                out.append(f"vertex {vid!r}: 1 + uv is not invertible")
    for vid in g.framed_vertices:
        if vid not in rep.framing:
            out.append(f"framed vertex {vid!r} has no framing maps")
    return out


def check_representation(rep, g, cfg=DEFAULT_TOL) -> Representation:
    problems = validate_representation(rep, g, cfg)
    if problems:
        raise RepresentationError("; ".join(problems))
    return rep


def relation_factors(rep: Representation, g: NodalCurveGraph, vid: str, cfg: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
    """The factors of the vertex relation, left to right."""
    n = rep.dims[vid]
    one = identity(n)
    factors = []
    if g.is_framed(vid):
        fr = rep.framing[vid]
        factors.append(one + fr.v @ fr.u)
    for e in g.incoming(vid):
        factors.append(one + rep.a[e.id] @ rep.b[e.id])
    for e in g.outgoing(vid):
        factors.append(_inv(one + rep.b[e.id] @ rep.a[e.id], cfg, f"1 + ba at edge {e.id!r}"))
    for x, y in rep.handles(vid):
        factors.append(commutator(x, y))
    return factors


def relation_target(g: NodalCurveGraph, vid: str) -> complex:
    return 1.0 + 0j if g.is_framed(vid) else g.twist(vid)


def _product(factors, n):
    out = identity(n)
    for f in factors:
        out = out @ f
    return out


def relation_product(rep, g, vid, cfg=DEFAULT_TOL) -> np.ndarray:
    return _product(relation_factors(rep, g, vid, cfg), rep.dims[vid])


def relation_residual(rep: Representation, g: NodalCurveGraph, vid: str, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """LHS - RHS of the relation at ``vid`` (framed form when the vertex is framed)."""
    n = rep.dims[vid]
    return relation_product(rep, g, vid, cfg) - relation_target(g, vid) * identity(n)


def framed_relation_residual(rep, g, vid, cfg=DEFAULT_TOL) -> np.ndarray:
    if not g.is_framed(vid):
        raise RepresentationError(f"vertex {vid!r} is not framed")
    return relation_residual(rep, g, vid, cfg)


@dataclass
class RelationReport:
    residuals: dict  # vertex id -> matrix (absent when not computable)
    norms: dict
    findings: list[str]
    tol: float

    @property
    def max_norm(self) -> float:
        return max(self.norms.values(), default=0.0)

    @property
    def satisfied(self) -> bool:
        return not self.findings and all(nv < self.tol for nv in self.norms.values())

    def to_json(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "max_norm": self.max_norm,
            "tol": self.tol,
            "vertices": {vid: {"norm": self.norms[vid], "residual": matrix_to_json(r), "tol": self.tol} for vid, r in sorted(self.residuals.items())},
            "findings": list(self.findings),
        }


def relation_report(rep: Representation, g: NodalCurveGraph, cfg: ToleranceConfig = DEFAULT_TOL, tol: float | None = None) -> RelationReport:
    findings = validate_representation(rep, g, cfg)
    residuals, norms = {}, {}
    for vid in g.vertex_ids:
        try:
            r = relation_residual(rep, g, vid, cfg)
        except (KeyError, ValueError, np.linalg.LinAlgError) as exc:
            # already described by the validation findings in most cases
            findings.append(f"vertex {vid!r}: residual not computable ({exc})")
            continue
        residuals[vid] = r
        norms[vid] = fro(r)
    return RelationReport(residuals, norms, findings, cfg.eq_tol if tol is None else tol)


# --- gauge action ----------------------------------------------------------------

def gauge_act(rep: Representation, g: NodalCurveGraph, gauge: dict, cfg: ToleranceConfig = DEFAULT_TOL) -> Representation:
    """Change of basis ``(g_i)`` on the spaces ``V_i``."""
    gi = {}
    for vid in g.vertex_ids:
        m = as_matrix(gauge[vid], square=True, name=f"g[{vid}]")
        if m.shape[0] != rep.dims[vid]:
            raise RepresentationError(f"gauge element at {vid!r} has size {m.shape[0]}, expected {rep.dims[vid]}")
        gi[vid] = (m, _inv(m, cfg, f"gauge element at {vid!r}"))
    a, b = {}, {}
    for e in g.edges:
        (gs, gsi), (gt, gti) = gi[e.source], gi[e.target]
        a[e.id] = gt @ rep.a[e.id] @ gsi
        b[e.id] = gs @ rep.b[e.id] @ gti
    alpha = {vid: [gi[vid][0] @ x @ gi[vid][1] for x in xs] for vid, xs in rep.alpha.items()}
    beta = {vid: [gi[vid][0] @ y @ gi[vid][1] for y in ys] for vid, ys in rep.beta.items()}
    framing = {vid: Framing(fr.u @ gi[vid][1], gi[vid][0] @ fr.v) for vid, fr in rep.framing.items()}
    return Representation(rep.dims, a, b, alpha, beta, framing)


# --- random generation -------------------------------------------------------------

def _disk(rng, shape, radius):
    r = radius * np.sqrt(rng.random(shape))
    return r * np.exp(2j * math.pi * rng.random(shape))


def random_representation(g: NodalCurveGraph, dims: DimensionVector, seed: int = 0, radius: float = 0.1, cfg: ToleranceConfig = DEFAULT_TOL) -> Representation:
    """Entries uniform in the disk of the given radius; handles are identity plus such a perturbation."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    n = dims.v
    for _ in range(MAX_ATTEMPTS):
        a = {e.id: _disk(rng, (n[e.target], n[e.source]), radius) for e in g.edges}
        b = {e.id: _disk(rng, (n[e.source], n[e.target]), radius) for e in g.edges}
        alpha = {v.id: [identity(n[v.id]) + _disk(rng, (n[v.id],) * 2, radius) for _ in range(v.genus)] for v in g.vertices}
        beta = {v.id: [identity(n[v.id]) + _disk(rng, (n[v.id],) * 2, radius) for _ in range(v.genus)] for v in g.vertices}
        framing = {}
        for vid in g.framed_vertices:
            w = dims.framing(vid)
            framing[vid] = Framing(_disk(rng, (w, n[vid]), radius), _disk(rng, (n[vid], w), radius))
        rep = Representation(dims, a, b, alpha, beta, framing)
        if not validate_representation(rep, g, cfg):
            return rep
    raise RepresentationError(f"no valid representation after {MAX_ATTEMPTS} attempts")


# --- local <-> global ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VertexLocal:
    """Local diagrams at one vertex, all with Psi = V_i.

    Incoming edges contribute ``(a'', b'') = (a_h, b_h)``; outgoing edges the
    cluster transform ``(a', b') = (-b_h, a_h (1 + b_h a_h)^{-1})``; a framing
    contributes ``(v_i, u_i)`` with Phi = W_i.
    """

    vertex: str
    dim: int
    target: complex
    incoming: tuple = ()  # (edge id, PhiPsiDiagram)
    outgoing: tuple = ()
    handles: tuple = ()  # (alpha, beta)
    framing: PhiPsiDiagram | None = None

    def factors(self, cfg: ToleranceConfig = DEFAULT_TOL) -> list[np.ndarray]:
        out = []
        if self.framing is not None:
            out.append(monodromies(self.framing, cfg)[0])
        out += [monodromies(d, cfg)[0] for _, d in self.incoming]
        out += [monodromies(d, cfg)[0] for _, d in self.outgoing]
        out += [commutator(x, y) for x, y in self.handles]
        return out

    def monodromy_product(self, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
        return _product(self.factors(cfg), self.dim)

    def defect(self, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
        return self.monodromy_product(cfg) - self.target * identity(self.dim)


def expand_local(rep: Representation, g: NodalCurveGraph, vid: str, cfg: ToleranceConfig = DEFAULT_TOL) -> VertexLocal:
    incoming = tuple((e.id, PhiPsiDiagram(rep.a[e.id], rep.b[e.id])) for e in g.incoming(vid))
    outgoing = tuple((e.id, ft_J(PhiPsiDiagram(rep.a[e.id], rep.b[e.id]), cfg)) for e in g.outgoing(vid))
    fr = rep.framing.get(vid) if g.is_framed(vid) else None
    return VertexLocal(
        vertex=vid,
        dim=rep.dims[vid],
        target=relation_target(g, vid),
        incoming=incoming,
        outgoing=outgoing,
        handles=tuple(rep.handles(vid)),
        framing=None if fr is None else PhiPsiDiagram(fr.v, fr.u),
    )


def expand_all(rep, g, cfg=DEFAULT_TOL) -> dict:
    return {vid: expand_local(rep, g, vid, cfg) for vid in g.vertex_ids}


def glue_from_local(g: NodalCurveGraph, psi_dims: dict, local: dict, cfg: ToleranceConfig = DEFAULT_TOL, framing_dims: dict | None = None) -> Representation:
    """Reassemble a representation with ``V_i = Psi_i``.

    Every edge is read from its target vertex; the diagram stored at the
    source must be the cluster transform of it, to ``eq_tol``.
    """
    a, b, alpha, beta, framing = {}, {}, {}, {}, {}
    for vid in g.vertex_ids:
        loc = local[vid]
        if loc.dim != psi_dims[vid]:
            raise RepresentationError(f"vertex {vid!r}: local dimension {loc.dim} != Psi dimension {psi_dims[vid]}")
        for _, d in loc.incoming + loc.outgoing:
            if d.dim_psi != psi_dims[vid]:
                raise RepresentationError(f"vertex {vid!r}: diagram with dim Psi {d.dim_psi}, expected {psi_dims[vid]}")
        alpha[vid] = [x for x, _ in loc.handles]
        beta[vid] = [y for _, y in loc.handles]
        if loc.framing is not None:
            framing[vid] = Framing(loc.framing.b, loc.framing.a)
    for e in g.edges:
        into = dict(local[e.target].incoming)
        out_of = dict(local[e.source].outgoing)
        if e.id not in into or e.id not in out_of:
            raise RepresentationError(f"edge {e.id!r}: missing local diagram")
        d_t, d_s = into[e.id], out_of[e.id]
        if d_t.dim_phi != psi_dims[e.source]:
            raise RepresentationError(f"edge {e.id!r}: dim Phi {d_t.dim_phi} != dim V_{e.source} {psi_dims[e.source]}")
        expect = ft_J(d_t, cfg)
        if d_s.a.shape != expect.a.shape or max(rel_diff(d_s.a, expect.a), rel_diff(d_s.b, expect.b)) > cfg.eq_tol:
            raise RepresentationError(f"edge {e.id!r}: source diagram is not the Fourier transform of the target diagram")
        a[e.id], b[e.id] = d_t.a.copy(), d_t.b.copy()
    w = dict(framing_dims or {vid: fr.dim_w for vid, fr in framing.items()})
    rep = Representation(DimensionVector(dict(psi_dims), w), a, b, alpha, beta, framing)
    return check_representation(rep, g, cfg)


# --- JSON ----------------------------------------------------------------------------

def representation_to_json(rep: Representation) -> dict:
    return {
        "dims": rep.dims.to_json(),
        "a": {k: matrix_to_json(m) for k, m in rep.a.items()},
        "b": {k: matrix_to_json(m) for k, m in rep.b.items()},
        "alpha": {k: [matrix_to_json(m) for m in ms] for k, ms in rep.alpha.items() if ms},
        "beta": {k: [matrix_to_json(m) for m in ms] for k, ms in rep.beta.items() if ms},
        "framing": {k: {"u": matrix_to_json(f.u), "v": matrix_to_json(f.v)} for k, f in rep.framing.items()},
    }


def representation_from_json(obj) -> Representation:
    try:
        dims = DimensionVector.from_json(obj["dims"])
        a = {str(k): matrix_from_json(m) for k, m in obj.get("a", {}).items()}
        b = {str(k): matrix_from_json(m) for k, m in obj.get("b", {}).items()}
        alpha = {str(k): [matrix_from_json(m) for m in ms] for k, ms in obj.get("alpha", {}).items()}
        beta = {str(k): [matrix_from_json(m) for m in ms] for k, ms in obj.get("beta", {}).items()}
        framing = {str(k): Framing(matrix_from_json(f["u"]), matrix_from_json(f["v"])) for k, f in obj.get("framing", {}).items()}
    except (KeyError, TypeError, AttributeError) as exc:
        raise RepresentationError(f"malformed representation JSON: {exc}") from None
    return Representation(dims, a, b, alpha, beta, framing)
