"""Assembly of the framed moduli space of a decorated nodal curve graph.

Elementary pieces, one product factor each:

* edge ``h: s -> t``: ``vdb_space(n_t, n_s)`` on the pair ``(b_h, a_h)``, so its
  slots carry ``(1 + b_h a_h)^{-1}`` at ``V_s`` and ``1 + a_h b_h`` at ``V_t``;
* framed vertex ``i``: ``vdb_space(n_i, w_i)`` on ``(u_i, v_i)``, giving
  ``1 + v_i u_i`` at ``V_i`` and a residual ``GL(W_i)`` slot;
* handle ``nu`` at ``i``: ``fused_double(n_i)`` on ``(alpha_nu, beta_nu)``.

At each vertex the slots are then fused in the relation order (framing,
incoming edges, outgoing edges, handles), so the moment at ``V_i`` is exactly
the left-hand side of the vertex relation.
"""

from __future__ import annotations

import numpy as np

from ..curve import DimensionVector, NodalCurveGraph, check_graph, validate_dims
from ..mpa import Framing, Representation
from .spaces import QHSpace, SpaceError, fuse, fused_double, point_space, product, rename, vdb_space


def framing_slot(vid: str) -> str:
    return f"W[{vid}]"


def assemble_moduli(g: NodalCurveGraph, dims: DimensionVector) -> QHSpace:
    check_graph(g)
    problems = validate_dims(g, dims)
    if problems:
        raise SpaceError("; ".join(problems))
    for vid in g.vertex_ids:
        if dims[vid] < 1:
            raise SpaceError(f"vertex {vid!r}: dimension must be positive to carry a GL slot")

    pieces, prefixes = [], []
    # per vertex, the pending slots in relation order
    order: dict[str, list[str]] = {vid: [] for vid in g.vertex_ids}
    framing_slots = []

    for vid in g.framed_vertices:
        n, w = dims[vid], dims.framing(vid)
        if w < 1:
            continue
        sp = rename(vdb_space(n, w), blocks=[f"u[{vid}]", f"v[{vid}]"], slots=[framing_slot(vid), vid])
        pieces.append(sp)
        prefixes.append(f"f{vid}:")
        order[vid].append(f"f{vid}:{vid}")
        framing_slots.append(f"f{vid}:{framing_slot(vid)}")
    for e in g.edges:
        ns, nt = dims[e.source], dims[e.target]
        sp = rename(vdb_space(nt, ns), blocks=[f"b[{e.id}]", f"a[{e.id}]"], slots=["s", "t"])
        pieces.append(sp)
        prefixes.append(f"e{e.id}:")
    for vid in g.vertex_ids:
        order[vid].extend(f"e{e.id}:t" for e in g.incoming(vid))
        order[vid].extend(f"e{e.id}:s" for e in g.outgoing(vid))
    for v in g.vertices:
        n = dims[v.id]
        for nu in range(1, v.genus + 1):
            sp = rename(fused_double(n), blocks=[f"alpha[{v.id}][{nu}]", f"beta[{v.id}][{nu}]"], slots=["h"])
            pieces.append(sp)
            prefixes.append(f"h{v.id}.{nu}:")
            order[v.id].append(f"h{v.id}.{nu}:h")
    for vid in g.vertex_ids:
        if not order[vid]:
            pieces.append(point_space(dims[vid]))
            prefixes.append(f"p{vid}:")
            order[vid].append(f"p{vid}:1")

    space = product(pieces, prefixes)
    for vid in g.vertex_ids:
        slots = order[vid]
        current = slots[0]
        for nxt in slots[1:]:
            space = fuse(space, current, nxt)
            current = f"{current}*{nxt}"
        order[vid] = [current]

    # final slot order: vertices, then framings; names are the vertex ids
    names = {order[vid][0]: vid for vid in g.vertex_ids}
    names.update({s: s.split(":", 1)[1] for s in framing_slots})
    want = [order[vid][0] for vid in g.vertex_ids] + framing_slots
    space = _reorder_slots(space, want)
    space = rename(space, slots=[names[s.name] for s in space.slots], name=f"M({len(g.vertices)} vertices, {len(g.edges)} edges)")
    return space


def _reorder_slots(space: QHSpace, want: list[str]) -> QHSpace:
    perm = [space.slot_index(nm) for nm in want]
    if sorted(perm) != list(range(len(space.slots))):
        raise SpaceError("slot reordering is not a permutation")
    inv_perm = np.argsort(perm)

    def act(gs, x):
        return space.act([gs[int(inv_perm[k])] for k in range(len(perm))], x)

    def moment(x):
        m = space.moment(x)
        return [m[k] for k in perm]

    return QHSpace(
        name=space.name,
        layout=space.layout,
        slots=tuple(space.slots[k] for k in perm),
        act=act,
        moment=moment,
        omega=space.omega,
        sampler=space.sampler,
        gram=space.gram,
        notes=space.notes,
    )


def point_from_representation(space: QHSpace, rep: Representation) -> tuple:
    """Read a representation as a point of the assembled space, matching block names."""
    lookup = {}
    for eid in rep.a:
        lookup[f"a[{eid}]"] = rep.a[eid]
        lookup[f"b[{eid}]"] = rep.b[eid]
    for vid, fr in rep.framing.items():
        lookup[f"u[{vid}]"] = fr.u
        lookup[f"v[{vid}]"] = fr.v
    for vid, xs in rep.alpha.items():
        for nu, x in enumerate(xs, start=1):
            lookup[f"alpha[{vid}][{nu}]"] = x
    for vid, ys in rep.beta.items():
        for nu, y in enumerate(ys, start=1):
            lookup[f"beta[{vid}][{nu}]"] = y
    out = []
    for b in space.layout:
        key = b.name.split(":", 1)[1]
        if key not in lookup:
            raise SpaceError(f"representation has no data for block {key!r}")
        out.append(np.asarray(lookup[key], complex))
    return space.check_point(out)


def representation_from_point(space: QHSpace, g: NodalCurveGraph, dims: DimensionVector, x) -> Representation:
    blocks = {b.name.split(":", 1)[1]: np.asarray(p, complex) for b, p in zip(space.layout, x)}
    a = {e.id: blocks[f"a[{e.id}]"] for e in g.edges}
    b = {e.id: blocks[f"b[{e.id}]"] for e in g.edges}
    alpha = {v.id: [blocks[f"alpha[{v.id}][{nu}]"] for nu in range(1, v.genus + 1)] for v in g.vertices}
    beta = {v.id: [blocks[f"beta[{v.id}][{nu}]"] for nu in range(1, v.genus + 1)] for v in g.vertices}
    framing = {}
    for vid in g.framed_vertices:
        if f"u[{vid}]" in blocks:
            framing[vid] = Framing(blocks[f"u[{vid}]"], blocks[f"v[{vid}]"])
        else:
            n = dims[vid]
            framing[vid] = Framing(np.zeros((0, n), complex), np.zeros((n, 0), complex))
    return Representation(dims, a, b, alpha, beta, framing)


def describe(space: QHSpace) -> dict:
    return {
        "name": space.name,
        "dim": space.dim,
        "layout": [{"name": b.name, "shape": list(b.shape)} for b in space.layout],
        "slots": [{"name": s.name, "size": s.size} for s in space.slots],
        "notes": list(space.notes),
    }
