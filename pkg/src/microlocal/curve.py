"""Nodal curves as decorated intersection graphs.

A component is a vertex carrying its genus and the degree of the line bundle
pulled back to it; a node is an edge.  The edge list order is the total order
on nodes used by every relation product, so it is significant for
serialization.  Each edge is oriented ``source -> target``: the source is the
component containing the first preimage of the node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .linalg import complex_from_json, complex_to_json


@dataclass(frozen=True)
class Vertex:
    id: str
    genus: int = 0
    degree: int = 0
    label: str = ""


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str

    @property
    def is_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class NodalCurveGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    q: complex = 1.0
    framed_vertices: tuple[str, ...] = ()
    q_overrides: Mapping[str, complex] = field(default_factory=dict)

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(f"no vertex {vid!r}")

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(f"no edge {eid!r}")

    @property
    def vertex_ids(self) -> list[str]:
        return [v.id for v in self.vertices]

    def incoming(self, vid: str) -> list[Edge]:
        """Edges with target ``vid``, in the global edge order."""
        return [e for e in self.edges if e.target == vid]

    def outgoing(self, vid: str) -> list[Edge]:
        return [e for e in self.edges if e.source == vid]

    def is_framed(self, vid: str) -> bool:
        return vid in self.framed_vertices

    def twist(self, vid: str) -> complex:
        """q_i = q^{d_i}, unless an explicit override is given for the vertex."""
        if vid in self.q_overrides:
            return complex(self.q_overrides[vid])
        return complex(self.q) ** self.vertex(vid).degree


@dataclass(frozen=True)
class DimensionVector:
    """dim V_i for every vertex, and dim W_i for framed vertices."""

    v: Mapping[str, int]
    w: Mapping[str, int] = field(default_factory=dict)

    def __getitem__(self, vid: str) -> int:
        return self.v[vid]

    def framing(self, vid: str) -> int:
        return self.w.get(vid, 0)

    def to_json(self) -> dict:
        return {"v": dict(self.v), "w": dict(self.w)}

    @classmethod
    def from_json(cls, obj) -> "DimensionVector":
        if "v" in obj:
            return cls(v={str(k): int(n) for k, n in obj["v"].items()},
                       w={str(k): int(n) for k, n in obj.get("w", {}).items()})
        return cls(v={str(k): int(n) for k, n in obj.items()})


class GraphError(ValueError):
    pass


def validate_graph(g: NodalCurveGraph) -> list[str]:
    """Return the list of invariant violations (empty iff the graph is valid)."""
    problems = []
    ids = [v.id for v in g.vertices]
    seen = set()
    for vid in ids:
        if vid in seen:
            problems.append(f"duplicate vertex id {vid!r}")
        seen.add(vid)
    for v in g.vertices:
        if not isinstance(v.genus, int) or isinstance(v.genus, bool) or v.genus < 0:
            problems.append(f"vertex {v.id!r}: genus must be a nonnegative integer, got {v.genus!r}")
        if not isinstance(v.degree, int) or isinstance(v.degree, bool):
            problems.append(f"vertex {v.id!r}: degree must be an integer, got {v.degree!r}")
    eids = set()
    for e in g.edges:
        if e.id in eids:
            problems.append(f"duplicate edge id {e.id!r}")
        eids.add(e.id)
        for end in (e.source, e.target):
            if end not in seen:
                problems.append(f"edge {e.id!r} references missing vertex {end!r}")
    if complex(g.q) == 0:
        problems.append("q must be nonzero")
    for vid, qi in g.q_overrides.items():
        if vid not in seen:
            problems.append(f"q override for missing vertex {vid!r}")
        if complex(qi) == 0:
            problems.append(f"q override for {vid!r} must be nonzero")
    framed = list(g.framed_vertices)
    for vid in set(framed):
        if vid not in seen:
            problems.append(f"framing on missing vertex {vid!r}")
        if framed.count(vid) > 1:
            problems.append(f"vertex {vid!r} carries {framed.count(vid)} framing points; at most one is supported")
    return problems


def check_graph(g: NodalCurveGraph) -> NodalCurveGraph:
    problems = validate_graph(g)
    if problems:
        raise GraphError("; ".join(problems))
    return g


def validate_dims(g: NodalCurveGraph, dims: DimensionVector) -> list[str]:
    problems = []
    for vid in g.vertex_ids:
        if vid not in dims.v:
            problems.append(f"no dimension for vertex {vid!r}")
        elif dims.v[vid] < 0:
            problems.append(f"negative dimension at {vid!r}")
    for vid in dims.w:
        if not g.is_framed(vid):
            problems.append(f"framing dimension given for unframed vertex {vid!r}")
        elif dims.w[vid] < 0:
            problems.append(f"negative framing dimension at {vid!r}")
    return problems


def from_components(
    components: Sequence[tuple[int, int]],
    nodes: Sequence[tuple[int, int]],
    q: complex = 1.0,
    framed: Sequence[int] = (),
) -> NodalCurveGraph:
    """Build the graph of a curve from (genus, degree) pairs and node incidences.

    Vertex ids are ``"v0", "v1", ...``, edge ids ``"e0", "e1", ...`` in node order.
    """
    n = len(components)
    vertices = tuple(Vertex(id=f"v{i}", genus=int(gen), degree=int(deg)) for i, (gen, deg) in enumerate(components))
    edges = []
    for k, (s, t) in enumerate(nodes):
        if not (0 <= s < n and 0 <= t < n):
            raise GraphError(f"node {k} references component outside 0..{n - 1}")
        edges.append(Edge(id=f"e{k}", source=f"v{s}", target=f"v{t}"))
    for i in framed:
        if not 0 <= i < n:
            raise GraphError(f"framing on component {i} outside 0..{n - 1}")
    return check_graph(
        NodalCurveGraph(vertices=vertices, edges=tuple(edges), q=complex(q), framed_vertices=tuple(f"v{i}" for i in framed))
    )


def expected_moduli_dimension(g: NodalCurveGraph, dims: DimensionVector) -> int:
    """Ambient dimension of the assembled framed moduli space before reduction."""
    total = sum(2 * v.genus * dims[v.id] ** 2 for v in g.vertices)
    total += sum(2 * dims[e.source] * dims[e.target] for e in g.edges)
    total += sum(2 * dims[vid] * dims.framing(vid) for vid in g.framed_vertices)
    return total


# --- JSON --------------------------------------------------------------------

def graph_to_json(g: NodalCurveGraph) -> dict:
    out = {
        "q": complex_to_json(g.q),
        "vertices": [
            {"id": v.id, "genus": v.genus, "degree": v.degree, "framed": g.is_framed(v.id), **({"label": v.label} if v.label else {})}
            for v in g.vertices
        ],
        "edges": [{"id": e.id, "source": e.source, "target": e.target} for e in g.edges],
    }
    if g.q_overrides:
        out["q_overrides"] = {k: complex_to_json(z) for k, z in g.q_overrides.items()}
    return out


def graph_from_json(obj, *, check: bool = True) -> NodalCurveGraph:
    try:
        vertices, framed = [], []
        for rec in obj["vertices"]:
            vid = str(rec["id"])
            vertices.append(Vertex(id=vid, genus=rec.get("genus", 0), degree=rec.get("degree", 0), label=rec.get("label", "")))
            # "framed" is a bool or a mark count; counts above one are rejected by validation
            framed.extend([vid] * int(rec.get("framed", False)))
        edges = [Edge(id=str(r["id"]), source=str(r["source"]), target=str(r["target"])) for r in obj.get("edges", [])]
        q = complex_from_json(obj.get("q", [1.0, 0.0]))
        overrides = {str(k): complex_from_json(z) for k, z in obj.get("q_overrides", {}).items()}
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph JSON: {exc}") from None
    g = NodalCurveGraph(vertices=tuple(vertices), edges=tuple(edges), q=q, framed_vertices=tuple(framed), q_overrides=overrides)
    return check_graph(g) if check else g
