"""Named spaces for the command line: ``double:2``, ``fused_double:2``, ``vdb:1,2``, ``double*double:2``, ``point:1``."""

from __future__ import annotations

from .spaces import QHSpace, SpaceError, double, extrinsic_fuse, fused_double, point_space, vdb_space


def _ints(arg: str, count: int) -> list[int]:
    try:
        vals = [int(t) for t in arg.split(",")]
    except ValueError:
        raise SpaceError(f"bad size list {arg!r}") from None
    if len(vals) != count:
        raise SpaceError(f"expected {count} sizes, got {arg!r}")
    return vals


def double_double(n: int) -> QHSpace:
    """Extrinsic fusion of two doubles along the second slot of the first and the first of the second."""
    return extrinsic_fuse(double(n), double(n), 1, 0, name=f"double({n}) (*) double({n})")


BUILDERS = {
    "double": (1, double),
    "fused_double": (1, fused_double),
    "vdb": (2, vdb_space),
    "double*double": (1, double_double),
    "point": (1, point_space),
}


def space_from_name(spec: str) -> QHSpace:
    kind, _, args = spec.partition(":")
    if kind not in BUILDERS:
        raise SpaceError(f"unknown space {kind!r}; known: {sorted(BUILDERS)}")
    count, build = BUILDERS[kind]
    return build(*_ints(args, count))
