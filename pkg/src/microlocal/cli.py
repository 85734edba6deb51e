"""Command-line front end.

Every subcommand reads the JSON formats of the library modules, prints one
JSON report (sorted keys, so output bytes depend only on inputs and flags)
and exits with 0 when all checks pass, 1 when a check fails and 2 on usage
or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from . import __version__
from .curve import DimensionVector, GraphError, expected_moduli_dimension, graph_from_json
from .diagrams import (
    ROUNDTRIP_TOL,
    DeRhamNodeData,
    DiagramError,
    PhiPsiDiagram,
    UVDiagram,
    diagram_from_json,
    ft_I,
    ft_J,
    malgrange_from_J,
    malgrange_to_J,
    monodromies,
    validate_derham,
)
from .linalg import LinAlgError, ToleranceConfig, complex_from_json, matrix_from_json, matrix_to_json, rel_diff
from .mpa import (
    RepresentationError,
    VertexLocal,
    expand_all,
    glue_from_local,
    random_representation,
    relation_report,
    relation_target,
    representation_from_json,
    representation_to_json,
)
from .qham import (
    ReductionError,
    SpaceError,
    assemble_moduli,
    check_qh_axioms,
    describe,
    reduction_report,
    solve_moment_fiber,
    space_from_name,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DOMAIN_ERRORS = (DiagramError, LinAlgError, np.linalg.LinAlgError, RepresentationError, SpaceError, ReductionError, GraphError)


class InputError(Exception):
    """Unreadable or malformed input; maps to exit code 2."""


def _load(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _parse(fn, *args):
    try:
        return fn(*args)
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _graph(path):
    return _parse(graph_from_json, _load(path))


def _dims(path):
    return _parse(DimensionVector.from_json, _load(path))


def _space(args):
    """A catalog name, or a JSON file holding a graph (dims from --dims or a 'dims' key)."""
    spec = args.space
    if not spec.endswith(".json"):
        return _parse(space_from_name, spec), None
    obj = _load(spec)
    graph_obj = obj.get("graph", obj)
    dims_obj = obj.get("dims") if args.dims is None else _load(args.dims)
    if dims_obj is None:
        raise InputError("assembled space needs --dims or a 'dims' entry")
    g = _parse(graph_from_json, graph_obj)
    dims = _parse(DimensionVector.from_json, dims_obj)
    return _parse(assemble_moduli, g, dims), g


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InputError(f"not a complex number: {text!r}") from None


def _check(name, residual, tol, passed=None):
    ok = residual < tol if passed is None else passed
    return {"name": name, "residual": residual, "tol": tol, "pass": bool(ok)}


# --- local data JSON ---------------------------------------------------------

def _local_to_json(loc: VertexLocal) -> dict:
    return {
        "vertex": loc.vertex,
        "dim": loc.dim,
        "target": [loc.target.real, loc.target.imag],
        "incoming": [{"edge": e, "diagram": d.to_json()} for e, d in loc.incoming],
        "outgoing": [{"edge": e, "diagram": d.to_json()} for e, d in loc.outgoing],
        "handles": [{"alpha": matrix_to_json(x), "beta": matrix_to_json(y)} for x, y in loc.handles],
        "framing": None if loc.framing is None else loc.framing.to_json(),
    }


def _local_from_json(obj) -> VertexLocal:
    def diag(rec):
        d = diagram_from_json(rec["diagram"])
        if not isinstance(d, PhiPsiDiagram):
            raise DiagramError("local node diagrams must be of kind phi_psi")
        return rec["edge"], d

    fr = obj.get("framing")
    return VertexLocal(
        vertex=obj["vertex"],
        dim=int(obj["dim"]),
        target=complex_from_json(obj.get("target", [1.0, 0.0])),
        incoming=tuple(diag(r) for r in obj.get("incoming", [])),
        outgoing=tuple(diag(r) for r in obj.get("outgoing", [])),
        handles=tuple((matrix_from_json(h["alpha"]), matrix_from_json(h["beta"])) for h in obj.get("handles", [])),
        framing=None if fr is None else diagram_from_json(fr),
    )


# --- subcommands -------------------------------------------------------------------

def cmd_validate_rep(args, cfg):
    g = _graph(args.graph)
    rep = _parse(representation_from_json, _load(args.rep))
    report = relation_report(rep, g, cfg, tol=args.tol)
    checks = [_check(f"relation[{vid}]", nv, args.tol) for vid, nv in sorted(report.norms.items())]
    checks += [{"name": f"finding[{k}]", "message": f, "pass": False} for k, f in enumerate(report.findings)]
    return report.to_json(), checks


def cmd_ft(args, cfg):
    d = _parse(diagram_from_json, _load(args.diagram))
    if args.times < 0:
        raise InputError("--times must be nonnegative")
    checks = []
    if args.mode == "J":
        if not isinstance(d, PhiPsiDiagram):
            raise InputError("mode J needs a phi_psi diagram")
        d.check(cfg)
        out = d
        for _ in range(args.times):
            out = ft_J(out, cfg)
        result = {"diagram": out.to_json()}
    else:
        if not isinstance(d, UVDiagram):
            raise InputError("mode I needs a uv diagram")
        d.check(cfg)
        out = d
        for k in range(args.times):
            # only the input is required to satisfy the strip condition
            out = ft_I(out, cfg, check=k == 0)
        bad = out.strip_violations(cfg)
        # the raw transform is returned; leaving the strip is reported, not rejected
        result = {"diagram": out.to_json(), "strip_violations": [[z.real, z.imag] for z in bad]}
    result["times"] = args.times
    result["mode"] = args.mode
    return result, checks


def cmd_rh(args, cfg):
    d = _parse(diagram_from_json, _load(args.node))
    if args.direction == "to-betti":
        if isinstance(d, DeRhamNodeData):
            rep = validate_derham(d, cfg)
            if not rep.valid:
                return {"derham": rep.to_json()}, [{"name": "derham_node", "pass": False, "residual": max(rep.res_source_residual, rep.res_target_residual), "tol": cfg.eq_tol}]
            d = UVDiagram(d.u, d.v)
        if not isinstance(d, UVDiagram):
            raise InputError("to-betti needs a uv or derham_node diagram")
        out = malgrange_to_J(d, cfg)
        uv = d
        back = malgrange_from_J(out, cfg)
        roundtrip = max(rel_diff(back.u, uv.u), rel_diff(back.v, uv.v))
        diagram = out.to_json()
    else:
        if not isinstance(d, PhiPsiDiagram):
            raise InputError("to-derham needs a phi_psi diagram")
        uv = malgrange_from_J(d, cfg)
        out = malgrange_to_J(uv, cfg, check=False)
        roundtrip = max(rel_diff(out.a, d.a), rel_diff(out.b, d.b))
        diagram = uv.to_json()
    _, t_phi = monodromies(out, cfg)
    exp_law = rel_diff(t_phi, expm(2j * math.pi * (uv.v @ uv.u))) if uv.dim_e else 0.0
    consistency = {"exp_law_residual": exp_law, "roundtrip_residual": roundtrip, "tol": cfg.eq_tol, "roundtrip_tol": ROUNDTRIP_TOL}
    checks = [_check("exp_law", exp_law, cfg.eq_tol), _check("roundtrip", roundtrip, ROUNDTRIP_TOL)]
    return {"diagram": diagram, "consistency": consistency}, checks


def cmd_expand(args, cfg):
    g = _graph(args.graph)
    rep = _parse(representation_from_json, _load(args.rep))
    locs = expand_all(rep, g, cfg)
    out = {vid: _local_to_json(loc) for vid, loc in locs.items()}
    return {"local": out}, []


def cmd_glue(args, cfg):
    g = _graph(args.graph)
    obj = _load(args.local)
    # accepts the bare mapping or a full expand report
    obj = obj.get("result", obj) if isinstance(obj, dict) else obj
    obj = obj.get("local", obj) if isinstance(obj, dict) else obj
    if not isinstance(obj, dict):
        raise InputError("local data must map vertex ids to local records")
    locs = {vid: _parse(_local_from_json, rec) for vid, rec in obj.items()}
    psi = {vid: loc.dim for vid, loc in locs.items()}
    rep = glue_from_local(g, psi, locs, cfg)
    # relation defects are reported, not judged: gluing applies to any local data
    report = relation_report(rep, g, cfg)
    return {"representation": representation_to_json(rep), "relations": report.to_json()}, [{"name": "ft_consistency", "pass": True}]


def cmd_qh_check(args, cfg):
    space, _ = _space(args)
    rep = check_qh_axioms(space, points=args.points, triples=args.triples, cfg=cfg, seed=args.seed)
    j = rep.to_json()
    checks = []
    for name, val in j["checks"].items():
        if name == "qh3":
            ok = val["dim_mismatches"] == 0 and val["max_angle"] < val["tol"]
        else:
            ok = val["residual"] < val["tol"]
        checks.append({"name": name, **val, "pass": bool(ok)})
    return j, checks


def cmd_assemble(args, cfg):
    g = _graph(args.graph)
    dims = _dims(args.dims)
    space = assemble_moduli(g, dims)
    want = expected_moduli_dimension(g, dims)
    out = describe(space)
    out["expected_dim"] = want
    return out, [{"name": "dimension", "pass": space.dim == want, "residual": abs(space.dim - want), "tol": 0}]


def _target(args, g, slots):
    """Explicit scalar target, else the relation targets of the vertex slots."""
    if args.target is not None:
        return _complex_arg(args.target)
    if g is None or slots is None:
        return 1.0
    return [relation_target(g, s) if s in g.vertex_ids else 1.0 for s in slots]


def _default_slots(space, g, slots_arg):
    if slots_arg:
        return slots_arg.split(",")
    if g is not None:
        return list(g.vertex_ids)
    return None


def cmd_solve_fiber(args, cfg):
    space, g = _space(args)
    slots = _default_slots(space, g, args.slots)
    res = solve_moment_fiber(space, _target(args, g, slots), seed=args.seed, max_iter=args.max_iter, slots=slots)
    return res.to_json(space), [{"name": "converged", "pass": res.success, "residual": res.residual, "tol": 1e-10}]


def _read_point(space, path):
    obj = _load(path)
    try:
        return space.check_point([matrix_from_json(obj[b.name]) for b in space.layout])
    except (KeyError, ValueError) as exc:
        raise InputError(f"point file: {exc}") from None


def cmd_reduce(args, cfg):
    space, g = _space(args)
    slots = _default_slots(space, g, args.slots)
    fiber = None
    if args.origin:
        x = space.zero_tangent()
    elif args.point:
        x = _read_point(space, args.point)
    else:
        fiber = solve_moment_fiber(space, 1.0, seed=args.seed, max_iter=args.max_iter, slots=slots)
        if not fiber.success:
            return {"fiber": fiber.to_json(space)}, [{"name": "fiber", "pass": False, "residual": fiber.residual, "tol": 1e-10}]
        x = fiber.point
    rep = reduction_report(space, x, slots, cfg)
    out = {"reduction": rep.to_json()}
    if fiber is not None:
        out["fiber"] = {k: v for k, v in fiber.to_json(space).items() if k != "point"}
    checks = [
        {"name": "reduced_form_even", "pass": rep.reduced_form_rank % 2 == 0},
        {"name": "reduced_form_nondegenerate", "pass": rep.nondegenerate},
    ]
    return out, checks


def cmd_randgen(args, cfg):
    g = _graph(args.graph)
    dims = _dims(args.dims)
    rep = random_representation(g, dims, seed=args.seed, radius=args.radius, cfg=cfg)
    return {"representation": representation_to_json(rep)}, []


# --- driver ------------------------------------------------------------------------

def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # subcommands repeat the flags with suppressed defaults so either position works
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=d(1e-10), help="equality tolerance (default 1e-10)")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--json-out", metavar="PATH", default=d(None), help="also write the report to PATH")
    p.add_argument("--quiet", action="store_true", default=d(False), help="suppress the report on stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(False)
    p = argparse.ArgumentParser(prog="microlocal", description=__doc__.splitlines()[0], parents=[_global_flags(True)])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate-rep", parents=[common], help="check the vertex relations of a representation")
    s.add_argument("--graph", required=True)
    s.add_argument("--rep", required=True)
    s.set_defaults(func=cmd_validate_rep)

    s = sub.add_parser("ft", parents=[common], help="Fourier transform of a local diagram")
    s.add_argument("--diagram", required=True)
    s.add_argument("--mode", choices=["J", "I"], default="J")
    s.add_argument("--times", type=int, default=1)
    s.set_defaults(func=cmd_ft)

    s = sub.add_parser("rh", parents=[common], help="Malgrange correspondence at a node")
    s.add_argument("--node", required=True)
    s.add_argument("--direction", choices=["to-betti", "to-derham"], default="to-betti")
    s.set_defaults(func=cmd_rh)

    s = sub.add_parser("expand", parents=[common], help="per-vertex local diagrams of a representation")
    s.add_argument("--graph", required=True)
    s.add_argument("--rep", required=True)
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("glue", parents=[common], help="representation from per-vertex local diagrams")
    s.add_argument("--graph", required=True)
    s.add_argument("--local", required=True)
    s.set_defaults(func=cmd_glue)

    for name, func, helptext in (
        ("qh-check", cmd_qh_check, "verify the quasi-Hamiltonian axioms"),
        ("solve-fiber", cmd_solve_fiber, "find a point of a moment fiber"),
        ("reduce", cmd_reduce, "reduction report at a point of the unit fiber"),
    ):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--space", required=True, help="catalog name (double:2, fused_double:2, vdb:1,2, double*double:2, point:1) or graph JSON")
        s.add_argument("--dims", help="dimension vector JSON for an assembled space")
        s.set_defaults(func=func)
        if name == "qh-check":
            s.add_argument("--points", type=int, default=20)
            s.add_argument("--triples", type=int, default=10)
        else:
            s.add_argument("--slots", help="comma-separated slot names (default: all, or the vertex slots)")
            s.add_argument("--max-iter", type=int, default=200)
        if name == "solve-fiber":
            s.add_argument("--target", help="scalar target, e.g. -1 or 1j (default: twists q^d, or 1)")
        if name == "reduce":
            g = s.add_mutually_exclusive_group()
            g.add_argument("--origin", action="store_true", help="use the zero point")
            g.add_argument("--point", help="point JSON keyed by block name")

    s = sub.add_parser("assemble", parents=[common], help="assemble the moduli space of a graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--dims", required=True)
    s.set_defaults(func=cmd_assemble)

    s = sub.add_parser("randgen", parents=[common], help="seeded random representation")
    s.add_argument("--graph", required=True)
    s.add_argument("--dims", required=True)
    s.add_argument("--radius", type=float, default=0.1)
    s.set_defaults(func=cmd_randgen)
    return p


def _emit(report, args):
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"
    if args.json_out:
        Path(args.json_out).write_text(text)
    if not args.quiet:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj).__name__}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = ToleranceConfig(eq_tol=args.tol)
    except ValueError as exc:
        parser.error(str(exc))
    report = {
        "command": args.command,
        "argv": argv,
        "config": {**cfg.to_json(), "seed": args.seed},
        "version": __version__,
    }
    try:
        result, checks = args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DOMAIN_ERRORS as exc:
        report.update(result={"error": str(exc)}, checks=[{"name": "run", "pass": False}], summary={"passed": 0, "failed": 1})
        _emit(report, args)
        return EXIT_FAIL
    checks = sorted(checks, key=lambda c: c["name"])
    failed = sum(not c["pass"] for c in checks)
    report.update(result=result, checks=checks, summary={"passed": len(checks) - failed, "failed": failed})
    _emit(report, args)
    return EXIT_OK if failed == 0 else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
