import math

import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])


def crandn(rng, *shape, scale=1.0):
    return scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


def random_phipsi(rng, n_phi, n_psi, scale=0.5):
    s = scale / math.sqrt(max(n_phi, n_psi, 1))
    from microlocal.diagrams import PhiPsiDiagram

    return PhiPsiDiagram(crandn(rng, n_psi, n_phi, scale=s), crandn(rng, n_phi, n_psi, scale=s))


def random_uv(rng, n_e, n_f):
    """(u, v) with the spectra of vu and uv in (0.05, 0.95) + i(-1, 1)."""
    from microlocal.diagrams import UVDiagram

    k = min(n_e, n_f)
    lam = rng.uniform(0.05, 0.95, k) + 1j * rng.uniform(-1, 1, k)
    p = np.eye(k) + crandn(rng, k, k, scale=0.2)
    x = p @ np.diag(lam) @ np.linalg.inv(p)
    if n_e <= n_f:
        u = crandn(rng, n_f, n_e)
        v = x @ np.linalg.pinv(u)
    else:
        v = crandn(rng, n_e, n_f)
        u = x @ np.linalg.pinv(v)
    return UVDiagram(u, v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _mat(x):
    from microlocal.linalg import matrix_to_json

    return matrix_to_json(np.array(x, dtype=complex))


def write_cli_inputs(root):
    """Input files for the CLI tests; returns name -> path string."""
    import json

    from microlocal.curve import DimensionVector, from_components, graph_to_json
    from microlocal.mpa import Representation, representation_to_json

    a2 = from_components([(0, 0), (0, 0)], [(0, 1)])
    a2dims = DimensionVector({"v0": 1, "v1": 1})
    jordan = from_components([(0, 0)], [(0, 0)])
    g1 = from_components([(1, 0)], [])
    rep = lambda dims, a, b: representation_to_json(
        Representation(dims, {"e0": np.array(a, complex)}, {"e0": np.array(b, complex)})
    )
    files = {
        "a2": graph_to_json(a2),
        "a2dims": a2dims.to_json(),
        "a2zero": rep(a2dims, [[0]], [[0]]),
        "a2bad": rep(a2dims, [[1e-3]], [[1e-3]]),
        "jordan": graph_to_json(jordan),
        "jordanrep": rep(DimensionVector({"v0": 2}), [[0, 1], [0, 0]], [[0, 0], [1, 0]]),
        "j23": {"kind": "phi_psi", "a": _mat([[2]]), "b": _mat([[3]])},
        "uv": {"kind": "uv", "u": _mat([[1]]), "v": _mat([[0.25j]])},
        "g1": {"graph": graph_to_json(g1), "dims": {"v": {"v0": 2}}},
    }
    out = {}
    for name, obj in files.items():
        path = root / f"{name}.json"
        path.write_text(json.dumps(obj))
        out[name] = str(path)
    bad = root / "malformed.json"
    bad.write_text("{")
    out["malformed"] = str(bad)
    return out


@pytest.fixture
def cli_inputs(tmp_path):
    return write_cli_inputs(tmp_path)


def run_cli(argv, capsys):
    """Run the CLI in-process; returns (exit code, parsed JSON report or None)."""
    import json

    from microlocal.cli import main

    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)
