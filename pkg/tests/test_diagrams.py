import math
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from microlocal.diagrams import (
    DeRhamNodeData,
    DiagramError,
    PhiPsiDiagram,
    StripBoundaryWarning,
    UVDiagram,
    antipodal,
    diagram_from_json,
    ft_I,
    ft_J,
    ft_J_squared_iso,
    intertwining_residuals,
    malgrange_from_J,
    malgrange_to_J,
    monodromies,
    strip_violations,
    validate_derham,
)
from microlocal.linalg import rel_diff

from conftest import random_phipsi, random_uv


def test_phipsi_invariant():
    with pytest.raises(DiagramError):
        PhiPsiDiagram([[1]], [[-1]]).check()
    with pytest.raises(DiagramError):
        PhiPsiDiagram(np.zeros((2, 3)), np.zeros((2, 3)))


def test_ft_J_examples():
    z = ft_J(PhiPsiDiagram([[0]], [[0]]))
    assert np.allclose(z.a, 0) and np.allclose(z.b, 0)
    d = ft_J(PhiPsiDiagram([[2]], [[3]]))
    assert np.allclose(d.a, [[-3]]) and np.allclose(d.b, [[2 / 7]])


def test_ft_J_swaps_dimensions(rng):
    d = random_phipsi(rng, 2, 5)
    out = ft_J(d)
    assert (out.dim_phi, out.dim_psi) == (5, 2)


def test_ft_I_examples():
    z = ft_I(UVDiagram([[0]], [[0]]))
    assert np.allclose(z.u, 0) and np.allclose(z.v, 0)
    d = ft_I(UVDiagram([[1]], [[0.25j]]))
    assert np.allclose(d.u, [[0.25j]]) and np.allclose(d.v, [[-1]])
    dd = ft_I(d, check=False)
    assert np.allclose(dd.u, [[-1]]) and np.allclose(dd.v, [[-0.25j]])


def test_ft_I_flags_strip_exit():
    with pytest.warns(StripBoundaryWarning):
        out = ft_I(UVDiagram([[1]], [[0.5]]))
    assert out.strip_violations()


def test_malgrange_examples():
    z = malgrange_to_J(UVDiagram([[0]], [[0]]))
    assert np.allclose(z.a, 0) and np.allclose(z.b, 0)
    d = malgrange_to_J(UVDiagram([[1]], [[0.25]]))
    assert np.allclose(d.a, [[1]]) and np.allclose(d.b, [[1j - 1]])
    assert np.allclose(monodromies(d)[1], [[1j]])
    back = malgrange_from_J(PhiPsiDiagram([[1]], [[1j - 1]]))
    assert np.allclose(back.u, [[1]]) and np.allclose(back.v, [[0.25]])
    zero = malgrange_from_J(PhiPsiDiagram([[0]], [[0]]))
    assert np.allclose(zero.v, 0)


def test_monodromy_examples(rng):
    t_psi, t_phi = monodromies(PhiPsiDiagram([[0]], [[0]]))
    assert np.allclose(t_psi, 1) and np.allclose(t_phi, 1)
    t_psi, t_phi = monodromies(PhiPsiDiagram([[2]], [[3]]))
    assert np.allclose(t_psi, 7) and np.allclose(t_phi, 7)
    d = random_phipsi(rng, 2, 4)
    t_psi, t_phi = monodromies(d)
    ev_psi = np.linalg.eigvals(t_psi)
    ev_phi = np.linalg.eigvals(t_phi)
    # Sylvester: the non-unit eigenvalues agree; T_psi has extra unit ones
    nontriv = sorted(ev_psi, key=lambda z: abs(z - 1))[2:]
    assert all(min(abs(z - w) for w in ev_phi) < 1e-8 for z in nontriv)


def test_validate_derham_examples():
    assert validate_derham(DeRhamNodeData.from_uv([[0]], [[0]])).valid
    d = DeRhamNodeData([[1]], [[0.3j]], [[0.3j]], [[-0.3j]])
    assert validate_derham(d).valid
    r = validate_derham(DeRhamNodeData.from_uv([[1]], [[0.5]]))
    assert not r.valid and np.allclose(r.strip_violations, [-0.5])
    r = validate_derham(DeRhamNodeData([[1]], [[0.3j]], [[0.3j]], [[0.3j]]))
    assert not r.valid and r.res_target_residual > 0.1
    with pytest.raises(DiagramError):
        DeRhamNodeData(np.zeros((2, 1)), np.zeros((1, 2)), np.zeros((2, 2)), np.zeros((2, 2)))


def test_strip_collar():
    assert strip_violations([-1e-12, 0.5]) == []
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        assert strip_violations([1 - 1e-12]) == [1 - 1e-12]
    assert rec


def test_cluster_identity_and_double_transform(rng):
    for n_phi in range(1, 4):
        for n_psi in range(1, 4):
            d = random_phipsi(rng, n_phi, n_psi)
            t_psi, t_phi = monodromies(d)
            p = ft_J(d)
            tp_psi, tp_phi = monodromies(p)
            assert rel_diff(tp_psi, np.linalg.inv(t_phi)) < 1e-10
            assert rel_diff(tp_phi, np.linalg.inv(t_psi)) < 1e-10
            dd = ft_J(p)
            assert rel_diff(dd.a, -np.linalg.inv(t_psi) @ d.a) < 1e-10
            assert rel_diff(dd.b, -d.b @ t_psi) < 1e-10
            pp, qq = ft_J_squared_iso(d)
            assert max(intertwining_residuals(pp, qq, dd, antipodal(d))) < 1e-10


def test_ft_J_spectral_compatibility(rng):
    d = random_phipsi(rng, 3, 3)
    before = np.sort_complex(1 / np.linalg.eigvals(monodromies(d)[1]))
    after = np.sort_complex(np.linalg.eigvals(monodromies(ft_J(d))[0]))
    assert np.allclose(before, after)


@pytest.mark.filterwarnings("ignore::microlocal.linalg.BranchCutWarning")
def test_malgrange_laws(rng):
    for n_e, n_f in [(1, 1), (2, 3), (3, 2), (4, 4)]:
        uv = random_uv(rng, n_e, n_f)
        assert uv.is_valid()
        j = malgrange_to_J(uv)
        assert rel_diff(monodromies(j)[1], expm(2j * math.pi * uv.v @ uv.u)) < 1e-10
        back = malgrange_from_J(j)
        assert max(rel_diff(back.u, uv.u), rel_diff(back.v, uv.v)) < 1e-8


def test_json_roundtrip(rng):
    for d in (random_phipsi(rng, 2, 1), random_uv(rng, 2, 2), DeRhamNodeData.from_uv([[1]], [[0.2]])):
        back = diagram_from_json(d.to_json())
        assert type(back) is type(d) and back.to_json() == d.to_json()
    with pytest.raises(DiagramError):
        diagram_from_json({"kind": "nope"})
