import itertools
from itertools import permutations

import numpy as np
import pytest

from microlocal.curve import DimensionVector, expected_moduli_dimension, from_components
from microlocal.linalg import rel_diff
from microlocal.mpa import random_representation, relation_product, relation_report
from microlocal.qham import (
    ReductionError,
    SpaceError,
    assemble_moduli,
    cartan_eta,
    check_qh_axioms,
    double,
    double_double,
    extrinsic_fuse,
    fuse,
    fused_double,
    gram_by_entries,
    point_from_representation,
    product,
    qh3_check,
    reduction_report,
    representation_from_point,
    solve_moment_fiber,
    space_from_name,
    vdb_space,
)
from microlocal.qham.assemble import framing_slot
from microlocal.qham.spaces import DOUBLE_MOMENTS

from conftest import crandn

SX = np.array([[0, 1], [1, 0]], complex)
SZ = np.array([[1, 0], [0, -1]], complex)
E = np.eye(2, dtype=complex)


def eta_oracle(g, x, y, z):
    """Six-term signed sum of tr(p [r, s]) / 12, written out by hand."""
    gi = np.linalg.inv(g)
    a, b, c = gi @ x, gi @ y, gi @ z
    t = lambda p, r, s: np.trace(p @ (r @ s - s @ r))
    return (t(a, b, c) - t(a, c, b) - t(b, a, c) + t(b, c, a) + t(c, a, b) - t(c, b, a)) / 12


def test_cartan_eta_examples(rng):
    e12, e21 = np.array([[0, 1], [0, 0]], complex), np.array([[0, 0], [1, 0]], complex)
    assert np.isclose(cartan_eta(E, e12, e21, SZ), 1.0)
    assert np.isclose(cartan_eta(E, e12, 2 * e12, SZ), 0)
    assert cartan_eta(np.array([[2.0]]), np.array([[1.0]]), np.array([[3.0]]), np.array([[5.0]])) == 0
    for _ in range(10):
        g = np.eye(3) + crandn(rng, 3, 3, scale=0.3)
        x, y, z = (crandn(rng, 3, 3) for _ in range(3))
        assert np.isclose(cartan_eta(g, x, y, z), eta_oracle(g, x, y, z))
        vals = [cartan_eta(g, *p) for p in permutations((x, y, z))]
        assert np.isclose(vals[0], -vals[1])


def test_double_examples():
    d = double(2)
    assert all(np.allclose(m, E) for m in d.moment_at((E, E)))
    m = double(1).moment_at((np.array([[2.0]]), np.array([[3.0]])))
    assert np.allclose(m[0], 6) and np.allclose(m[1], 1 / 6)


def test_fused_double_pauli():
    assert np.allclose(fused_double(2).moment_at((SX, SZ))[0], -E)
    assert np.allclose(fused_double(2).moment_at((E, E))[0], E)


def test_vdb_examples():
    m = vdb_space(1, 1).moment_at((np.array([[2.0]]), np.array([[3.0]])))
    assert np.allclose(m[0], 1 / 7) and np.allclose(m[1], 7)
    v = vdb_space(2, 3)
    assert v.dim == 12 and [s.size for s in v.slots] == [3, 2]
    assert all(np.allclose(m, np.eye(m.shape[0])) for m in v.moment_at(v.zero_tangent()))


def test_fuse_double_equals_fused_double(rng):
    a = fuse(double(2), 0, 1)
    b = fused_double(2)
    x = b.sample(rng)
    assert np.allclose(a.moment_at(x)[0], b.moment_at(x)[0])
    assert np.allclose(a.gram_matrix(x), b.gram_matrix(x))


def test_fuse_errors():
    with pytest.raises(SpaceError):
        fuse(vdb_space(1, 2), 0, 1)
    with pytest.raises(SpaceError):
        fuse(double(1), 0, 0)


def test_extrinsic_fuse_scalar_moment(rng):
    s = extrinsic_fuse(double(1), double(1), 1, 0)
    x = s.sample(rng)
    a1, b1, a2, b2 = (p[0, 0] for p in x)
    m = s.moment_at(x)
    assert len(m) == 3
    assert np.isclose(m[1][0, 0], (1 / (a1 * b1)) * (a2 * b2))


def test_fusion_associativity(rng):
    for n in (1, 2):
        p = product([double(n)] * 3)
        left = fuse(fuse(p, "0.2", "1.1"), "0.2*1.1", "1.2")
        left = fuse(left, "0.2*1.1*1.2", "2.1")
        right = fuse(fuse(p, "1.2", "2.1"), "1.1", "1.2*2.1")
        right = fuse(right, "0.2", "1.1*1.2*2.1")
        x = p.sample(rng)
        ml = dict(zip([s.name for s in left.slots], left.moment_at(x)))
        mr = dict(zip([s.name for s in right.slots], right.moment_at(x)))
        assert rel_diff(ml["0.2*1.1*1.2*2.1"], mr["0.2*1.1*1.2*2.1"]) < 1e-12
        assert rel_diff(ml["0.1"], mr["0.1"]) < 1e-12 and rel_diff(ml["2.2"], mr["2.2"]) < 1e-12
        assert rel_diff(left.gram_matrix(x), right.gram_matrix(x)) < 1e-12


def test_gram_shortcuts_match_entrywise(rng):
    for sp in (fused_double(2), double_double(1), assemble_moduli(from_components([(1, 0), (0, 0)], [(0, 1)], framed=[1]), DimensionVector({"v0": 1, "v1": 2}, {"v1": 1}))):
        x = sp.sample(rng)
        assert rel_diff(sp.gram_matrix(x), gram_by_entries(sp, x)) < 1e-13


def test_omega_bilinear_antisymmetric(rng):
    sp = fused_double(2)
    x = sp.sample(rng)
    X, Y, Z = (sp.random_tangent(rng) for _ in range(3))
    w = lambda A, B: complex(sp.omega(x, A, B))
    XZ = tuple(p + 2j * q for p, q in zip(X, Z))
    assert np.isclose(w(XZ, Y), w(X, Y) + 2j * w(Z, Y))
    assert np.isclose(w(X, Y), -w(Y, X))


def test_abelian_double_axioms_are_exact():
    r = check_qh_axioms(double(1), points=5, triples=3)
    assert r.passed
    assert r.qh1_dual < 1e-13 and r.qh2 < 1e-13


@pytest.mark.parametrize("space", [double(2), fused_double(2), vdb_space(2, 2), vdb_space(1, 2), double_double(2)], ids=lambda s: s.name)
def test_axioms_catalog(space):
    assert check_qh_axioms(space, points=4, triples=3, seed=1).passed


def test_alternative_double_moment_is_rejected():
    r = check_qh_axioms(double(2, DOUBLE_MOMENTS[1]), points=2, triples=2)
    assert not r.passed
    assert check_qh_axioms(double(2, DOUBLE_MOMENTS[0]), points=2, triples=2).passed


def test_qh3_degenerate_point():
    # a b = diag(1, -1): Ad + 1 has a 2-dim kernel in each slot
    d = double(2)
    x = (SZ.copy(), E.copy())
    r = qh3_check(d, x)
    assert r.kernel_dim == 4 and r.orbit_dim == 4 and r.max_angle < 1e-6


def test_qh3_at_identity_moment_is_nondegenerate():
    r = qh3_check(fused_double(2), (E, E))
    assert r.kernel_dim == 0 and r.orbit_dim == 0


def test_catalog_names():
    assert space_from_name("vdb:1,2").dim == 4
    assert space_from_name("double*double:1").dim == 4
    assert space_from_name("point:2").dim == 0
    with pytest.raises(SpaceError):
        space_from_name("torus:1")
    with pytest.raises(SpaceError):
        space_from_name("vdb:1")


# --- assembly ------------------------------------------------------------------------

def small_graphs():
    for nv in (1, 2):
        for ne in range(3):
            edge_choices = list(itertools.product(range(nv), repeat=2))
            for nodes in itertools.combinations_with_replacement(edge_choices, ne):
                for genus in itertools.product((0, 1), repeat=nv):
                    for framed in ([], [0]):
                        yield from_components([(gg, 0) for gg in genus], list(nodes), framed=framed)


def test_assembled_dimension_matches_expected():
    count = 0
    for g in small_graphs():
        for dv in itertools.product((1, 2), repeat=len(g.vertices)):
            w = {vid: 2 for vid in g.framed_vertices}
            dims = DimensionVector(dict(zip(g.vertex_ids, dv)), w)
            sp = assemble_moduli(g, dims)
            assert sp.dim == expected_moduli_dimension(g, dims)
            assert [s.name for s in sp.slots] == g.vertex_ids + [framing_slot(v) for v in g.framed_vertices]
            count += 1
    assert count > 100


def test_assembled_single_vertex_moment(rng):
    g = from_components([(2, 0)], [])
    sp = assemble_moduli(g, DimensionVector({"v0": 2}))
    comm = lambda a, b: a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
    for _ in range(5):
        a1, b1, a2, b2 = sp.sample(rng)
        assert np.allclose(sp.moment_at((a1, b1, a2, b2))[0], comm(a1, b1) @ comm(a2, b2), atol=1e-12)
    g1 = assemble_moduli(from_components([(1, 0)], []), DimensionVector({"v0": 2}))
    assert np.allclose(g1.moment_at((SX, SZ))[0], -E)


def test_assembled_a2_is_vdb():
    g = from_components([(0, 0), (0, 0)], [(0, 1)])
    sp = assemble_moduli(g, DimensionVector({"v0": 1, "v1": 1}))
    a, b = np.array([[0.3 + 0.1j]]), np.array([[-0.7j]])
    m = sp.moment_at((a, b))
    assert np.allclose(m[0], 1 / (1 + a * b)) and np.allclose(m[1], 1 + b * a)


def test_unit_fibers_coincide():
    g = from_components([(1, 0), (0, 0), (0, 0)], [(0, 1), (1, 2), (2, 2)], framed=[2])
    dims = DimensionVector({"v0": 1, "v1": 2, "v2": 1}, {"v2": 1})
    sp = assemble_moduli(g, dims)
    for seed in range(5):
        rep = random_representation(g, dims, seed=seed, radius=0.5)
        x = point_from_representation(sp, rep)
        m = sp.moment_at(x)
        for k, vid in enumerate(g.vertex_ids):
            assert rel_diff(m[k], relation_product(rep, g, vid)) < 1e-13
    res = solve_moment_fiber(sp, 1.0, seed=0, slots=g.vertex_ids)
    assert res.success
    assert relation_report(representation_from_point(sp, g, dims, res.point), g, tol=1e-9).satisfied


@pytest.mark.parametrize("seed", range(3))
def test_axioms_on_assembled_spaces(seed):
    r = np.random.default_rng(seed)
    nv = int(r.integers(1, 4))
    ne = int(r.integers(0, 4))
    nodes = [(int(r.integers(nv)), int(r.integers(nv))) for _ in range(ne)]
    comps = [(int(r.integers(0, 2)), 0) for _ in range(nv)]
    g = from_components(comps, nodes, framed=[0])
    dims = DimensionVector({vid: int(r.integers(1, 3)) for vid in g.vertex_ids}, {"v0": 1})
    assert check_qh_axioms(assemble_moduli(g, dims), points=2, triples=2, seed=seed).passed


def test_assembly_rejects_bad_dims():
    g = from_components([(0, 0)], [])
    with pytest.raises(SpaceError):
        assemble_moduli(g, DimensionVector({}))
    with pytest.raises(SpaceError):
        assemble_moduli(g, DimensionVector({"v0": 0}))


# --- fibers and reduction --------------------------------------------------------------

def test_fiber_double_identity():
    res = solve_moment_fiber(double(2), [E, E], seed=0)
    assert res.success and res.residual < 1e-10


def test_fiber_pauli_and_obstruction():
    ok = solve_moment_fiber(fused_double(2), -1.0, seed=0)
    assert ok.success
    a, b = ok.point
    assert np.allclose(a @ b @ np.linalg.inv(a) @ np.linalg.inv(b), -E, atol=1e-9)
    bad = solve_moment_fiber(fused_double(2), 1j, seed=0, max_iter=50)
    assert not bad.success
    g = from_components([(1, 1)], [], q=1j)
    sp = assemble_moduli(g, DimensionVector({"v0": 2}))
    assert not solve_moment_fiber(sp, g.twist("v0"), seed=1, max_iter=50).success


def test_fiber_is_deterministic():
    a = solve_moment_fiber(fused_double(2), -1.0, seed=4)
    b = solve_moment_fiber(fused_double(2), -1.0, seed=4)
    assert a.to_json(fused_double(2)) == b.to_json(fused_double(2))


def test_fiber_target_shape_errors():
    with pytest.raises(SpaceError):
        solve_moment_fiber(double(2), [E], seed=0)


def test_reduction_vdb_origin():
    r = reduction_report(vdb_space(1, 1), (np.zeros((1, 1)), np.zeros((1, 1))))
    # dm vanishes at the origin, so nothing is cut out and nothing is divided by
    assert r.dmoment_rank == 0 and r.orbit_rank == 0 and r.reduced_dim == 2
    assert r.reduced_dim == r.formula_dim


def test_reduction_abelian_genus_two(rng):
    sp = assemble_moduli(from_components([(2, 0)], []), DimensionVector({"v0": 1}))
    r = reduction_report(sp, sp.sample(rng))
    assert (r.dmoment_rank, r.orbit_rank, r.reduced_dim, r.reduced_form_rank) == (0, 0, 4, 4)


def test_reduction_genus_two_rank_two():
    sp = assemble_moduli(from_components([(2, 0)], []), DimensionVector({"v0": 2}))
    res = solve_moment_fiber(sp, 1.0, seed=0)
    assert res.success
    r = reduction_report(sp, res.point)
    assert r.reduced_form_rank % 2 == 0 and r.nondegenerate and r.reduced_dim == r.formula_dim


def test_reduction_precondition():
    with pytest.raises(ReductionError):
        reduction_report(fused_double(2), (SX, SZ))
