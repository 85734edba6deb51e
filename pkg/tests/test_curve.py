import itertools

import pytest

from microlocal.curve import (
    DimensionVector,
    Edge,
    GraphError,
    NodalCurveGraph,
    Vertex,
    expected_moduli_dimension,
    from_components,
    graph_from_json,
    graph_to_json,
    validate_graph,
)


def test_validate_examples():
    assert validate_graph(NodalCurveGraph((Vertex("x"),))) == []
    bad = NodalCurveGraph((Vertex("x"),), (Edge("e", "x", "y"),))
    assert len(validate_graph(bad)) == 1
    assert validate_graph(from_components([(0, 0), (0, 0)], [(0, 1)])) == []


def test_validate_reports_q_zero_and_negative_genus():
    g = NodalCurveGraph((Vertex("x", genus=-1),), q=0)
    assert len(validate_graph(g)) == 2


def test_from_components_examples():
    a2 = from_components([(0, 0), (0, 0)], [(0, 1)])
    assert [(e.source, e.target) for e in a2.edges] == [("v0", "v1")]
    g2 = from_components([(2, 0)], [])
    assert g2.vertex("v0").genus == 2 and not g2.edges
    jordan = from_components([(0, 0)], [(0, 0)])
    assert jordan.edges[0].is_loop
    with pytest.raises(GraphError):
        from_components([(0, 0)], [(0, 1)])


def test_twist_and_overrides():
    g = from_components([(0, 3), (0, -1)], [], q=2.0)
    assert g.twist("v0") == 8 and g.twist("v1") == 0.5
    g = NodalCurveGraph(g.vertices, q=2.0, q_overrides={"v1": 1j})
    assert g.twist("v1") == 1j


def test_incoming_outgoing_follow_edge_order():
    g = from_components([(0, 0), (0, 0)], [(1, 0), (0, 1), (1, 0)])
    assert [e.id for e in g.incoming("v0")] == ["e0", "e2"]
    assert [e.id for e in g.outgoing("v0")] == ["e1"]


def test_expected_dimension_examples():
    g = from_components([(3, 0)], [])
    assert expected_moduli_dimension(g, DimensionVector({"v0": 2})) == 2 * 3 * 4
    a2 = from_components([(0, 0), (0, 0)], [(0, 1)])
    assert expected_moduli_dimension(a2, DimensionVector({"v0": 1, "v1": 1})) == 2
    assert expected_moduli_dimension(NodalCurveGraph(()), DimensionVector({})) == 0
    f = from_components([(0, 0)], [], framed=[0])
    assert expected_moduli_dimension(f, DimensionVector({"v0": 2}, {"v0": 3})) == 12


def test_two_framings_on_one_vertex_rejected():
    obj = {"vertices": [{"id": "x", "framed": 2}], "edges": []}
    with pytest.raises(GraphError, match="at most one"):
        graph_from_json(obj)


def test_json_roundtrip_preserves_order():
    g = from_components([(1, 2), (0, -1), (0, 0)], [(2, 0), (0, 1), (1, 1)], q=0.5 + 1j, framed=[1])
    back = graph_from_json(graph_to_json(g))
    assert back == g


def test_from_components_never_invalid():
    for n, k in itertools.product(range(1, 4), range(4)):
        nodes = [(i % n, (i * 7 + 1) % n) for i in range(k)]
        assert validate_graph(from_components([(i % 2, i - 1) for i in range(n)], nodes)) == []
