import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgreduce import CouplingSpec, GraphValidationError, Potential, build_graph, catalog, load_graph
from qgreduce.graph import graph_to_document, make_graph, parse_document


def test_degrees_count_loops_twice():
    g = catalog.loop_with_pendant()
    assert g.degree("a") == 3 and g.degree("b") == 1
    assert len(g.deck) == 2 * len(g.edges)


def test_deck_partner_is_involution():
    for make in catalog.STANDARD.values():
        d = make().deck
        assert np.array_equal(d.partner[d.partner], np.arange(len(d)))
        assert np.all(d.is_tail != d.is_tail[d.partner])


def test_isolated_vertex_rejected():
    with pytest.raises(GraphValidationError):
        make_graph(["a", "b", "c"], [("e", "a", "b")])


def test_unknown_endpoint_rejected():
    with pytest.raises(GraphValidationError):
        make_graph(["a", "b"], [("e", "a", "z")])


def test_non_positive_length_rejected():
    with pytest.raises(GraphValidationError):
        make_graph(["a", "b"], [("e", "a", "b")], length=0.0)


def test_document_round_trip():
    g = catalog.cycle(3, CouplingSpec.delta(0.4, per_degree=True),
                      Potential.fourier(cos=(0.0, 1.0)), flux=0.3)
    h = build_graph(json.loads(json.dumps(graph_to_document(g))))
    assert h.vertices == g.vertices
    assert [e.id for e in h.edges] == [e.id for e in g.edges]
    assert np.allclose(h.betas, g.betas)
    assert h.potential == g.potential
    assert all(h.couplings[v].strength(3) == g.couplings[v].strength(3) for v in g.vertices)


def test_yaml_and_json_agree(tmp_path):
    doc = graph_to_document(catalog.triangle())
    import yaml

    (tmp_path / "g.yaml").write_text(yaml.safe_dump(doc))
    (tmp_path / "g.json").write_text(json.dumps(doc))
    a, _ = load_graph(tmp_path / "g.yaml")
    b, _ = load_graph(tmp_path / "g.json")
    assert a.vertices == b.vertices and a.length == b.length


def test_parse_error_reports_line():
    with pytest.raises(GraphValidationError, match="line 2"):
        parse_document('{"a": 1,\n "b" 2}')


def test_unknown_coupling_kind():
    doc = graph_to_document(catalog.single_edge())
    doc["vertices"][0]["coupling"] = {"type": "robin"}
    with pytest.raises(GraphValidationError, match="robin"):
        build_graph(doc)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4))
def test_polynomial_potential_matches_numpy(coef):
    p = Potential.polynomial(coef)
    x = np.linspace(0, 1, 7)
    assert np.allclose(p(x), np.polynomial.polynomial.polyval(x, coef))


def test_table_potential_interpolates_samples():
    xs = np.linspace(0, 1, 6)
    p = Potential.table(xs, xs ** 2)
    assert np.allclose(p(xs), xs ** 2)
