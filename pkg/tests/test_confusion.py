import networkx as nx
import numpy as np
import pydot
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gwbowv.confusion import (
    ConfusionGraph,
    biconnected_components,
    build_graph,
    conf_csv,
    confusion_matrix,
    confusion_values,
    export_dot,
    groups,
    strong_components,
    weak_components,
)
from gwbowv.errors import ToolkitError


def graph(n, edges):
    return ConfusionGraph(n, {e: 1.0 for e in edges})


def as_sets(comps):
    return sorted(tuple(sorted(c)) for c in comps)


def test_confusion_matrix_basics():
    assert np.array_equal(confusion_matrix([0, 1, 2], [0, 1, 2], 3), np.eye(3, dtype=int))
    cm = confusion_matrix([1], [2], 3)
    assert cm[1, 2] == 1 and cm.sum() == 1
    truth = [0, 0, 1, 2, 2, 2]
    assert confusion_matrix(truth, [1, 0, 1, 0, 2, 1], 3).sum(1).tolist() == [2, 1, 3]
    with pytest.raises(ToolkitError):
        confusion_matrix([0, 3], [0, 0], 3)
    with pytest.raises(ToolkitError):
        confusion_matrix([0], [0, 1], 3)


def test_edge_weight_is_row_rate():
    cm = np.array([[8, 2], [0, 10]])
    g = build_graph(cm, 0.1)
    assert g.edges == {(0, 1): pytest.approx(0.2)}


def test_absolute_mode_uses_counts():
    cm = np.array([[800, 900], [10, 5]])
    g = build_graph(cm, 800, absolute=True)
    assert set(g.edges) == {(0, 1)}
    assert g.edges[(0, 1)] == 900


def test_alpha_one_and_diagonal():
    assert build_graph(np.array([[8, 2], [3, 7]]), 1.0).edges == {}
    gs = groups(build_graph(np.diag([3, 4, 5]), 0.1))
    assert gs.groups == [] and gs.isolated == [0, 1, 2]
    with pytest.raises(ToolkitError):
        build_graph(np.eye(2), 1.5)


def test_weak_pair_with_isolated_vertex():
    gs = groups(graph(4, [(1, 2), (2, 1)]), "weak")
    assert gs.groups == [(1, 2)] and gs.isolated == [0, 3]


def test_weak_versus_strong():
    g = graph(3, [(1, 2)])
    assert groups(g, "weak").groups == [(1, 2)]
    assert groups(g, "strong").groups == []


def test_four_cycle_is_one_biconnected_group():
    g = graph(5, [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert groups(g, "biconnected").groups == [(0, 1, 2, 3)]
    assert groups(g, "biconnected").isolated == [4]


def test_bad_mode():
    with pytest.raises(ToolkitError):
        groups(graph(2, []), "nope")


edge_lists = st.integers(2, 9).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]), max_size=20),
    )
)


@given(edge_lists)
def test_components_match_networkx(case):
    n, edges = case
    g = graph(n, edges)
    d = nx.DiGraph()
    d.add_nodes_from(range(n))
    d.add_edges_from(edges)
    assert as_sets(weak_components(g)) == as_sets(nx.weakly_connected_components(d))
    assert as_sets(strong_components(g)) == as_sets(nx.strongly_connected_components(d))
    assert as_sets(biconnected_components(g)) == as_sets(nx.biconnected_components(d.to_undirected()))


@given(edge_lists)
def test_weak_groups_partition_edges(case):
    n, edges = case
    gs = groups(graph(n, edges), "weak")
    seen = [v for grp in gs.groups for v in grp]
    assert len(seen) == len(set(seen))
    assert sorted(seen + gs.isolated) == list(range(n))
    where = {v: i for i, grp in enumerate(gs.groups) for v in grp}
    for i, j in edges:
        assert where[i] == where[j]


count_matrices = st.integers(2, 6).flatmap(lambda n: hnp.arrays(np.int64, (n, n), elements=st.integers(0, 20)))


@given(count_matrices, st.floats(0, 1), st.floats(0, 1))
def test_alpha_monotone(cm, a, b):
    lo, hi = min(a, b), max(a, b)
    assert set(build_graph(cm, hi).edges) <= set(build_graph(cm, lo).edges)


@given(count_matrices)
def test_rates_bounded(cm):
    conf = confusion_values(cm)
    assert (conf >= 0).all() and (conf <= 1).all()
    assert (conf.sum(1) <= 1 + 1e-12).all()


def parse(text):
    (dot,) = pydot.graph_from_dot_data(text)
    return dot


def test_dot_empty_graph_parses():
    dot = parse(export_dot(ConfusionGraph(0)))
    assert dot.get_type() == "digraph"
    assert dot.get_edges() == []


def test_dot_two_vertices():
    text = export_dot(ConfusionGraph(2, {(0, 1): 0.25}))
    dot = parse(text)
    assert sorted(n.get_name() for n in dot.get_nodes() if n.get_name().startswith("v")) == ["v0", "v1"]
    (edge,) = dot.get_edges()
    assert (edge.get_source(), edge.get_destination()) == ("v0", "v1")
    assert edge.get_label() == '"0.250"'


def test_dot_labels_are_quoted_and_groups_coloured():
    g = build_graph(np.array([[5, 5, 0], [5, 5, 0], [0, 0, 9]]), 0.1)
    labels = ['hard "disk"', "drive > case", "other"]
    dot = parse(export_dot(g, groups(g), labels))
    nodes = {n.get_name(): n for n in dot.get_nodes()}
    assert nodes["v0"].get("fillcolor") == nodes["v1"].get("fillcolor")
    assert nodes["v2"].get("fillcolor") is None
    assert len(dot.get_edges()) == 2


@given(edge_lists)
def test_dot_round_trip_edges(case):
    n, edges = case
    g = graph(n, edges)
    dot = parse(export_dot(g, groups(g)))
    got = {(e.get_source(), e.get_destination()) for e in dot.get_edges()}
    assert got == {(f"v{i}", f"v{j}") for i, j in edges}


def test_conf_csv():
    text = conf_csv(np.array([[8, 2], [0, 10]]), labels=["a", "b"])
    assert text.splitlines() == ["true,predicted,count,conf", "a,b,2,0.200000"]
