import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import path, sets
from decomposable.cliquegraph import (
    CliqueGraph,
    SeparatorIndex,
    build,
    edge_valid,
    index_lookup,
    junction_tree,
    separator_closure_holds,
    separation_property_holds,
)
from decomposable.errors import NotChordal
from decomposable.graph import Graph, vset
from decomposable.oracle import random_chordal_graph


def edge_sets(cg):
    return {(frozenset(map(frozenset, sets([cg.nodes[a], cg.nodes[b]]))), frozenset(sets([s])[0])) for a, b, s in cg.edges()}


def node_id(cg, *vs):
    cid = cg.find_node(vset(*vs))
    assert cid is not None
    return cid


def test_build_path():
    cg = build(path(4))
    assert sorted(sets(cg.nodes.values()), key=sorted) == [{0, 1}, {1, 2}, {2, 3}]
    assert edge_sets(cg) == {
        (frozenset({frozenset({0, 1}), frozenset({1, 2})}), frozenset({1})),
        (frozenset({frozenset({1, 2}), frozenset({2, 3})}), frozenset({2})),
    }


def test_build_empty_graph_links_everything_through_the_empty_separator():
    cg = build(Graph(3))
    assert len(cg.nodes) == 3
    assert cg.num_edges == 3
    assert all(sep == 0 for _, _, sep in cg.edges())


def test_build_single_clique():
    cg = build(Graph.complete(3))
    assert list(cg.nodes.values()) == [vset(0, 1, 2)]
    assert cg.num_edges == 0


def test_build_rejects_non_chordal():
    with pytest.raises(NotChordal):
        build(Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]))


def test_edge_valid_examples():
    g = path(4)
    assert edge_valid(g, vset(0, 1), vset(1, 2))
    assert not edge_valid(g, vset(0, 1), vset(2, 3))
    two = Graph(4, [(0, 1), (2, 3)])
    assert edge_valid(two, vset(0, 1), vset(2, 3))


def test_junction_tree_of_path():
    jt = junction_tree(build(path(4)))
    assert len(jt.edges) == 2
    assert sets(jt.separators) == [{1}, {2}]
    assert jt.has_running_intersection()


def test_junction_tree_of_empty_graph_uses_smallest_handles():
    cg = build(Graph(3))
    jt = junction_tree(cg)
    assert [(a, b) for a, b, _ in jt.edges] == [(0, 1), (0, 2)]
    assert jt.separators == [0, 0]


def test_junction_tree_single_node():
    jt = junction_tree(build(Graph.complete(4)))
    assert jt.edges == []
    assert jt.separators == []
    assert jt.has_running_intersection()


def test_index_lookup_examples():
    cg = build(path(4))
    assert index_lookup(cg, vset(1)) == [(node_id(cg, 0, 1), node_id(cg, 1, 2))]
    assert index_lookup(cg, vset(0)) == []
    assert len(index_lookup(build(Graph(3)), 0)) == 3


def test_separator_index_prepends_and_removes():
    idx = SeparatorIndex(4)
    idx.insert(vset(1, 2), (0, 1))
    idx.insert(vset(1, 2), (2, 3))
    idx.insert(vset(1), (0, 2))
    assert idx.lookup(vset(1, 2)) == [(2, 3), (0, 1)]
    assert idx.lookup(vset(2)) == []
    idx.remove(vset(1, 2), (2, 3))
    assert idx.lookup(vset(1, 2)) == [(0, 1)]
    assert len(idx) == 2
    with pytest.raises(KeyError):
        idx.remove(vset(3), (0, 1))


def test_separator_index_on_zero_vertices():
    idx = SeparatorIndex(0)
    idx.insert(0, (0, 1))
    assert idx.lookup(0) == [(0, 1)]


def test_clique_graph_handles_are_never_reused():
    cg = CliqueGraph(3)
    a = cg.add_node(vset(0))
    cg.remove_node(a)
    assert cg.add_node(vset(0)) != a


@given(st.integers(1, 10), st.integers(0, 2**32))
def test_built_clique_graph_properties(n, seed):
    rng = random.Random(seed)
    g = random_chordal_graph(rng, n)
    cg = build(g)
    assert len(cg.nodes) <= n
    assert separation_property_holds(g, cg)
    assert separator_closure_holds(cg)
    jt = junction_tree(cg)
    assert jt.has_running_intersection()
    edges = list(cg.edges())
    for sep in {s for _, _, s in edges} | {rng.getrandbits(n) for _ in range(10)}:
        linear = sorted((a, b) for a, b, s in edges if s == sep)
        assert sorted(index_lookup(cg, sep)) == linear
