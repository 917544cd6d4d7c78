"""Clique graphs of chordal graphs, their separator index, and junction trees.

The clique graph used here has one node per maximal clique and an edge
between two cliques exactly when their intersection separates the two
residual vertex sets in the model graph.  Model graphs with several
connected components are bridged by edges whose separator is empty.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from collections.abc import Iterator
from dataclasses import dataclass, field

from .graph import (
    Graph,
    VertexSet,
    components_excluding,
    format_set,
    lowest,
    maximal_cliques,
    reachable,
    set_key,
)

EdgeKey = tuple[int, int]


def edge_key(c1: int, c2: int) -> EdgeKey:
    return (c1, c2) if c1 < c2 else (c2, c1)


class SeparatorIndex:
    """Binary trie keyed by the membership bits of a separator.

    Level ``i`` of the trie branches on whether vertex ``i`` is a member, so
    every lookup or insertion walks exactly ``n`` levels.  A leaf holds the
    clique-graph edges whose separator equals the key; new edges go to the
    front of the leaf.
    """

    __slots__ = ("n", "_root", "_size")

    def __init__(self, n: int) -> None:
        self.n = n
        self._root: list = [None, None] if n else [{}]
        self._size = 0

    def _leaf(self, separator: VertexSet, create: bool) -> dict[EdgeKey, None] | None:
        if self.n == 0:
            return self._root[0]
        node = self._root
        for level in range(self.n - 1):
            bit = separator >> level & 1
            child = node[bit]
            if child is None:
                if not create:
                    return None
                child = node[bit] = [None, None]
            node = child
        bit = separator >> (self.n - 1) & 1
        leaf = node[bit]
        if leaf is None and create:
            leaf = node[bit] = {}
        return leaf

    def insert(self, separator: VertexSet, edge: EdgeKey) -> None:
        leaf = self._leaf(separator, create=True)
        if edge not in leaf:
            leaf[edge] = None
            self._size += 1

    def insert_many(self, separator: VertexSet, edges: list[EdgeKey]) -> None:
        leaf = self._leaf(separator, create=True)
        for edge in edges:
            if edge not in leaf:
                leaf[edge] = None
                self._size += 1

    def remove(self, separator: VertexSet, edge: EdgeKey) -> None:
        leaf = self._leaf(separator, create=False)
        if leaf is None or edge not in leaf:
            raise KeyError(edge)
        del leaf[edge]
        self._size -= 1

    def lookup(self, separator: VertexSet) -> list[EdgeKey]:
        """Edges whose separator is exactly ``separator``, newest first."""
        leaf = self._leaf(separator, create=False)
        if not leaf:
            return []
        return list(reversed(leaf))

    def __len__(self) -> int:
        return self._size


class CliqueGraph:
    """Mutable clique graph with stable integer handles for its nodes.

    Handles come from a monotone counter and are never reused.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self.nodes: dict[int, VertexSet] = {}
        self._adj: dict[int, dict[int, VertexSet]] = {}
        self.index = SeparatorIndex(n)
        self._next_id = 0
        self._num_edges = 0

    # -- nodes ---------------------------------------------------------
    def add_node(self, clique: VertexSet) -> int:
        cid = self._next_id
        self._next_id += 1
        self.nodes[cid] = clique
        self._adj[cid] = {}
        return cid

    def remove_node(self, cid: int) -> None:
        for other in list(self._adj[cid]):
            self.remove_edge(cid, other)
        del self._adj[cid]
        del self.nodes[cid]

    def find_node(self, clique: VertexSet) -> int | None:
        for cid, c in self.nodes.items():
            if c == clique:
                return cid
        return None

    # -- edges ---------------------------------------------------------
    def add_edge(self, c1: int, c2: int) -> VertexSet:
        if c1 == c2:
            raise ValueError("clique graph edges join distinct cliques")
        sep = self.nodes[c1] & self.nodes[c2]
        if c2 not in self._adj[c1]:
            self._adj[c1][c2] = sep
            self._adj[c2][c1] = sep
            self.index.insert(sep, edge_key(c1, c2))
            self._num_edges += 1
        return sep

    def remove_edge(self, c1: int, c2: int) -> None:
        sep = self._adj[c1].pop(c2)
        del self._adj[c2][c1]
        self.index.remove(sep, edge_key(c1, c2))
        self._num_edges -= 1

    def has_edge(self, c1: int, c2: int) -> bool:
        return c2 in self._adj.get(c1, ())

    def separator(self, c1: int, c2: int) -> VertexSet:
        return self._adj[c1][c2]

    def neighbors(self, cid: int) -> dict[int, VertexSet]:
        """Mapping neighbour handle -> separator (read-only view by convention)."""
        return self._adj[cid]

    def edges(self) -> Iterator[tuple[int, int, VertexSet]]:
        for c1, nbrs in self._adj.items():
            for c2, sep in nbrs.items():
                if c1 < c2:
                    yield c1, c2, sep

    @property
    def num_edges(self) -> int:
        return self._num_edges

    # -- comparison ----------------------------------------------------
    def canonical(self) -> tuple[frozenset[VertexSet], frozenset[tuple[frozenset[VertexSet], VertexSet]]]:
        """Handle-free description: the clique set and the set of edges."""
        nodes = frozenset(self.nodes.values())
        edges = frozenset(
            (frozenset((self.nodes[c1], self.nodes[c2])), sep) for c1, c2, sep in self.edges()
        )
        return nodes, edges

    def same_as(self, other: CliqueGraph) -> bool:
        return self.canonical() == other.canonical()

    def __repr__(self) -> str:
        nodes = ", ".join(format_set(c) for c in sorted(self.nodes.values(), key=set_key))
        return f"CliqueGraph(nodes=[{nodes}], edges={self._num_edges})"


def edge_valid(g: Graph, c1: VertexSet, c2: VertexSet) -> bool:
    """Whether ``c1 & c2`` separates ``c1 - c2`` from ``c2 - c1`` in ``g``."""
    sep = c1 & c2
    r1, r2 = c1 & ~sep, c2 & ~sep
    if not r1 or not r2:
        return False
    return not reachable(g, r1, sep) & r2


def build(g: Graph) -> CliqueGraph:
    """Clique graph of a chordal graph, computed from scratch."""
    cliques = maximal_cliques(g)
    cg = CliqueGraph(g.n)
    ids = [cg.add_node(c) for c in cliques]
    by_sep: dict[VertexSet, list[tuple[int, int]]] = defaultdict(list)
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            by_sep[cliques[i] & cliques[j]].append((i, j))
    for sep, pairs in by_sep.items():
        labels = components_excluding(g, sep)
        keep = []
        for i, j in pairs:
            # residuals are cliques, so each lies inside a single component
            if labels[lowest(cliques[i] & ~sep)] != labels[lowest(cliques[j] & ~sep)]:
                keep.append((ids[i], ids[j]))
        for c1, c2 in keep:
            cg._adj[c1][c2] = sep
            cg._adj[c2][c1] = sep
        cg._num_edges += len(keep)
        cg.index.insert_many(sep, keep)
    return cg


def index_lookup(cg: CliqueGraph, separator: VertexSet) -> list[EdgeKey]:
    return cg.index.lookup(separator)


@dataclass
class JunctionTree:
    """A spanning tree of the clique graph with maximal total separator size."""

    cliques: dict[int, VertexSet]
    edges: list[tuple[int, int, VertexSet]] = field(default_factory=list)

    @property
    def separators(self) -> list[VertexSet]:
        """Separator multiset as a canonically sorted list."""
        return sorted((sep for _, _, sep in self.edges), key=lambda s: (s.bit_count(), set_key(s)))

    def separator_counts(self) -> Counter[VertexSet]:
        return Counter(sep for _, _, sep in self.edges)

    def clique_list(self) -> list[VertexSet]:
        return sorted(self.cliques.values(), key=set_key)

    def tree_path(self, src: int, dst: int) -> list[int]:
        nbrs: dict[int, list[int]] = defaultdict(list)
        for c1, c2, _ in self.edges:
            nbrs[c1].append(c2)
            nbrs[c2].append(c1)
        parent = {src: src}
        stack = [src]
        while stack:
            cur = stack.pop()
            for nxt in nbrs[cur]:
                if nxt not in parent:
                    parent[nxt] = cur
                    stack.append(nxt)
        if dst not in parent:
            return []
        path = [dst]
        while path[-1] != src:
            path.append(parent[path[-1]])
        return path[::-1]

    def has_running_intersection(self) -> bool:
        ids = list(self.cliques)
        if len(self.edges) != max(len(ids) - 1, 0):
            return False
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                path = self.tree_path(a, b)
                if not path:
                    return False
                common = self.cliques[a] & self.cliques[b]
                if any(common & ~self.cliques[c] for c in path):
                    return False
        return True


def junction_tree(cg: CliqueGraph) -> JunctionTree:
    """Maximum-weight spanning tree of ``cg`` with weight ``|separator|``.

    Equal weights are resolved in favour of the smaller handle pair.
    """
    parent = {cid: cid for cid in cg.nodes}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    jt = JunctionTree(cliques=dict(cg.nodes))
    for c1, c2, sep in sorted(cg.edges(), key=lambda e: (-e[2].bit_count(), e[0], e[1])):
        r1, r2 = find(c1), find(c2)
        if r1 != r2:
            parent[r1] = r2
            jt.edges.append((c1, c2, sep))
    return jt


def separator_closure_holds(cg: CliqueGraph) -> bool:
    """For edges (C1,C2),(C2,C3): C1∩C2 strictly inside C2∩C3 forces edge (C1,C3)."""
    for c2 in cg.nodes:
        nbrs = cg.neighbors(c2)
        for c1, s12 in nbrs.items():
            for c3, s23 in nbrs.items():
                if c1 != c3 and s12 != s23 and s12 & ~s23 == 0 and not cg.has_edge(c1, c3):
                    return False
    return True


def separation_property_holds(g: Graph, cg: CliqueGraph) -> bool:
    """Every pair of clique nodes is joined exactly when it should be."""
    ids = list(cg.nodes)
    for i, c1 in enumerate(ids):
        for c2 in ids[i + 1 :]:
            if edge_valid(g, cg.nodes[c1], cg.nodes[c2]) != cg.has_edge(c1, c2):
                return False
    return True

