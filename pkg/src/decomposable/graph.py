"""Undirected graphs over dense integer vertices, with chordality machinery.

Vertex sets are plain Python ints used as bitsets: bit ``v`` is set iff
vertex ``v`` is a member.  Set algebra is therefore ``&``, ``|`` and
``& ~``, and a set's canonical iteration order is ascending vertex id.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence

from .errors import NotAPermutation, NotChordal

VertexSet = int


def vset(*vertices: int) -> VertexSet:
    """Build a vertex set from explicit members."""
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def to_set(vertices: Iterable[int]) -> VertexSet:
    return vset(*vertices)


def members(mask: VertexSet) -> list[int]:
    """Members of ``mask`` in ascending order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def iter_members(mask: VertexSet) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def lowest(mask: VertexSet) -> int:
    return (mask & -mask).bit_length() - 1


def is_subset(a: VertexSet, b: VertexSet) -> bool:
    return a & ~b == 0


def is_proper_subset(a: VertexSet, b: VertexSet) -> bool:
    return a != b and a & ~b == 0


def set_key(mask: VertexSet) -> tuple[int, ...]:
    """Sort key giving lexicographic order on canonical member tuples."""
    return tuple(members(mask))


def format_set(mask: VertexSet) -> str:
    return "{" + ",".join(map(str, members(mask))) + "}"


class Graph:
    """Simple undirected graph on vertices ``0 .. n-1``.

    Adjacency is stored as one neighbour bitset per vertex.
    """

    __slots__ = ("n", "adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()) -> None:
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = n
        self.adj = [0] * n
        for u, v in edges:
            self.add_edge(u, v)

    @classmethod
    def complete(cls, n: int) -> Graph:
        g = cls(n)
        full = (1 << n) - 1
        g.adj = [full & ~(1 << v) for v in range(n)]
        return g

    def copy(self) -> Graph:
        g = Graph(self.n)
        g.adj = list(self.adj)
        return g

    @property
    def vertices(self) -> VertexSet:
        return (1 << self.n) - 1

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for n={self.n}")

    def add_edge(self, u: int, v: int) -> None:
        self._check(u)
        self._check(v)
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.adj[u] |= 1 << v
        self.adj[v] |= 1 << u

    def remove_edge(self, u: int, v: int) -> None:
        self.adj[u] &= ~(1 << v)
        self.adj[v] &= ~(1 << u)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def neighbors(self, v: int) -> VertexSet:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        """All edges as ``(u, v)`` with ``u < v``, in ascending order."""
        return [(u, v) for u in range(self.n) for v in iter_members(self.adj[u] >> (u + 1) << (u + 1))]

    def num_edges(self) -> int:
        return sum(a.bit_count() for a in self.adj) // 2

    def is_clique(self, mask: VertexSet) -> bool:
        for v in iter_members(mask):
            if mask & ~self.adj[v] & ~(1 << v):
                return False
        return True

    def with_edge(self, u: int, v: int) -> Graph:
        g = self.copy()
        g.add_edge(u, v)
        return g

    def without_edge(self, u: int, v: int) -> Graph:
        g = self.copy()
        g.remove_edge(u, v)
        return g

    def key(self) -> tuple[int, ...]:
        return tuple(self.adj)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.adj)))

    def __repr__(self) -> str:
        return f"Graph({self.n}, {self.edges()!r})"


def reachable(g: Graph, sources: VertexSet, excluded: VertexSet = 0) -> VertexSet:
    """Vertices reachable from ``sources`` in ``g`` with ``excluded`` deleted."""
    allowed = g.vertices & ~excluded
    seen = sources & allowed
    frontier = seen
    while frontier:
        nxt = 0
        for v in iter_members(frontier):
            nxt |= g.adj[v]
        frontier = nxt & allowed & ~seen
        seen |= frontier
    return seen


def lex_bfs(g: Graph, start: int) -> list[int]:
    """Lexicographic breadth-first search beginning at ``start``.

    Returns the visit order, which is the *reverse* of a perfect elimination
    order whenever ``g`` is chordal.  Ties between equal labels go to the
    smallest vertex id.
    """
    n = g.n
    if not 0 <= start < n:
        raise IndexError(f"start vertex {start} out of range for n={n}")
    # a label is the set of visit numbers of visited neighbours; numbers
    # decrease over time, so comparing bitmasks compares labels lexicographically
    # the low bits hold n - 1 - v so that equal labels prefer the smaller id
    shift = n.bit_length()
    labels = [n - 1 - v for v in range(n)]
    unvisited = set(range(n))
    todo = g.vertices
    order = []
    nxt = start
    for i in range(n):
        if i:
            nxt = max(unvisited, key=labels.__getitem__)
        unvisited.discard(nxt)
        todo &= ~(1 << nxt)
        order.append(nxt)
        number = 1 << (n - i + shift)
        touched = g.adj[nxt] & todo
        while touched:
            low = touched & -touched
            labels[low.bit_length() - 1] |= number
            touched ^= low
    return order


def _check_permutation(g: Graph, order: Sequence[int]) -> None:
    if len(order) != g.n or sorted(order) != list(range(g.n)):
        raise NotAPermutation(f"{list(order)!r} is not a permutation of range({g.n})")


def is_perfect_elimination(g: Graph, order: Sequence[int]) -> bool:
    """True iff eliminating vertices in ``order`` creates no fill-in edge."""
    _check_permutation(g, order)
    # each vertex's later neighbours must all be adjacent to the earliest of them
    position = [0] * g.n
    for i, v in enumerate(order):
        position[v] = i
    remaining = g.vertices
    for v in order:
        remaining &= ~(1 << v)
        later = g.adj[v] & remaining
        if later:
            parent = min(iter_members(later), key=position.__getitem__)
            if later & ~(1 << parent) & ~g.adj[parent]:
                return False
    return True


def perfect_elimination_order(g: Graph) -> list[int] | None:
    """A perfect elimination order of ``g``, or ``None`` if it is not chordal."""
    if g.n == 0:
        return []
    order = lex_bfs(g, 0)[::-1]
    return order if is_perfect_elimination(g, order) else None


def is_chordal(g: Graph) -> bool:
    return perfect_elimination_order(g) is not None


def maximal_cliques(g: Graph) -> list[VertexSet]:
    """Maximal cliques of a chordal graph, sorted lexicographically."""
    order = perfect_elimination_order(g)
    if order is None:
        raise NotChordal("maximal_cliques requires a chordal graph")
    remaining = g.vertices
    candidates = set()
    for v in order:
        remaining &= ~(1 << v)
        candidates.add((1 << v) | (g.adj[v] & remaining))
    kept: list[VertexSet] = []
    for c in sorted(candidates, key=lambda m: -m.bit_count()):
        if not any(c & ~k == 0 for k in kept):
            kept.append(c)
    return sorted(kept, key=set_key)


def components_excluding(g: Graph, s: VertexSet) -> list[int | None]:
    """Connected-component labels of ``g - s``.

    Each vertex outside ``s`` is labelled with the smallest vertex id of its
    component; vertices of ``s`` get ``None``.
    """
    labels: list[int | None] = [None] * g.n
    todo = g.vertices & ~s
    while todo:
        root = lowest(todo)
        comp = reachable(g, 1 << root, s)
        for v in iter_members(comp):
            labels[v] = root
        todo &= ~comp
    return labels


def star_augmented(g: Graph, discrete: VertexSet) -> Graph:
    """Copy of ``g`` with one extra vertex joined to every vertex of ``discrete``."""
    h = Graph(g.n + 1)
    h.adj[: g.n] = list(g.adj)
    star = g.n
    for v in iter_members(discrete):
        h.add_edge(star, v)
    return h


def is_strongly_decomposable(g: Graph, discrete: VertexSet) -> bool:
    """Chordality of ``g`` after adding a star vertex over the discrete vertices."""
    if discrete & ~g.vertices:
        raise ValueError("discrete vertices must belong to the graph")
    return is_chordal(star_augmented(g, discrete))
