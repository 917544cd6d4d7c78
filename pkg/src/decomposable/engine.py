"""Eligibility bookkeeping, incremental edge moves and greedy stepwise selection."""

from __future__ import annotations

import logging
import time
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from .cliquegraph import CliqueGraph, build, junction_tree
from .errors import ColumnMismatch, InternalInconsistency, NotChordal, NotEligible
from .graph import Graph, VertexSet, components_excluding, is_chordal, lowest, members, reachable
from .scoring import (
    Dataset,
    EntropyCache,
    ScoreState,
    add_delta,
    apply_delete_diff,
    apply_junction_diff,
    delete_delta,
)

log = logging.getLogger(__name__)

Pair = tuple[int, int]

# deltas closer than this are treated as equal when ranking moves
TIE_TOLERANCE = 1e-12


class ForwardEligibility:
    """Symmetric boolean matrix of addable pairs plus one witness edge per pair."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.matrix = np.zeros((n, n), dtype=bool)
        # witness[x, y] holds the two clique handles, -1 when unset
        self.witness = np.full((n, n, 2), -1, dtype=np.int64)

    def mark(self, xs: VertexSet, ys: VertexSet, edge: tuple[int, int]) -> None:
        ix, iy = members(xs), members(ys)
        if not ix or not iy:
            return
        sub = np.ix_(ix, iy)
        self.matrix[sub] = True
        self.witness[sub] = edge
        sub = np.ix_(iy, ix)
        self.matrix[sub] = True
        self.witness[sub] = edge

    def clear(self, xs: VertexSet, ys: VertexSet) -> None:
        ix, iy = members(xs), members(ys)
        if not ix or not iy:
            return
        self.matrix[np.ix_(ix, iy)] = False
        self.matrix[np.ix_(iy, ix)] = False

    def pairs(self) -> list[Pair]:
        rows, cols = np.nonzero(np.triu(self.matrix, 1))
        return list(zip(rows.tolist(), cols.tolist()))

    @classmethod
    def from_clique_graph(cls, cg: CliqueGraph) -> ForwardEligibility:
        elig = cls(cg.n)
        for c1, c2, sep in cg.edges():
            elig.mark(cg.nodes[c1] & ~sep, cg.nodes[c2] & ~sep, (c1, c2))
        return elig


class DeleteEligibility:
    """Number of maximal cliques containing each vertex pair."""

    def __init__(self, n: int) -> None:
        self.count = np.zeros((n, n), dtype=np.int64)

    def add_clique(self, clique: VertexSet, sign: int = 1) -> None:
        idx = members(clique)
        self.count[np.ix_(idx, idx)] += sign

    def deletable(self, a: int, b: int) -> bool:
        return a != b and self.count[a, b] == 1

    def pairs(self) -> list[Pair]:
        rows, cols = np.nonzero(np.triu(self.count == 1, 1))
        return list(zip(rows.tolist(), cols.tolist()))

    @classmethod
    def from_clique_graph(cls, cg: CliqueGraph) -> DeleteEligibility:
        elig = cls(cg.n)
        for clique in cg.nodes.values():
            elig.add_clique(clique)
        return elig


def eligible_additions(cg: CliqueGraph, g: Graph) -> dict[Pair, tuple[int, int]]:
    """Addable pairs read directly off the clique graph, each with a witness edge."""
    out: dict[Pair, tuple[int, int]] = {}
    for c1, c2, sep in cg.edges():
        for x in members(cg.nodes[c1] & ~sep):
            for y in members(cg.nodes[c2] & ~sep):
                if not g.has_edge(x, y):
                    out.setdefault((min(x, y), max(x, y)), (c1, c2))
    return out


def eligible_deletions(g: Graph, cg: CliqueGraph) -> set[Pair]:
    """Model edges lying in exactly one maximal clique."""
    counts: dict[Pair, int] = {}
    for clique in cg.nodes.values():
        vs = members(clique)
        for i, x in enumerate(vs):
            for y in vs[i + 1 :]:
                counts[x, y] = counts.get((x, y), 0) + 1
    return {e for e, k in counts.items() if k == 1 and g.has_edge(*e)}


@dataclass
class AddOutcome:
    pair: Pair
    witness: tuple[VertexSet, VertexSet]
    separator: VertexSet
    clique: VertexSet
    absorbed: list[VertexSet]
    removed_edges: list[tuple[VertexSet, VertexSet, VertexSet]]
    added_edges: list[tuple[VertexSet, VertexSet, VertexSet]]
    degrees: tuple[int, int]


@dataclass
class DeleteOutcome:
    pair: Pair
    clique: VertexSet
    separator: VertexSet
    new_cliques: list[VertexSet]
    maximal_after: tuple[bool, bool]


class StepwiseModel:
    """A chordal model graph together with its incrementally maintained clique graph.

    With ``check=True`` every move is followed by a comparison against a
    from-scratch rebuild, raising :class:`InternalInconsistency` on mismatch.
    """

    def __init__(self, g: Graph, *, check: bool = False) -> None:
        if not is_chordal(g):
            raise NotChordal("the starting model graph must be chordal")
        self.graph = g.copy()
        self.cg = build(self.graph)
        self.forward = ForwardEligibility.from_clique_graph(self.cg)
        self.deletion = DeleteEligibility.from_clique_graph(self.cg)
        self.check = check
        # fault injection for testing the oracle: skips stale-edge removal
        self.skip_stale_removal = False

    @property
    def n(self) -> int:
        return self.graph.n

    # -- enumeration ---------------------------------------------------
    def eligible_additions(self) -> list[Pair]:
        return self.forward.pairs()

    def eligible_deletions(self) -> list[Pair]:
        return self.deletion.pairs()

    def witness(self, a: int, b: int) -> tuple[int, int]:
        """Clique handles ``(ca, cb)`` of an edge with ``a`` in ``ca`` and ``b`` in ``cb``."""
        if not self.forward.matrix[a, b]:
            raise NotEligible(f"pair ({a}, {b}) is not eligible for addition")
        c1, c2 = (int(x) for x in self.forward.witness[a, b])
        for ca, cb in ((c1, c2), (c2, c1)):
            if self._witnesses(ca, cb, a, b):
                return ca, cb
        # stale witness: the edge it named was removed or re-pointed
        for c1, c2, sep in self.cg.edges():
            for ca, cb in ((c1, c2), (c2, c1)):
                if self._witnesses(ca, cb, a, b):
                    self.forward.witness[a, b] = self.forward.witness[b, a] = (ca, cb)
                    return ca, cb
        raise InternalInconsistency(f"no clique graph edge certifies pair ({a}, {b})")

    def _witnesses(self, ca: int, cb: int, a: int, b: int) -> bool:
        if not self.cg.has_edge(ca, cb):
            return False
        sep = self.cg.separator(ca, cb)
        return bool((self.cg.nodes[ca] & ~sep) >> a & 1 and (self.cg.nodes[cb] & ~sep) >> b & 1)

    def separator(self, a: int, b: int) -> VertexSet:
        """Minimal separator of an addable pair."""
        ca, cb = self.witness(a, b)
        return self.cg.separator(ca, cb)

    def containing_clique(self, a: int, b: int) -> int:
        both = 1 << a | 1 << b
        for cid, clique in self.cg.nodes.items():
            if clique & both == both:
                return cid
        raise NotEligible(f"({a}, {b}) is not an edge of the model")

    # -- forward move --------------------------------------------------
    def apply_add(self, a: int, b: int) -> AddOutcome:
        """Add edge ``(a, b)`` and update the clique graph and eligibility in place."""
        g, cg = self.graph, self.cg
        ca, cb = self.witness(a, b)
        clique_a, clique_b = cg.nodes[ca], cg.nodes[cb]
        sep = clique_a & clique_b
        degrees = (g.degree(a), g.degree(b))

        # components of a and b once the separator is removed
        reach_a = reachable(g, 1 << a, sep)
        reach_b = reachable(g, 1 << b, sep)

        g.add_edge(a, b)
        new_clique = sep | 1 << a | 1 << b
        removed = [(clique_a, clique_b, sep)]
        cg.remove_edge(ca, cb)
        cab = cg.add_node(new_clique)
        added_ids = [(ca, cab), (cb, cab)]
        cg.add_edge(ca, cab)
        cg.add_edge(cb, cab)

        if not self.skip_stale_removal:
            for c1, c2 in cg.index.lookup(sep):
                r1 = cg.nodes[c1] & ~sep
                r2 = cg.nodes[c2] & ~sep
                if (r1 & reach_a and r2 & reach_b) or (r1 & reach_b and r2 & reach_a):
                    removed.append((cg.nodes[c1], cg.nodes[c2], sep))
                    cg.remove_edge(c1, c2)

        for cx, x, reach_other in ((ca, a, reach_b), (cb, b, reach_a)):
            grown = sep | 1 << x
            for other, s_other in list(cg.neighbors(cx).items()):
                if other != cab and s_other != grown and s_other & ~grown == 0:
                    if not cg.has_edge(other, cab):
                        cg.add_edge(other, cab)
                        added_ids.append((other, cab))
            for other, clique in list(cg.nodes.items()):
                if other in (cab, cx) or clique & new_clique != grown:
                    continue
                # grown separates the other endpoint from this clique's residual
                if not clique & ~grown & reach_other and not cg.has_edge(other, cab):
                    cg.add_edge(other, cab)
                    added_ids.append((other, cab))

        absorbed = []
        for cx in (ca, cb):
            if cg.nodes[cx] & ~new_clique == 0:
                absorbed.append(cg.nodes[cx])
                cg.remove_node(cx)

        elig = self.forward
        elig.clear(1 << a, 1 << b)
        elig.clear(reach_a, reach_b)
        added = []
        for c1, c2 in added_ids:
            if not cg.has_edge(c1, c2):
                continue
            s = cg.separator(c1, c2)
            added.append((cg.nodes[c1], cg.nodes[c2], s))
            elig.mark(cg.nodes[c1] & ~s, cg.nodes[c2] & ~s, (c1, c2))

        self.deletion.add_clique(new_clique)
        for clique in absorbed:
            self.deletion.add_clique(clique, -1)

        if self.check:
            self._verify(f"after adding ({a}, {b})")
        return AddOutcome(
            pair=(a, b),
            witness=(clique_a, clique_b),
            separator=sep,
            clique=new_clique,
            absorbed=absorbed,
            removed_edges=removed,
            added_edges=added,
            degrees=degrees,
        )

    # -- backward move -------------------------------------------------
    def apply_delete(self, a: int, b: int) -> DeleteOutcome:
        """Delete edge ``(a, b)``, rebuilding the clique graph around its clique."""
        g, cg = self.graph, self.cg
        if not g.has_edge(a, b) or not self.deletion.deletable(a, b):
            raise NotEligible(f"edge ({a}, {b}) is not eligible for deletion")
        cid = self.containing_clique(a, b)
        clique = cg.nodes[cid]
        sep = clique & ~(1 << a) & ~(1 << b)

        g.remove_edge(a, b)
        cg.remove_node(cid)
        self.deletion.add_clique(clique, -1)

        old_ids = list(cg.nodes)
        new_ids = []
        maximal = []
        for part in (clique & ~(1 << b), clique & ~(1 << a)):
            if any(part & ~other == 0 for other in cg.nodes.values()):
                maximal.append(False)
                continue
            maximal.append(True)
            new_ids.append(cg.add_node(part))
            self.deletion.add_clique(part)

        # edges between surviving cliques can only appear on the freed separator
        labels = components_excluding(g, sep)
        for i, c1 in enumerate(old_ids):
            k1 = cg.nodes[c1]
            for c2 in old_ids[i + 1 :]:
                k2 = cg.nodes[c2]
                if k1 & k2 != sep or cg.has_edge(c1, c2):
                    continue
                if labels[lowest(k1 & ~sep)] != labels[lowest(k2 & ~sep)]:
                    cg.add_edge(c1, c2)

        label_cache: dict[VertexSet, list[int | None]] = {sep: labels}
        for nid in new_ids:
            k1 = cg.nodes[nid]
            for other, k2 in list(cg.nodes.items()):
                if other == nid or cg.has_edge(nid, other):
                    continue
                s = k1 & k2
                lab = label_cache.get(s)
                if lab is None:
                    lab = label_cache[s] = components_excluding(g, s)
                if lab[lowest(k1 & ~s)] != lab[lowest(k2 & ~s)]:
                    cg.add_edge(nid, other)

        self.forward = ForwardEligibility.from_clique_graph(cg)

        if self.check:
            self._verify(f"after deleting ({a}, {b})")
        return DeleteOutcome(
            pair=(a, b),
            clique=clique,
            separator=sep,
            new_cliques=[cg.nodes[i] for i in new_ids],
            maximal_after=(maximal[0], maximal[1]),
        )

    def _verify(self, context: str) -> None:
        fresh = build(self.graph)
        if not self.cg.same_as(fresh):
            raise InternalInconsistency(f"clique graph differs from rebuild {context}")


# -- greedy selection ----------------------------------------------------


@dataclass
class SelectionConfig:
    mode: str = "forward"
    max_steps: int = 1_000_000
    min_delta: float = 1e-9
    max_clique_size: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("forward", "backward", "alternating"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        if self.max_clique_size is not None and self.max_clique_size < 2:
            raise ValueError("max_clique_size must be at least 2")


@dataclass
class StepRecord:
    step: int
    action: str
    edge: Pair
    separator: tuple[int, ...]
    delta: float
    entropies_computed: int
    evaluations: int
    model_entropy: float
    degrees: tuple[int, int]
    seconds: float = 0.0


@dataclass
class Selection:
    graph: Graph
    steps: list[StepRecord]
    model: StepwiseModel
    score: ScoreState
    cache: EntropyCache
    initial_entropy: float = 0.0
    cliques: list[VertexSet] = field(default_factory=list)
    separators: list[VertexSet] = field(default_factory=list)


def _best(candidates: Iterable[tuple[Pair, float]], largest: bool) -> tuple[Pair, float] | None:
    best = None
    for pair, delta in candidates:
        if best is None:
            best = (pair, delta)
            continue
        gain = delta - best[1] if largest else best[1] - delta
        if gain > TIE_TOLERANCE or (abs(gain) <= TIE_TOLERANCE and pair < best[0]):
            best = (pair, delta)
    return best


class _Counter:
    def __init__(self) -> None:
        self.evaluations = 0


def score_additions(
    model: StepwiseModel,
    cache: EntropyCache,
    max_clique_size: int | None = None,
    exclude: set[Pair] | None = None,
    counter: _Counter | None = None,
) -> list[tuple[Pair, float]]:
    """Entropy decrease of every permitted addition, in ascending pair order."""
    out = []
    for a, b in model.eligible_additions():
        if exclude and (a, b) in exclude:
            continue
        sep = model.separator(a, b)
        if max_clique_size is not None and sep.bit_count() + 2 > max_clique_size:
            continue
        if counter is not None:
            counter.evaluations += 1
        out.append(((a, b), add_delta(cache, sep, a, b)))
    return out


def score_deletions(
    model: StepwiseModel,
    cache: EntropyCache,
    exclude: set[Pair] | None = None,
    counter: _Counter | None = None,
) -> list[tuple[Pair, float]]:
    """Entropy increase of every permitted deletion, in ascending pair order."""
    out = []
    for a, b in model.eligible_deletions():
        if exclude and (a, b) in exclude:
            continue
        clique = model.cg.nodes[model.containing_clique(a, b)]
        if counter is not None:
            counter.evaluations += 1
        out.append(((a, b), delete_delta(cache, clique, a, b)))
    return out


def run(g0: Graph, data: Dataset, config: SelectionConfig, *, check: bool = False) -> Selection:
    """Greedy stepwise selection starting from the chordal graph ``g0``."""
    if data.n != g0.n:
        raise ColumnMismatch(f"dataset has {data.n} columns but the graph has {g0.n} vertices")
    model = StepwiseModel(g0, check=check)
    cache = EntropyCache(data)
    score = ScoreState.from_junction_tree(junction_tree(model.cg), cache)
    selection = Selection(model.graph, [], model, score, cache, initial_entropy=score.entropy)

    phase = "backward" if config.mode == "backward" else "forward"
    visited = {model.graph.key()}
    idle_phases = 0
    counter = _Counter()
    started = time.perf_counter()
    while model.n > 1 and len(selection.steps) < config.max_steps:
        move = _choose(model, cache, config, phase, visited, counter)
        if move is None:
            if config.mode != "alternating":
                break
            idle_phases += 1
            if idle_phases >= 2:
                break
            phase = "backward" if phase == "forward" else "forward"
            continue
        idle_phases = 0
        (a, b), delta = move
        if phase == "forward":
            outcome = model.apply_add(a, b)
            apply_junction_diff(
                score, *outcome.witness, outcome.clique, outcome.separator, cache, a, b
            )
            sep, degrees = outcome.separator, outcome.degrees
        else:
            degrees = (model.graph.degree(a), model.graph.degree(b))
            outcome = model.apply_delete(a, b)
            apply_delete_diff(score, outcome.clique, a, b, outcome.maximal_after, cache)
            sep = outcome.separator
        visited.add(model.graph.key())
        now = time.perf_counter()
        selection.steps.append(
            StepRecord(
                step=len(selection.steps) + 1,
                action="add" if phase == "forward" else "delete",
                edge=(a, b),
                separator=tuple(members(sep)),
                delta=delta,
                entropies_computed=len(cache.reset_counter()),
                evaluations=counter.evaluations,
                model_entropy=score.entropy,
                degrees=degrees,
                seconds=now - started,
            )
        )
        counter.evaluations = 0
        started = now
        log.debug("step %d: %s %s delta=%.6g", len(selection.steps), phase, (a, b), delta)

    jt = junction_tree(model.cg)
    selection.cliques = jt.clique_list()
    selection.separators = jt.separators
    return selection


def _choose(
    model: StepwiseModel,
    cache: EntropyCache,
    config: SelectionConfig,
    phase: str,
    visited: set[tuple[int, ...]],
    counter: _Counter,
) -> tuple[Pair, float] | None:
    guard = config.mode == "alternating"
    if phase == "forward":
        scored = score_additions(model, cache, config.max_clique_size, counter=counter)
        if guard:
            scored = [(p, d) for p, d in scored if model.graph.with_edge(*p).key() not in visited]
        best = _best(scored, largest=True)
        if best is None or best[1] < config.min_delta - TIE_TOLERANCE:
            return None
        return best
    scored = score_deletions(model, cache, counter=counter)
    if guard:
        scored = [(p, d) for p, d in scored if model.graph.without_edge(*p).key() not in visited]
    best = _best(scored, largest=False)
    if best is None or best[1] > config.min_delta + TIE_TOLERANCE:
        return None
    return best
