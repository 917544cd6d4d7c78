"""Slow reference implementations that define ground truth for the fast paths.

Everything here works from definitions: chordality by searching for a
chordless cycle, eligibility by trying a move and re-testing chordality,
minimal separators by subset enumeration.  Costs are exponential in places,
so inputs are limited to small graphs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np

from .cliquegraph import build, junction_tree, separator_closure_holds
from .engine import StepwiseModel, score_additions, score_deletions
from .errors import AreAdjacent, DecomposableError, NotChordal
from .graph import Graph, VertexSet, format_set, is_chordal, iter_members, members, reachable
from .scoring import Dataset, EntropyCache, ScoreState, apply_delete_diff, apply_junction_diff, model_entropy

MAX_ORACLE_VERTICES = 14


def _require_small(g: Graph) -> None:
    if g.n > MAX_ORACLE_VERTICES:
        raise ValueError(f"reference oracle limited to n <= {MAX_ORACLE_VERTICES}")


def has_chordless_cycle(g: Graph) -> bool:
    """Search for an induced cycle of length at least four.

    Each candidate cycle is grown as an induced path from its smallest
    vertex, so a chord anywhere prunes the search immediately.
    """
    adj = g.adj
    for s in range(g.n):
        higher = ~((1 << (s + 1)) - 1)
        # path s, u, ..., v with every vertex > s; interior kept non-adjacent to s
        stack = []
        for u in iter_members(adj[s] & higher):
            stack.append((u, 1 << s | 1 << u))
        while stack:
            v, path = stack.pop()
            for w in iter_members(adj[v] & higher & ~path):
                # w may touch only v and, if it closes the cycle, s
                if adj[w] & path & ~(1 << v) & ~(1 << s):
                    continue
                if adj[w] >> s & 1:
                    if path.bit_count() >= 3:
                        return True
                    continue
                stack.append((w, path | 1 << w))
    return False


def brute_is_chordal(g: Graph) -> bool:
    return not has_chordless_cycle(g)


def brute_maximal_cliques(g: Graph) -> list[VertexSet]:
    """Bron-Kerbosch enumeration; valid for any graph."""
    out: list[VertexSet] = []

    def expand(r: VertexSet, p: VertexSet, x: VertexSet) -> None:
        if not p and not x:
            out.append(r)
            return
        for v in iter_members(p):
            expand(r | 1 << v, p & g.adj[v], x & g.adj[v])
            p &= ~(1 << v)
            x |= 1 << v

    if g.n:
        expand(0, g.vertices, 0)
    return sorted(out, key=lambda m: tuple(members(m)))


def brute_eligible_additions(g: Graph) -> set[tuple[int, int]]:
    """Non-edges whose addition keeps the graph chordal."""
    _require_small(g)
    if not is_chordal(g):
        raise NotChordal("oracle requires a chordal graph")
    return {(a, b) for a, b in combinations(range(g.n), 2) if not g.has_edge(a, b) and is_chordal(g.with_edge(a, b))}


def brute_eligible_deletions(g: Graph) -> set[tuple[int, int]]:
    """Edges whose removal keeps the graph chordal."""
    _require_small(g)
    if not is_chordal(g):
        raise NotChordal("oracle requires a chordal graph")
    return {e for e in g.edges() if is_chordal(g.without_edge(*e))}


def separates(g: Graph, s: VertexSet, a: int, b: int) -> bool:
    return not reachable(g, 1 << a, s) >> b & 1


def minimal_separators(g: Graph, a: int, b: int) -> list[VertexSet]:
    """All inclusion-minimal vertex sets separating ``a`` from ``b``."""
    _require_small(g)
    if g.has_edge(a, b):
        raise AreAdjacent(f"vertices {a} and {b} are adjacent")
    if separates(g, 0, a, b):
        return [0]
    others = [v for v in range(g.n) if v not in (a, b)]
    found = []
    for size in range(1, len(others) + 1):
        for combo in combinations(others, size):
            s = sum(1 << v for v in combo)
            if any(m & ~s == 0 for m in found):
                continue
            if separates(g, s, a, b):
                found.append(s)
    return sorted(found, key=lambda m: tuple(members(m)))


def brute_minimal_separator(g: Graph, a: int, b: int) -> VertexSet:
    """The minimal separator inside the common neighbourhood, if there is one.

    Falls back to the lexicographically smallest minimal separator; the empty
    set is returned when ``a`` and ``b`` lie in different components.
    """
    if not is_chordal(g):
        raise NotChordal("oracle requires a chordal graph")
    seps = minimal_separators(g, a, b)
    common = g.adj[a] & g.adj[b]
    for s in seps:
        if s & ~common == 0:
            return s
    return seps[0]


def satisfies_addition_characterization(g: Graph, a: int, b: int) -> bool:
    """Direct test: some minimal a-b separator is fully joined to both endpoints."""
    if g.has_edge(a, b):
        return False
    common = g.adj[a] & g.adj[b]
    for size in range(common.bit_count() + 1):
        for combo in combinations(members(common), size):
            s = sum(1 << v for v in combo)
            if separates(g, s, a, b) and all(not separates(g, s & ~(1 << v), a, b) for v in combo):
                return True
    return False


def random_chordal_graph(rng: random.Random, n: int, density: float | None = None) -> Graph:
    """Fill-in of a random graph along a random elimination order."""
    if density is None:
        density = rng.random() * 0.6
    g = Graph(n)
    for u, v in combinations(range(n), 2):
        if rng.random() < density:
            g.add_edge(u, v)
    order = list(range(n))
    rng.shuffle(order)
    remaining = g.vertices
    for v in order:
        remaining &= ~(1 << v)
        later = members(g.adj[v] & remaining)
        for x, y in combinations(later, 2):
            g.add_edge(x, y)
    return g


def random_dataset(rng: random.Random, n: int, rows: int, max_levels: int = 3) -> Dataset:
    """Categorical data with some planted dependence between random columns."""
    nprng = np.random.default_rng(rng.getrandbits(63))
    levels = nprng.integers(1, max_levels + 1, size=n)
    codes = np.zeros((rows, n), dtype=np.int64)
    for j in range(n):
        fresh = nprng.integers(0, levels[j], size=rows)
        if j and nprng.random() < 0.6:
            parent = int(nprng.integers(0, j))
            copied = codes[:, parent] % levels[j]
            noise = nprng.random(rows) < nprng.uniform(0.1, 0.9)
            codes[:, j] = np.where(noise, fresh, copied)
        else:
            codes[:, j] = fresh
    return Dataset.from_codes(codes)


@dataclass
class Mismatch:
    structure: str
    expected: Any
    actual: Any
    step: int


@dataclass
class OracleReport:
    checks: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def expect(self, structure: str, expected: Any, actual: Any, step: int) -> None:
        self.checks += 1
        if expected != actual:
            self.mismatches.append(Mismatch(structure, expected, actual, step))

    def summary(self) -> str:
        lines = [f"checks: {self.checks}", f"mismatches: {len(self.mismatches)}"]
        for m in self.mismatches[:20]:
            lines.append(f"  step {m.step}: {m.structure}: expected {m.expected!r}, got {m.actual!r}")
        return "\n".join(lines)


def forward_budget(n: int, degrees: tuple[int, int]) -> int:
    return 2 * (n - degrees[0]) + 2 * (n - degrees[1])


def _describe_cg(cg) -> tuple[list[str], list[str]]:
    nodes, edges = cg.canonical()
    node_list = sorted(format_set(c) for c in nodes)
    edge_list = sorted(
        f"{'|'.join(sorted(format_set(c) for c in pair))}:{format_set(sep)}" for pair, sep in edges
    )
    return node_list, edge_list


def verify_trajectory(
    seed: int,
    n: int,
    steps: int,
    *,
    rows: int = 200,
    inject_fault: bool = False,
    start: Graph | None = None,
) -> OracleReport:
    """Run random moves and compare every maintained structure to the oracle.

    Each step scores every eligible move (which keeps the entropy cache warm),
    then applies a uniformly chosen one.  After the move the clique graph,
    both eligibility sets, the junction tree, the incremental model entropy
    and the entropy-computation counters are checked.
    """
    rng = random.Random(seed)
    report = OracleReport()
    if n < 2:
        return report
    _require_small(Graph(n))
    g0 = start if start is not None else Graph(n)
    model = StepwiseModel(g0)
    model.skip_stale_removal = inject_fault
    data = random_dataset(rng, n, rows)
    cache = EntropyCache(data)
    score = ScoreState.from_junction_tree(junction_tree(model.cg), cache)
    last_add: tuple[int, int] | None = None
    for step in range(1, steps + 1):
        try:
            adds = [p for p, _ in score_additions(model, cache)]
            misses = cache.reset_counter()
            dels = [p for p, _ in score_deletions(model, cache)]
        except DecomposableError as exc:
            report.expect("candidate scoring", None, f"{type(exc).__name__}: {exc}", step)
            break
        if last_add is not None:
            report.expect(
                "forward entropy budget", True, len(misses) <= forward_budget(n, last_add), step
            )
        if not adds and not dels:
            break
        try:
            if dels and (not adds or rng.random() < 0.4):
                a, b = rng.choice(dels)
                outcome = model.apply_delete(a, b)
                apply_delete_diff(score, outcome.clique, a, b, outcome.maximal_after, cache)
                last_add = None
            else:
                a, b = rng.choice(adds)
                outcome = model.apply_add(a, b)
                apply_junction_diff(score, *outcome.witness, outcome.clique, outcome.separator, cache, a, b)
                last_add = outcome.degrees
        except DecomposableError as exc:
            report.expect("move applied", None, f"{type(exc).__name__}: {exc}", step)
            break
        cache.reset_counter()
        chordal = is_chordal(model.graph)
        report.expect("model graph chordal", True, chordal, step)
        if not chordal:
            break
        _compare(report, model, score, cache, step)
    return report


def _compare(report: OracleReport, model: StepwiseModel, score: ScoreState, cache: EntropyCache, step: int) -> None:
    g = model.graph
    fresh = build(g)
    report.expect("clique graph", _describe_cg(fresh), _describe_cg(model.cg), step)
    report.expect("separator closure", True, separator_closure_holds(model.cg), step)
    report.expect("forward eligibility", sorted(brute_eligible_additions(g)), model.eligible_additions(), step)
    report.expect("backward eligibility", sorted(brute_eligible_deletions(g)), model.eligible_deletions(), step)
    jt = junction_tree(model.cg)
    report.expect("running intersection", True, jt.has_running_intersection(), step)
    report.expect("clique count bound", True, len(model.cg.nodes) <= max(g.n, 1), step)
    expected = model_entropy(junction_tree(fresh), cache)
    report.expect(
        "model entropy",
        True,
        math.isclose(score.entropy, expected, rel_tol=1e-9, abs_tol=1e-12),
        step,
    )
