"""Empirical entropies and the entropy score of decomposable models.

All entropies are Shannon entropies of empirical distributions, in nats.
A model's entropy is the clique entropies minus the separator entropies of
any junction tree; minimizing it is maximum-likelihood fitting.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .cliquegraph import JunctionTree
from .errors import EmptyDataset, NotInClique, SeparatorNotPresent
from .graph import VertexSet, members

_MAX_RADIX_PRODUCT = 1 << 62


@dataclass(frozen=True, eq=False)
class Dataset:
    """Categorical table stored as dense integer codes.

    ``codes[r, j]`` is the code of row ``r`` in column ``j``; ``levels[j]``
    lists the raw values of column ``j`` in code order.
    """

    columns: tuple[str, ...]
    codes: np.ndarray
    levels: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if self.codes.ndim != 2 or self.codes.shape[1] != len(self.columns):
            raise ValueError("codes must be an (N, n) array matching the column list")
        for j, lv in enumerate(self.levels):
            if self.codes.shape[0] and self.codes[:, j].max() >= len(lv):
                raise ValueError(f"column {self.columns[j]!r} has codes outside its domain")

    @classmethod
    def from_rows(cls, columns: Sequence[str], rows: Sequence[Sequence[str]]) -> Dataset:
        """Encode raw string rows; codes follow first-occurrence order."""
        n = len(columns)
        dictionaries: list[dict[str, int]] = [{} for _ in range(n)]
        codes = np.zeros((len(rows), n), dtype=np.int64)
        for r, row in enumerate(rows):
            for j, value in enumerate(row):
                codes[r, j] = dictionaries[j].setdefault(value, len(dictionaries[j]))
        return cls(tuple(columns), codes, tuple(tuple(d) for d in dictionaries))

    @classmethod
    def from_codes(cls, codes, columns: Sequence[str] | None = None) -> Dataset:
        arr = np.asarray(codes, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("codes must be two-dimensional")
        if columns is None:
            columns = [f"x{j}" for j in range(arr.shape[1])]
        sizes = [int(arr[:, j].max()) + 1 if arr.shape[0] else 0 for j in range(arr.shape[1])]
        levels = tuple(tuple(str(k) for k in range(s)) for s in sizes)
        return cls(tuple(columns), arr, levels)

    @property
    def n(self) -> int:
        return len(self.columns)

    @property
    def num_rows(self) -> int:
        return int(self.codes.shape[0])

    @property
    def domain_sizes(self) -> list[int]:
        return [len(lv) for lv in self.levels]


def subset_entropy(data: Dataset, s: VertexSet) -> float:
    """Entropy of the empirical joint distribution of the columns in ``s``."""
    if data.num_rows == 0:
        raise EmptyDataset("entropy of an empty dataset is undefined")
    if not s:
        return 0.0
    cols = members(s)
    block = data.codes[:, cols]
    sizes = [max(data.domain_sizes[c], 1) for c in cols]
    if math.prod(sizes) < _MAX_RADIX_PRODUCT:
        keys = np.zeros(data.num_rows, dtype=np.int64)
        for j, size in enumerate(sizes):
            keys = keys * size + block[:, j]
        counts = np.unique(keys, return_counts=True)[1]
    else:
        counts = np.unique(block, axis=0, return_counts=True)[1]
    p = counts / data.num_rows
    return float(-(p * np.log(p)).sum())


class EntropyCache:
    """Memoized subset entropies with a per-step record of cache misses.

    The empty set always has entropy zero and is never counted as a miss.
    """

    def __init__(self, data: Dataset) -> None:
        if data.num_rows == 0:
            raise EmptyDataset("cannot score an empty dataset")
        self.data = data
        self._values: dict[VertexSet, float] = {}
        self.step_misses: list[VertexSet] = []
        self.total_misses = 0

    def __call__(self, s: VertexSet) -> float:
        if not s:
            return 0.0
        value = self._values.get(s)
        if value is None:
            value = self._values[s] = subset_entropy(self.data, s)
            self.step_misses.append(s)
            self.total_misses += 1
        return value

    def __contains__(self, s: VertexSet) -> bool:
        return not s or s in self._values

    def __len__(self) -> int:
        return len(self._values)

    @property
    def miss_count(self) -> int:
        return len(self.step_misses)

    def reset_counter(self) -> list[VertexSet]:
        """Close the current step and return the subsets it had to compute."""
        misses, self.step_misses = self.step_misses, []
        return misses


def add_delta(cache: EntropyCache, separator: VertexSet, a: int, b: int) -> float:
    """Entropy decrease from adding edge ``(a, b)`` whose minimal separator is given.

    This is the empirical conditional mutual information of ``a`` and ``b``
    given the separator.
    """
    if separator >> a & 1 or separator >> b & 1:
        raise ValueError("endpoints must lie outside the separator")
    sa = separator | 1 << a
    sb = separator | 1 << b
    return cache(sa) + cache(sb) - cache(sa | 1 << b) - cache(separator)


def delete_delta(cache: EntropyCache, clique: VertexSet, a: int, b: int) -> float:
    """Entropy increase from deleting edge ``(a, b)`` out of its unique clique."""
    if not (clique >> a & 1 and clique >> b & 1) or a == b:
        raise NotInClique(f"edge ({a}, {b}) is not inside the given clique")
    return add_delta(cache, clique & ~(1 << a) & ~(1 << b), a, b)


def model_entropy(jt: JunctionTree, cache: EntropyCache) -> float:
    """Clique entropies minus separator entropies of a junction tree."""
    return math.fsum(cache(c) for c in jt.cliques.values()) - math.fsum(cache(s) for _, _, s in jt.edges)


@dataclass
class ScoreState:
    """Clique list, separator multiset and model entropy, updated step by step."""

    cliques: Counter[VertexSet] = field(default_factory=Counter)
    separators: Counter[VertexSet] = field(default_factory=Counter)
    entropy: float = 0.0

    @classmethod
    def from_junction_tree(cls, jt: JunctionTree, cache: EntropyCache) -> ScoreState:
        return cls(
            cliques=Counter(jt.cliques.values()),
            separators=jt.separator_counts(),
            entropy=model_entropy(jt, cache),
        )

    def recomputed_entropy(self, cache: EntropyCache) -> float:
        return math.fsum(cache(c) * k for c, k in self.cliques.items()) - math.fsum(
            cache(s) * k for s, k in self.separators.items()
        )

    def _drop_separator(self, s: VertexSet) -> None:
        if self.separators[s] <= 0:
            raise SeparatorNotPresent(s)
        self.separators[s] -= 1
        if not self.separators[s]:
            del self.separators[s]

    def _drop_clique(self, c: VertexSet) -> None:
        if self.cliques[c] <= 0:
            raise KeyError(c)
        self.cliques[c] -= 1
        if not self.cliques[c]:
            del self.cliques[c]


def apply_junction_diff(
    state: ScoreState,
    clique_a: VertexSet,
    clique_b: VertexSet,
    new_clique: VertexSet,
    separator: VertexSet,
    cache: EntropyCache,
    a: int,
    b: int,
) -> ScoreState:
    """Update ``state`` in place after adding edge ``(a, b)``.

    ``clique_a`` and ``clique_b`` are the witness cliques holding ``a`` and
    ``b``; ``new_clique`` is the separator plus both endpoints.  A witness
    clique contained in the new clique is no longer maximal and leaves the
    clique list together with its connecting separator.
    """
    if state.separators[separator] <= 0:
        raise SeparatorNotPresent(separator)
    delta = add_delta(cache, separator, a, b)
    state._drop_separator(separator)
    state.cliques[new_clique] += 1
    for witness in (clique_a, clique_b):
        if witness & ~new_clique == 0:
            state._drop_clique(witness)
        else:
            state.separators[new_clique & witness] += 1
    state.entropy -= delta
    return state


def apply_delete_diff(
    state: ScoreState,
    clique: VertexSet,
    a: int,
    b: int,
    maximal_after: tuple[bool, bool],
    cache: EntropyCache,
) -> ScoreState:
    """Update ``state`` in place after deleting edge ``(a, b)`` from ``clique``.

    ``maximal_after`` tells whether ``clique - b`` and ``clique - a`` are
    maximal cliques of the new graph.  Otherwise they sit inside an existing
    clique and their separator is dropped instead.
    """
    delta = delete_delta(cache, clique, a, b)
    state._drop_clique(clique)
    separator = clique & ~(1 << a) & ~(1 << b)
    for part, maximal in zip((clique & ~(1 << b), clique & ~(1 << a)), maximal_after):
        if maximal:
            state.cliques[part] += 1
        else:
            state._drop_separator(part)
    state.separators[separator] += 1
    state.entropy += delta
    return state
