import math
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import direct_entropy, path, sets
from decomposable.cliquegraph import build, junction_tree
from decomposable.engine import StepwiseModel
from decomposable.errors import EmptyDataset, NotInClique, SeparatorNotPresent
from decomposable.graph import Graph, vset
from decomposable.oracle import random_dataset
from decomposable.scoring import (
    Dataset,
    EntropyCache,
    ScoreState,
    add_delta,
    apply_junction_diff,
    delete_delta,
    model_entropy,
    subset_entropy,
)

LN2 = 0.6931471805599453


@pytest.fixture
def small_data():
    # fixed 8-row table over four binary columns
    return Dataset.from_codes(
        [
            [0, 0, 1, 1],
            [0, 1, 1, 0],
            [1, 1, 0, 0],
            [1, 1, 1, 0],
            [0, 0, 0, 1],
            [1, 0, 0, 1],
            [1, 1, 1, 1],
            [0, 1, 0, 0],
        ]
    )


def test_entropy_examples():
    data = Dataset.from_rows(["a", "b"], [["x", "u"], ["y", "u"], ["x", "u"], ["y", "u"]])
    assert subset_entropy(data, 0) == 0.0
    assert subset_entropy(data, vset(0)) == pytest.approx(LN2, abs=1e-12)
    assert subset_entropy(data, vset(1)) == 0.0
    same = Dataset.from_codes([[2, 1, 0]] * 5)
    assert subset_entropy(same, vset(0, 1, 2)) == 0.0


def test_entropy_of_empty_dataset_is_an_error():
    empty = Dataset.from_rows(["a"], [])
    with pytest.raises(EmptyDataset):
        subset_entropy(empty, vset(0))
    with pytest.raises(EmptyDataset):
        EntropyCache(empty)


def test_from_rows_codes_follow_first_occurrence():
    data = Dataset.from_rows(["a", "b"], [["q", ""], ["p", "z"], ["q", ""]])
    assert data.levels == (("q", "p"), ("", "z"))
    assert data.codes.tolist() == [[0, 0], [1, 1], [0, 0]]


def test_entropy_uses_wide_keys_when_radix_overflows():
    rng = np.random.default_rng(0)
    codes = rng.integers(0, 300, size=(50, 9))
    codes[0] = 299
    data = Dataset.from_codes(codes)
    cols = list(range(9))
    assert subset_entropy(data, (1 << 9) - 1) == pytest.approx(direct_entropy(data, cols), abs=1e-12)


def test_cache_counts_misses_and_ignores_the_empty_set(small_data):
    cache = EntropyCache(small_data)
    assert cache(0) == 0.0
    assert cache.miss_count == 0
    cache(vset(0, 1))
    cache(vset(0, 1))
    assert cache.reset_counter() == [vset(0, 1)]
    assert cache.miss_count == 0
    assert cache(vset(0, 1)) == pytest.approx(direct_entropy(small_data, [0, 1]), abs=1e-12)


def test_add_delta_examples():
    rng = np.random.default_rng(4)
    col = rng.integers(0, 3, size=40)
    twin = Dataset.from_codes(np.stack([col, col], axis=1))
    assert add_delta(EntropyCache(twin), 0, 0, 1) == pytest.approx(direct_entropy(twin, [0]), abs=1e-12)

    # full cross product of the two domains factorizes exactly
    product = Dataset.from_codes([[x, y] for x in range(3) for y in range(2)])
    assert add_delta(EntropyCache(product), 0, 0, 1) == pytest.approx(0.0, abs=1e-12)

    const = Dataset.from_codes([[1, 0]] * 6)
    assert add_delta(EntropyCache(const), 0, 0, 1) == 0.0


def test_add_delta_rejects_endpoints_in_separator(small_data):
    with pytest.raises(ValueError):
        add_delta(EntropyCache(small_data), vset(0), 0, 1)


def test_delete_delta_examples(small_data):
    cache = EntropyCache(small_data)
    sep = vset(2)
    added = add_delta(cache, sep, 0, 1)
    assert delete_delta(cache, vset(0, 1, 2), 0, 1) == pytest.approx(added, abs=1e-12)
    product = Dataset.from_codes([[x, y] for x in range(2) for y in range(3)])
    assert delete_delta(EntropyCache(product), vset(0, 1), 0, 1) == pytest.approx(0.0, abs=1e-12)
    col = [0, 1, 1, 2, 0, 2, 2]
    twin = Dataset.from_codes([[c, c] for c in col])
    assert delete_delta(EntropyCache(twin), vset(0, 1), 0, 1) == pytest.approx(direct_entropy(twin, [0]), abs=1e-12)
    with pytest.raises(NotInClique):
        delete_delta(cache, vset(0, 2), 0, 1)


def test_delete_delta_undoes_apply_add(small_data):
    cache = EntropyCache(small_data)
    model = StepwiseModel(path(4))
    sep = model.separator(0, 2)
    forward = add_delta(cache, sep, 0, 2)
    model.apply_add(0, 2)
    clique = model.cg.nodes[model.containing_clique(0, 2)]
    assert delete_delta(cache, clique, 0, 2) == pytest.approx(forward, abs=1e-12)


def test_model_entropy_examples(small_data):
    cache = EntropyCache(small_data)
    saturated = junction_tree(build(Graph.complete(4)))
    assert model_entropy(saturated, cache) == pytest.approx(direct_entropy(small_data, range(4)), abs=1e-12)
    null = junction_tree(build(Graph(4)))
    assert model_entropy(null, cache) == pytest.approx(sum(direct_entropy(small_data, [v]) for v in range(4)), abs=1e-12)
    chain = junction_tree(build(path(4)))
    expected = (
        direct_entropy(small_data, [0, 1])
        + direct_entropy(small_data, [1, 2])
        + direct_entropy(small_data, [2, 3])
        - direct_entropy(small_data, [1])
        - direct_entropy(small_data, [2])
    )
    assert model_entropy(chain, cache) == pytest.approx(expected, abs=1e-12)


def _diff_after_add(g, a, b, data):
    cache = EntropyCache(data)
    model = StepwiseModel(g)
    state = ScoreState.from_junction_tree(junction_tree(model.cg), cache)
    out = model.apply_add(a, b)
    apply_junction_diff(state, *out.witness, out.clique, out.separator, cache, a, b)
    fresh = junction_tree(build(model.graph))
    return state, fresh, cache


@pytest.mark.parametrize(
    "g, pair, cliques, separators",
    [
        (path(4), (0, 2), [{0, 1, 2}, {2, 3}], [{2}]),
        (Graph(4, [(0, 1), (2, 3)]), (1, 2), [{0, 1}, {1, 2}, {2, 3}], [{1}, {2}]),
        (Graph(4, [(0, 1), (1, 2), (1, 3)]), (0, 2), [{0, 1, 2}, {1, 3}], [{1}]),
    ],
)
def test_junction_diff_examples(g, pair, cliques, separators, small_data):
    state, fresh, cache = _diff_after_add(g, *pair, small_data)
    assert sorted(sets(state.cliques), key=sorted) == cliques
    assert sorted(sets(state.separators.elements()), key=sorted) == separators
    assert state.cliques == Counter(fresh.cliques.values())
    assert state.separators == fresh.separator_counts()
    assert state.entropy == pytest.approx(model_entropy(fresh, cache), rel=1e-9)


def test_junction_diff_requires_the_separator(small_data):
    cache = EntropyCache(small_data)
    state = ScoreState.from_junction_tree(junction_tree(build(path(4))), cache)
    with pytest.raises(SeparatorNotPresent):
        apply_junction_diff(state, vset(0, 1), vset(2, 3), vset(0, 3), 0, cache, 0, 3)


@settings(max_examples=40)
@given(
    arrays(np.int64, st.tuples(st.integers(1, 30), st.integers(1, 4)), elements=st.integers(0, 3)),
    st.randoms(use_true_random=False),
)
def test_entropy_is_invariant_under_row_order_and_subadditive(codes, rnd):
    data = Dataset.from_codes(codes)
    full = (1 << data.n) - 1
    h = subset_entropy(data, full)
    perm = list(range(data.num_rows))
    rnd.shuffle(perm)
    shuffled = Dataset.from_codes(codes[perm])
    assert subset_entropy(shuffled, full) == pytest.approx(h, abs=1e-12)
    assert h == pytest.approx(direct_entropy(data, range(data.n)), abs=1e-12)
    singles = sum(subset_entropy(data, 1 << v) for v in range(data.n))
    assert -1e-12 <= h <= singles + 1e-12


@settings(max_examples=40)
@given(st.integers(0, 2**32))
def test_entropy_ignores_column_order(seed):
    data = random_dataset(random.Random(seed), 4, 60)
    swapped = Dataset.from_codes(data.codes[:, [2, 0, 3, 1]])
    # column j of swapped is column order[j] of data
    assert subset_entropy(swapped, vset(0, 1)) == pytest.approx(subset_entropy(data, vset(0, 2)), abs=1e-12)


@settings(max_examples=60)
@given(st.integers(0, 2**32))
def test_add_delta_is_a_nonnegative_conditional_mutual_information(seed):
    rng = random.Random(seed)
    data = random_dataset(rng, 5, rng.randint(1, 80))
    cache = EntropyCache(data)
    a, b = rng.sample(range(5), 2)
    rest = [v for v in range(5) if v not in (a, b)]
    sep = sum(1 << v for v in rng.sample(rest, rng.randint(0, 3)))
    delta = add_delta(cache, sep, a, b)
    assert delta >= -1e-12
    assert math.isfinite(delta)
