"""Forward and backward stepwise selection of decomposable models over categorical data."""

from .cliquegraph import CliqueGraph, JunctionTree, SeparatorIndex, build, edge_valid, index_lookup, junction_tree
from .engine import SelectionConfig, StepRecord, StepwiseModel, eligible_additions, eligible_deletions, run
from .graph import (
    Graph,
    components_excluding,
    is_chordal,
    is_perfect_elimination,
    is_strongly_decomposable,
    lex_bfs,
    maximal_cliques,
    members,
    vset,
)
from .scoring import Dataset, EntropyCache, ScoreState, add_delta, delete_delta, model_entropy, subset_entropy

__version__ = "0.1.0"

__all__ = [
    "add_delta",
    "build",
    "CliqueGraph",
    "components_excluding",
    "Dataset",
    "delete_delta",
    "edge_valid",
    "eligible_additions",
    "eligible_deletions",
    "EntropyCache",
    "Graph",
    "index_lookup",
    "is_chordal",
    "is_perfect_elimination",
    "is_strongly_decomposable",
    "junction_tree",
    "JunctionTree",
    "lex_bfs",
    "maximal_cliques",
    "members",
    "model_entropy",
    "run",
    "ScoreState",
    "SelectionConfig",
    "SeparatorIndex",
    "StepRecord",
    "StepwiseModel",
    "subset_entropy",
    "vset",
]
