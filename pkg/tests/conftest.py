import itertools
import os
from functools import lru_cache

import numpy as np
import pytest

from hortonlab import BinaryTree, SamplerConfig, TokunagaSequence, parse_tree, sample_tree

DATA = os.path.join(os.path.dirname(__file__), "data")

# filled by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_VERDICTS, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)


@lru_cache(maxsize=None)
def _shapes(n):
    if n == 1:
        return (None,)
    out = []
    for k in range(1, n):
        for a, b in itertools.product(_shapes(k), _shapes(n - k)):
            out.append((a, b))
    return tuple(out)


def enumerate_full_binary_trees(n_leaves):
    """Every plane full binary tree with ``n_leaves`` leaves (Catalan many)."""
    return [BinaryTree.from_nested(s) for s in _shapes(n_leaves)]


def random_split_tree(rng, n_leaves):
    """Random full binary tree: recursively split the leaf count uniformly."""
    def build(n):
        if n == 1:
            return None
        k = int(rng.integers(1, n))
        return (build(k), build(n - k))

    return BinaryTree.from_nested(build(n_leaves))


def sampled_trees(n, seed=0):
    """A mixed bag of ``n`` trees from several sampler configurations."""
    configs = [
        SamplerConfig(TokunagaSequence.geometric(1, 2), 4, seed=seed),
        SamplerConfig(TokunagaSequence.shallow(1.5, 0.5), 5, distribution="geometric", seed=seed),
        SamplerConfig(TokunagaSequence.explicit([1, 2]), 4, distribution="deterministic", seed=seed),
        SamplerConfig(TokunagaSequence.differentiated(0.5, 1), 4, seed=seed),
        SamplerConfig(TokunagaSequence.geometric(0.3, 1.5), 3, seed=seed),
    ]
    return [sample_tree(configs[i % len(configs)], i) for i in range(n)]


@pytest.fixture
def reference_tree():
    """Order-3 tree with N = (10, 3, 1) and N_12, N_13, N_23 = 3, 1, 1."""
    with open(os.path.join(DATA, "order3_reference.nwk")) as fh:
        return parse_tree(fh.read())


@pytest.fixture
def comb4():
    # root -> (leaf, v1), v1 -> (leaf, v2), v2 -> (leaf, leaf)
    return BinaryTree.from_nested(("a", ("b", ("c", "d"))))


@pytest.fixture
def perfect4():
    return BinaryTree.from_nested(((None, None), (None, None)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
