import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hortonlab import (
    BinaryTree,
    EmptyTreeError,
    NodeNotFoundError,
    NotFullBinaryError,
    RootedTree,
    assign_orders,
    canonical_form,
    cut_leaves,
    horton_statistics,
    order_via_pruning,
    prune,
    series_reduce,
    tree_order,
)

from conftest import enumerate_full_binary_trees, random_split_tree


def nested_trees(max_leaves=12):
    leaf = st.none()
    return st.recursive(leaf, lambda kids: st.tuples(kids, kids), max_leaves=max_leaves).map(
        BinaryTree.from_nested
    )


# ---- construction -------------------------------------------------- #


def test_empty_and_single_vertex_are_valid():
    assert BinaryTree.empty().is_empty
    assert BinaryTree.empty().root == -1
    single = BinaryTree.single()
    assert single.n_nodes == 1 and single.n_leaves == 1 and single.root == 0


def test_rejects_unary_node():
    with pytest.raises(NotFullBinaryError):
        BinaryTree(np.array([1, -1]), np.array([-1, -1]))


def test_rejects_shared_child():
    with pytest.raises(ValueError):
        BinaryTree(np.array([1, -1, -1]), np.array([1, -1, -1]))


def test_from_children_renumbers_to_preorder():
    t = BinaryTree.from_children({7: (3, 5), 3: (), 5: (1, 2), 1: (), 2: ()}, root=7)
    assert t == BinaryTree.from_nested((None, (None, None)))
    assert list(t.parent) == [-1, 0, 0, 2, 2]


def test_missing_node_raises():
    t = BinaryTree.single()
    with pytest.raises(NodeNotFoundError):
        t.children(3)


def test_trees_are_immutable(perfect4):
    with pytest.raises(ValueError):
        perfect4.left[0] = 2


# ---- pruning ------------------------------------------------------- #


def test_prune_single_vertex_gives_empty():
    assert prune(BinaryTree.single()).is_empty


def test_prune_empty_is_empty():
    assert prune(BinaryTree.empty()).is_empty


def test_prune_comb_to_single_vertex(comb4):
    assert prune(comb4) == BinaryTree.single()


def test_reference_tree_needs_three_prunings(reference_tree):
    once = prune(reference_tree)
    assert tree_order(once) == 2
    assert canonical_form(once) == "((..).)"
    assert not prune(once).is_empty
    assert prune(prune(once)).is_empty


def test_prune_does_not_touch_input(perfect4):
    before = perfect4.left.copy()
    prune(perfect4)
    np.testing.assert_array_equal(perfect4.left, before)


def test_prune_keeps_labels_of_survivors():
    t = BinaryTree.from_children({0: (1, 2), 1: (3, 4), 2: (), 3: (), 4: ()}, labels=["r", "x", "y", "p", "q"])
    pruned = prune(t)
    assert pruned.n_nodes == 1 and pruned.labels == ("x",)


def test_series_reduce_collapses_chain():
    chain = RootedTree(children=((1,), (2,), ()), root=0, labels=("root", "a", "b"))
    reduced = series_reduce(chain)
    assert reduced.n_nodes == 1 and reduced.labels == ("b",)


def test_series_reduce_returns_full_binary_unchanged(perfect4):
    assert series_reduce(perfect4) is perfect4


def test_series_reduce_of_cut_reference_tree(reference_tree):
    cut = cut_leaves(reference_tree)
    assert len(cut.children) == 9
    assert sorted(len(c) for c in cut.children) == [0, 0, 0, 1, 1, 1, 1, 2, 2]
    assert canonical_form(series_reduce(cut)) == "((..).)"


def test_series_reduce_empty():
    assert series_reduce(RootedTree((), -1)).is_empty


def test_series_reduce_rejects_ternary():
    with pytest.raises(NotFullBinaryError):
        series_reduce(RootedTree(((1, 2, 3), (), (), ()), 0))


@settings(max_examples=200, deadline=None)
@given(nested_trees())
def test_prune_equals_cut_then_series_reduce(t):
    assert prune(t) == series_reduce(cut_leaves(t))


@settings(max_examples=200, deadline=None)
@given(nested_trees())
def test_series_reduce_idempotent(t):
    once = series_reduce(cut_leaves(t))
    assert series_reduce(once) == once
    as_rooted = RootedTree(tuple(once.children(v) for v in range(once.n_nodes)), once.root)
    assert series_reduce(as_rooted) == once


# ---- ordering ------------------------------------------------------ #


def test_single_vertex_order():
    orders = assign_orders(BinaryTree.single())
    assert orders.tree_order == 1 and list(orders.order) == [1]


def test_perfect_tree_orders(perfect4):
    orders = assign_orders(perfect4)
    # preorder: root, internal, leaf, leaf, internal, leaf, leaf
    assert list(orders.order) == [3, 2, 1, 1, 2, 1, 1]
    assert orders.tree_order == 3


def test_reference_tree_orders(reference_tree):
    orders = assign_orders(reference_tree)
    assert orders.tree_order == 3
    assert orders.order.max() == orders.order[0] == 3


def test_assign_orders_rejects_empty():
    with pytest.raises(EmptyTreeError):
        assign_orders(BinaryTree.empty())
    assert tree_order(BinaryTree.empty()) == 0


def test_order_via_pruning_examples(reference_tree, perfect4):
    leaf = int(np.flatnonzero(reference_tree.left < 0)[0])
    assert order_via_pruning(reference_tree, leaf) == 1
    assert order_via_pruning(reference_tree, 0) == 3
    assert order_via_pruning(perfect4, 0) == 3


def test_order_via_pruning_errors(perfect4):
    with pytest.raises(EmptyTreeError):
        order_via_pruning(BinaryTree.empty(), 0)
    with pytest.raises(NodeNotFoundError):
        order_via_pruning(perfect4, 99)


@pytest.mark.parametrize("n_leaves", range(1, 8))
def test_orders_match_pruning_small_exhaustive(n_leaves):
    for t in enumerate_full_binary_trees(n_leaves):
        orders = assign_orders(t).order
        assert all(orders[v] == order_via_pruning(t, v) for v in range(t.n_nodes))


def test_prune_k_times_empties(rng):
    for _ in range(200):
        t = random_split_tree(rng, int(rng.integers(1, 40)))
        K = tree_order(t)
        for _ in range(K - 1):
            t = prune(t)
        assert not t.is_empty
        assert prune(t).is_empty


# ---- statistics ---------------------------------------------------- #


def test_reference_tree_statistics(reference_tree):
    stats = horton_statistics(reference_tree)
    assert stats.order == 3
    assert stats.branch_counts == {1: 10, 2: 3, 3: 1}
    assert stats.side_branch_counts == {(1, 2): 3, (1, 3): 1, (2, 3): 1}


def test_perfect_tree_statistics(perfect4):
    stats = horton_statistics(perfect4)
    assert stats.branch_counts == {1: 4, 2: 2, 3: 1}
    assert all(v == 0 for v in stats.side_branch_counts.values())


def test_comb_statistics(comb4):
    stats = horton_statistics(comb4)
    assert stats.branch_counts == {1: 4, 2: 1}
    assert stats.side_branch_counts == {(1, 2): 2}


def test_statistics_reject_empty():
    with pytest.raises(EmptyTreeError):
        horton_statistics(BinaryTree.empty())


def _branches_by_components(t):
    """Count maximal same-order connected components directly (union-find)."""
    order = assign_orders(t).order
    parent = list(range(t.n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in range(t.n_nodes):
        for c in t.children(p):
            if order[c] == order[p]:
                parent[find(c)] = find(p)
    counts = {}
    for v in range(t.n_nodes):
        if find(v) == v:
            counts[int(order[v])] = counts.get(int(order[v]), 0) + 1
    return counts


@settings(max_examples=200, deadline=None)
@given(nested_trees(20))
def test_branch_count_matches_component_count(t):
    stats = horton_statistics(t)
    expected = _branches_by_components(t)
    assert {k: v for k, v in stats.branch_counts.items() if v} == expected


@settings(max_examples=300, deadline=None)
@given(nested_trees(30))
def test_balance_identity(t):
    stats = horton_statistics(t)
    K = stats.order
    assert stats.N(K) == 1
    for k in range(1, K):
        assert stats.N(k) >= 2 * stats.N(k + 1)
        assert stats.N(k) - 2 * stats.N(k + 1) == sum(stats.Nij(k, j) for j in range(k + 1, K + 1))


@settings(max_examples=300, deadline=None)
@given(nested_trees(30))
def test_prune_shifts_statistics(t):
    stats = horton_statistics(t)
    if stats.order < 2:
        return
    pruned = horton_statistics(prune(t))
    assert pruned.order == stats.order - 1
    for k in range(2, stats.order + 1):
        assert stats.N(k) == pruned.N(k - 1)
    for (i, j), n in stats.side_branch_counts.items():
        if i >= 2:
            assert n == pruned.Nij(i - 1, j - 1)


def test_canonical_form_ignores_child_order():
    a = BinaryTree.from_nested(((None, None), None))
    b = BinaryTree.from_nested((None, (None, None)))
    assert a != b
    assert canonical_form(a) == canonical_form(b)
