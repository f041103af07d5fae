"""Finite rooted full binary trees, pruning and Horton-Strahler statistics.

Trees are stored as an index arena: two ``int64`` arrays ``left`` and
``right`` holding child indices (``-1`` for a leaf).  Node ``0`` is the root
and every child index is larger than its parent's index, so a reversed index
sweep is a valid bottom-up traversal.  Trees never mutate; :func:`prune`
returns a freshly compacted tree.

The heavy loops (ordering, counting, pruning) are numba kernels because the
Monte Carlo estimators run them on tens of thousands of trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .errors import EmptyTreeError, NodeNotFoundError, NotFullBinaryError

EMPTY = -1


# --------------------------------------------------------------------- #
# kernels
# --------------------------------------------------------------------- #


@numba.njit(cache=True, nogil=True)
def _orders_kernel(left, right):
    n = left.shape[0]
    order = np.ones(n, dtype=np.int64)
    for v in range(n - 1, -1, -1):
        a = left[v]
        if a >= 0:
            i = order[a]
            j = order[right[v]]
            if i == j:
                order[v] = i + 1
            else:
                order[v] = max(i, j)
    return order


@numba.njit(cache=True, nogil=True)
def _statistics_kernel(left, right, order):
    # Nk[k] and Nij[i, j] use 1-based orders; row/column 0 stay zero.
    n = left.shape[0]
    K = order[0]
    Nk = np.zeros(K + 1, dtype=np.int64)
    Nij = np.zeros((K + 1, K + 1), dtype=np.int64)
    Nk[K] = 1
    for p in range(n):
        a = left[p]
        if a < 0:
            continue
        b = right[p]
        kp = order[p]
        ka = order[a]
        kb = order[b]
        # a child starts a new branch when its order differs from the parent's
        if ka != kp:
            Nk[ka] += 1
        if kb != kp:
            Nk[kb] += 1
        if ka < kb:
            Nij[ka, kb] += 1
        elif kb < ka:
            Nij[kb, ka] += 1
    return Nk, Nij


@numba.njit(cache=True, nogil=True)
def _prune_kernel(left, right):
    n = left.shape[0]
    if n <= 1:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    # rep[v]: node standing for v after leaf removal and series reduction,
    # -1 when v itself is a removed leaf.
    rep = np.empty(n, dtype=np.int64)
    for v in range(n - 1, -1, -1):
        a = left[v]
        if a < 0:
            rep[v] = -1
            continue
        b = right[v]
        a_leaf = left[a] < 0
        b_leaf = left[b] < 0
        if a_leaf and b_leaf:
            rep[v] = v
        elif a_leaf:
            rep[v] = rep[b]
        elif b_leaf:
            rep[v] = rep[a]
        else:
            rep[v] = v
    new_left = np.full(n, -1, dtype=np.int64)
    new_right = np.full(n, -1, dtype=np.int64)
    source = np.empty(n, dtype=np.int64)
    stack_node = np.empty(n, dtype=np.int64)
    stack_parent = np.empty(n, dtype=np.int64)
    stack_slot = np.empty(n, dtype=np.int64)
    stack_node[0] = rep[0]
    stack_parent[0] = -1
    stack_slot[0] = 0
    top = 1
    m = 0
    while top > 0:
        top -= 1
        v = stack_node[top]
        p = stack_parent[top]
        if p >= 0:
            if stack_slot[top] == 0:
                new_left[p] = m
            else:
                new_right[p] = m
        source[m] = v
        a = left[v]
        b = right[v]
        if left[a] >= 0 and left[b] >= 0:
            stack_node[top] = rep[b]
            stack_parent[top] = m
            stack_slot[top] = 1
            stack_node[top + 1] = rep[a]
            stack_parent[top + 1] = m
            stack_slot[top + 1] = 0
            top += 2
        m += 1
    return new_left[:m].copy(), new_right[:m].copy(), source[:m].copy()


# --------------------------------------------------------------------- #
# data types
# --------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class BinaryTree:
    """Immutable rooted full binary tree in preorder-compatible arena form.

    ``left[v]``/``right[v]`` are the children of node ``v`` or ``-1`` for a
    leaf; node 0 is the root; children always have larger indices than their
    parent.  ``labels`` is optional per-node text kept only for
    serialization.  The empty tree has zero nodes.
    """

    left: np.ndarray
    right: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        left = np.ascontiguousarray(self.left, dtype=np.int64)
        right = np.ascontiguousarray(self.right, dtype=np.int64)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        _validate(left, right, self.labels)
        left.flags.writeable = False
        right.flags.writeable = False

    @classmethod
    def _trusted(cls, left, right, labels=None):
        # Skip validation for arrays produced by our own kernels.
        obj = object.__new__(cls)
        left.flags.writeable = False
        right.flags.writeable = False
        object.__setattr__(obj, "left", left)
        object.__setattr__(obj, "right", right)
        object.__setattr__(obj, "labels", labels)
        return obj

    @classmethod
    def empty(cls) -> "BinaryTree":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))

    @classmethod
    def single(cls, label: str = "") -> "BinaryTree":
        return cls(np.array([-1]), np.array([-1]), (label,) if label else None)

    @classmethod
    def from_children(cls, children, root=0, labels=None) -> "BinaryTree":
        """Build a tree from any node numbering.

        ``children[v]`` is ``()`` / ``None`` for a leaf or a pair of node
        indices.  Nodes are renumbered in preorder (first child first).
        """
        if root is None or root == EMPTY:
            return cls.empty()
        order = []
        new_index = {}
        stack = [root]
        while stack:
            v = stack.pop()
            if v in new_index:
                raise NotFullBinaryError(f"node {v} reached twice; input is not a tree")
            new_index[v] = len(order)
            order.append(v)
            kids = children[v] or ()
            if len(kids) not in (0, 2):
                raise NotFullBinaryError(f"node {v} has {len(kids)} children")
            stack.extend(reversed(kids))
        left = np.full(len(order), -1, dtype=np.int64)
        right = np.full(len(order), -1, dtype=np.int64)
        for v in order:
            kids = children[v] or ()
            if kids:
                left[new_index[v]] = new_index[kids[0]]
                right[new_index[v]] = new_index[kids[1]]
        new_labels = None
        if labels is not None:
            new_labels = tuple(labels[v] or "" for v in order)
        return cls(left, right, new_labels)

    @classmethod
    def from_nested(cls, nested) -> "BinaryTree":
        """Build from nested 2-tuples; any non-tuple value is a leaf label.

        >>> BinaryTree.from_nested((None, (None, None))).n_leaves
        3
        """
        left, right, labels = [], [], []
        stack = [(nested, -1, 0)]
        while stack:
            item, parent, slot = stack.pop()
            v = len(left)
            left.append(-1)
            right.append(-1)
            if parent >= 0:
                (left if slot == 0 else right)[parent] = v
            if isinstance(item, tuple):
                if len(item) != 2:
                    raise NotFullBinaryError(f"tuple of length {len(item)}")
                labels.append("")
                stack.append((item[1], v, 1))
                stack.append((item[0], v, 0))
            else:
                labels.append("" if item is None else str(item))
        return cls(np.array(left), np.array(right), tuple(labels) if any(labels) else None)

    # ---- shape ----------------------------------------------------- #

    def __len__(self):
        return self.left.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.left.shape[0]

    @property
    def root(self) -> int:
        return 0 if self.n_nodes else EMPTY

    @property
    def is_empty(self) -> bool:
        return self.n_nodes == 0

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.left < 0))

    @property
    def parent(self) -> np.ndarray:
        parent = np.full(self.n_nodes, -1, dtype=np.int64)
        internal = np.flatnonzero(self.left >= 0)
        parent[self.left[internal]] = internal
        parent[self.right[internal]] = internal
        return parent

    def children(self, v: int) -> tuple:
        self._check_node(v)
        if self.left[v] < 0:
            return ()
        return int(self.left[v]), int(self.right[v])

    def is_leaf(self, v: int) -> bool:
        self._check_node(v)
        return bool(self.left[v] < 0)

    def label(self, v: int) -> str:
        self._check_node(v)
        return "" if self.labels is None else self.labels[v]

    def _check_node(self, v):
        if not 0 <= v < self.n_nodes:
            raise NodeNotFoundError(f"node {v} not in tree with {self.n_nodes} nodes")

    def subtree(self, v: int) -> "BinaryTree":
        """Subtree rooted at ``v`` as a new compacted tree."""
        self._check_node(v)
        nodes = []
        stack = [v]
        while stack:
            u = stack.pop()
            nodes.append(u)
            if self.left[u] >= 0:
                stack.append(int(self.right[u]))
                stack.append(int(self.left[u]))
        index = np.full(self.n_nodes, -1, dtype=np.int64)
        nodes = np.array(nodes, dtype=np.int64)
        index[nodes] = np.arange(nodes.shape[0])
        left = self.left[nodes]
        right = self.right[nodes]
        internal = left >= 0
        left = np.where(internal, index[np.where(internal, left, 0)], -1)
        right = np.where(internal, index[np.where(internal, right, 0)], -1)
        labels = None if self.labels is None else tuple(self.labels[u] for u in nodes)
        return BinaryTree._trusted(left, right, labels)

    def __eq__(self, other):
        """Structural identity in stored child order, labels included."""
        if not isinstance(other, BinaryTree):
            return NotImplemented
        if not (np.array_equal(self.left, other.left) and np.array_equal(self.right, other.right)):
            return False
        mine = self.labels or ("",) * self.n_nodes
        theirs = other.labels or ("",) * other.n_nodes
        return tuple(mine) == tuple(theirs)

    __hash__ = None

    def __repr__(self):
        return f"BinaryTree(n_nodes={self.n_nodes}, n_leaves={self.n_leaves})"


def _validate(left, right, labels):
    n = left.shape[0]
    if left.ndim != 1 or right.shape != left.shape:
        raise ValueError("left and right must be 1-d arrays of equal length")
    if labels is not None and len(labels) != n:
        raise ValueError("labels must have one entry per node")
    if n == 0:
        return
    leaf_l = left < 0
    if not np.array_equal(leaf_l, right < 0):
        raise NotFullBinaryError("every node needs exactly 0 or 2 children")
    idx = np.arange(n)
    internal = ~leaf_l
    if np.any(left[internal] <= idx[internal]) or np.any(right[internal] <= idx[internal]):
        raise ValueError("child indices must exceed their parent's index")
    if np.any(left >= n) or np.any(right >= n):
        raise ValueError("child index out of range")
    hits = np.bincount(np.concatenate([left[internal], right[internal]]), minlength=n)
    if hits[0] != 0 or np.any(hits[1:] != 1):
        raise ValueError("every non-root node must have exactly one parent")


@dataclass(frozen=True)
class RootedTree:
    """A rooted tree whose nodes may have 0, 1 or 2 children.

    This is the intermediate state between cutting leaves and series
    reduction.  ``children[v]`` lists child indices; ``root`` may be
    ``EMPTY``.
    """

    children: tuple
    root: int
    labels: Optional[tuple] = None


@dataclass(frozen=True)
class OrderAssignment:
    order: np.ndarray
    tree_order: int


@dataclass(frozen=True)
class HortonStatistics:
    """Branch counts ``N_k`` and side-branch counts ``N_ij`` of one tree.

    ``side_branch_counts`` holds every pair ``1 <= i < j <= order``,
    including zeros.
    """

    order: int
    branch_counts: dict
    side_branch_counts: dict

    @classmethod
    def from_arrays(cls, Nk, Nij):
        K = Nk.shape[0] - 1
        branch = {k: int(Nk[k]) for k in range(1, K + 1)}
        side = {(i, j): int(Nij[i, j]) for i in range(1, K + 1) for j in range(i + 1, K + 1)}
        return cls(K, branch, side)

    def N(self, k: int) -> int:
        return self.branch_counts.get(k, 0)

    def Nij(self, i: int, j: int) -> int:
        return self.side_branch_counts.get((i, j), 0)


# --------------------------------------------------------------------- #
# operations
# --------------------------------------------------------------------- #


def cut_leaves(t: BinaryTree) -> RootedTree:
    """Remove every leaf and its parental edge, without series reduction."""
    if t.n_nodes <= 1:
        return RootedTree((), EMPTY)
    keep = np.flatnonzero(t.left >= 0)
    index = {int(v): i for i, v in enumerate(keep)}
    children = []
    for v in keep:
        kids = tuple(index[int(c)] for c in (t.left[v], t.right[v]) if t.left[c] >= 0)
        children.append(kids)
    labels = None if t.labels is None else tuple(t.labels[v] for v in keep)
    return RootedTree(tuple(children), 0, labels)


def series_reduce(t) -> BinaryTree:
    """Delete every node with exactly one child, linking its parent to its child.

    Accepts a :class:`RootedTree` (nodes with 0, 1 or 2 children) or a
    :class:`BinaryTree`, which is returned unchanged.
    """
    if isinstance(t, BinaryTree):
        return t
    if t.root is None or t.root == EMPTY:
        return BinaryTree.empty()
    children = t.children
    # postorder so that each node's representative is known before its parent's
    post = []
    stack = [(t.root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            post.append(v)
            continue
        stack.append((v, True))
        kids = children[v]
        if len(kids) > 2:
            raise NotFullBinaryError(f"node {v} has {len(kids)} children")
        stack.extend((c, False) for c in kids)
    rep = {}
    for v in post:
        kids = children[v]
        rep[v] = rep[kids[0]] if len(kids) == 1 else v
    reduced = {v: tuple(rep[c] for c in children[v]) for v in post if rep[v] == v}
    return BinaryTree.from_children(reduced, rep[t.root], t.labels)


def prune(t: BinaryTree) -> BinaryTree:
    """Cut all leaves, then series-reduce.  ``prune(empty) == empty``."""
    left, right, source = _prune_kernel(t.left, t.right)
    labels = None if t.labels is None else tuple(t.labels[v] for v in source)
    return BinaryTree._trusted(left, right, labels)


def assign_orders(t: BinaryTree) -> OrderAssignment:
    """Horton-Strahler order of every vertex by hierarchical counting."""
    if t.is_empty:
        raise EmptyTreeError("the empty tree has no vertex orders")
    order = _orders_kernel(t.left, t.right)
    return OrderAssignment(order, int(order[0]))


def tree_order(t: BinaryTree) -> int:
    """``k(T)``; zero for the empty tree."""
    return 0 if t.is_empty else int(_orders_kernel(t.left, t.right)[0])


def order_via_pruning(t: BinaryTree, v: int) -> int:
    """Number of prunings needed to eliminate the subtree rooted at ``v``.

    Iterates :func:`prune` literally; meant as an independent check on
    :func:`assign_orders`, not for speed.
    """
    if t.is_empty:
        raise EmptyTreeError("the empty tree has no vertices")
    sub = t.subtree(v)
    k = 0
    while not sub.is_empty:
        sub = prune(sub)
        k += 1
    return k


def horton_arrays(t: BinaryTree):
    """``(Nk, Nij)`` as int arrays indexed by 1-based order; row/col 0 unused."""
    if t.is_empty:
        raise EmptyTreeError("statistics are undefined for the empty tree")
    order = _orders_kernel(t.left, t.right)
    return _statistics_kernel(t.left, t.right, order)


def horton_statistics(t: BinaryTree) -> HortonStatistics:
    return HortonStatistics.from_arrays(*horton_arrays(t))


def canonical_form(t: BinaryTree) -> str:
    """Parenthesized shape with children sorted, ignoring labels.

    Two trees have equal canonical forms iff they are isomorphic as
    unordered rooted trees.
    """
    if t.is_empty:
        return ""
    form = [""] * t.n_nodes
    for v in range(t.n_nodes - 1, -1, -1):
        a = t.left[v]
        if a < 0:
            form[v] = "."
        else:
            x, y = sorted((form[a], form[t.right[v]]))
            form[v] = f"({x}{y})"
    return form[0]
