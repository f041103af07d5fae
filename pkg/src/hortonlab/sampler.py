"""Independent Random Attachment sampler and Monte Carlo Horton statistics.

A random tree of order ``K`` is grown from a single vertex.  At each stage
every leaf receives two children (raising every branch's order by one) and
then every branch of order ``j >= 2`` receives a random number of new leaf
side-branches with mean ``T_{j-1}``, scattered uniformly over the ``s + 1``
edges of a branch that already carries ``s`` side-branches.

Each sample draws from its own generator seeded by ``(seed, stream, index)``
so results do not depend on thread count or execution order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import NonIntegerMeanError, NonpositiveKError, TreeTooLargeError, ValidationError
from .tokunaga import TokunagaSequence
from .tree_core import BinaryTree, _orders_kernel, _prune_kernel, _statistics_kernel

POISSON = "poisson"
GEOMETRIC = "geometric"
DETERMINISTIC = "deterministic"
DISTRIBUTIONS = (POISSON, GEOMETRIC, DETERMINISTIC)
_DIST_CODE = {POISSON: 0, GEOMETRIC: 1, DETERMINISTIC: 2}

DEFAULT_MAX_NODES = 10**7
_CHUNK = 64


@dataclass(frozen=True)
class SamplerConfig:
    seq: TokunagaSequence
    K: int
    distribution: str = POISSON
    seed: int = 0
    samples: int = 1
    max_nodes: int = DEFAULT_MAX_NODES
    threads: int | None = None

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise NonpositiveKError(f"K must be a positive integer, got {self.K}")
        if int(self.samples) != self.samples or self.samples < 1:
            raise NonpositiveKError(f"samples must be a positive integer, got {self.samples}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValidationError(f"unknown distribution {self.distribution!r}; choose from {DISTRIBUTIONS}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.distribution == DETERMINISTIC:
            self.check_integral(self.K)

    def check_integral(self, K):
        if not self.seq.is_integral(K - 1):
            raise NonIntegerMeanError("the deterministic distribution needs integer T_k")

    def means(self, K: int) -> np.ndarray:
        """``m[j] = T_j`` for ``j = 1..K-1``; ``m[0]`` is padding."""
        m = np.zeros(max(K, 1))
        m[1:] = self.seq.terms(K - 1)
        return m


# --------------------------------------------------------------------- #
# growth kernel
# --------------------------------------------------------------------- #


@numba.njit(cache=True, nogil=True)
def _enlarge(arr, cap):
    out = np.empty(cap, dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@numba.njit(cache=True, nogil=True)
def _draw(rng, dist, mean):
    if mean <= 0.0:
        return 0
    if dist == 0:
        return rng.poisson(mean)
    if dist == 1:
        # numpy's geometric lives on {1, 2, ...}
        return rng.geometric(1.0 / (1.0 + mean)) - 1
    return int(mean)


@numba.njit(cache=True, nogil=True)
def _grow_kernel(rng, K, means, dist, max_nodes):
    """Return ``(left, right, ok)``; ``ok`` is False when ``max_nodes`` is hit."""
    cap = 64
    order = np.empty(cap, dtype=np.int64)
    top_a = np.empty(cap, dtype=np.int64)
    top_b = np.empty(cap, dtype=np.int64)
    head = np.empty(cap, dtype=np.int64)  # top-most side-branch
    nxt = np.empty(cap, dtype=np.int64)  # next side-branch further down the parent
    nside = np.empty(cap, dtype=np.int64)
    counts = np.zeros(16, dtype=np.int64)

    order[0] = 1
    top_a[0] = -1
    top_b[0] = -1
    head[0] = -1
    nxt[0] = -1
    nside[0] = 0
    nb = 1
    n_nodes = 1

    for k in range(2, K + 1):
        n_before = nb
        # every leaf gets two children
        for b in range(n_before):
            order[b] += 1
            if order[b] == 2:
                if nb + 2 > cap:
                    cap = 2 * cap + 2
                    order = _enlarge(order, cap)
                    top_a = _enlarge(top_a, cap)
                    top_b = _enlarge(top_b, cap)
                    head = _enlarge(head, cap)
                    nxt = _enlarge(nxt, cap)
                    nside = _enlarge(nside, cap)
                for c in range(nb, nb + 2):
                    order[c] = 1
                    top_a[c] = -1
                    top_b[c] = -1
                    head[c] = -1
                    nxt[c] = -1
                    nside[c] = 0
                top_a[b] = nb
                top_b[b] = nb + 1
                nb += 2
                n_nodes += 2
        if n_nodes > max_nodes:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), False
        # order-1 side-branches on every branch that existed before this stage
        for b in range(n_before):
            m = _draw(rng, dist, means[order[b] - 1])
            if m == 0:
                continue
            s = nside[b]
            if counts.shape[0] < s + 1:
                counts = np.zeros(2 * (s + 1), dtype=np.int64)
            counts[: s + 1] = 0
            for _ in range(m):
                counts[rng.integers(0, s + 1)] += 1
            if nb + m > cap:
                cap = 2 * (nb + m)
                order = _enlarge(order, cap)
                top_a = _enlarge(top_a, cap)
                top_b = _enlarge(top_b, cap)
                head = _enlarge(head, cap)
                nxt = _enlarge(nxt, cap)
                nside = _enlarge(nside, cap)
            # gap g sits below the g-th existing side-branch (g = 0: below the top vertex)
            prev = -1
            cur = head[b]
            for g in range(s + 1):
                for _ in range(counts[g]):
                    leaf = nb
                    nb += 1
                    order[leaf] = 1
                    top_a[leaf] = -1
                    top_b[leaf] = -1
                    head[leaf] = -1
                    nside[leaf] = 0
                    nxt[leaf] = cur
                    if prev < 0:
                        head[b] = leaf
                    else:
                        nxt[prev] = leaf
                    prev = leaf
                if g < s:
                    prev = cur
                    cur = nxt[cur]
            nside[b] += m
            n_nodes += 2 * m
            if n_nodes > max_nodes:
                return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), False

    # side-branches of each branch as a flat top-to-bottom list
    start = np.empty(nb + 1, dtype=np.int64)
    start[0] = 0
    for b in range(nb):
        start[b + 1] = start[b] + nside[b]
    sides = np.empty(start[nb], dtype=np.int64)
    for b in range(nb):
        pos = start[b]
        cur = head[b]
        while cur >= 0:
            sides[pos] = cur
            pos += 1
            cur = nxt[cur]

    # preorder emission; chain vertex (b, p) has p side-branches above it
    left = np.full(n_nodes, -1, dtype=np.int64)
    right = np.full(n_nodes, -1, dtype=np.int64)
    st_b = np.empty(n_nodes, dtype=np.int64)
    st_p = np.empty(n_nodes, dtype=np.int64)
    st_parent = np.empty(n_nodes, dtype=np.int64)
    st_slot = np.empty(n_nodes, dtype=np.int64)
    st_b[0] = 0
    st_p[0] = nside[0]
    st_parent[0] = -1
    st_slot[0] = 0
    top = 1
    v = 0
    while top > 0:
        top -= 1
        b = st_b[top]
        p = st_p[top]
        par = st_parent[top]
        if par >= 0:
            if st_slot[top] == 0:
                left[par] = v
            else:
                right[par] = v
        if p > 0:
            side = sides[start[b] + p - 1]
            st_b[top] = side
            st_p[top] = nside[side]
            st_parent[top] = v
            st_slot[top] = 1
            st_b[top + 1] = b
            st_p[top + 1] = p - 1
            st_parent[top + 1] = v
            st_slot[top + 1] = 0
            top += 2
        elif top_a[b] >= 0:
            ta = top_a[b]
            tb = top_b[b]
            st_b[top] = tb
            st_p[top] = nside[tb]
            st_parent[top] = v
            st_slot[top] = 1
            st_b[top + 1] = ta
            st_p[top + 1] = nside[ta]
            st_parent[top + 1] = v
            st_slot[top + 1] = 0
            top += 2
        v += 1
    return left, right, True


def _generator(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


def _grow(config: SamplerConfig, K: int, stream: int, index: int):
    rng = _generator(config.seed, stream, index)
    left, right, ok = _grow_kernel(rng, K, config.means(K), _DIST_CODE[config.distribution], config.max_nodes)
    if not ok:
        raise TreeTooLargeError(f"sample {index} exceeded {config.max_nodes} nodes")
    return left, right


def sample_tree(config: SamplerConfig, sample_index: int, stream: int = 0, K: int | None = None) -> BinaryTree:
    """The ``sample_index``-th random tree of ``config``.

    ``stream`` separates independent ensembles drawn from the same seed;
    ``K`` overrides the configured order.
    """
    if sample_index < 0:
        raise ValidationError("sample_index must be non-negative")
    K = config.K if K is None else K
    if K < 1:
        raise NonpositiveKError(f"K must be a positive integer, got {K}")
    left, right = _grow(config, K, stream, sample_index)
    return BinaryTree._trusted(left, right)


# --------------------------------------------------------------------- #
# estimation
# --------------------------------------------------------------------- #


class _Sums:
    """Exact integer moment sums of ``N_k`` and ``N_ij`` over an ensemble."""

    def __init__(self, K):
        self.n = 0
        self.S_k = np.zeros(K + 1, dtype=np.int64)
        self.SS_k = np.zeros(K + 1, dtype=np.int64)
        self.S_ij = np.zeros((K + 1, K + 1), dtype=np.int64)
        self.SS_ij = np.zeros((K + 1, K + 1), dtype=np.int64)
        self.SX_ij = np.zeros((K + 1, K + 1), dtype=np.int64)

    def add(self, Nk, Nij):
        self.n += 1
        self.S_k += Nk
        self.SS_k += Nk * Nk
        self.S_ij += Nij
        self.SS_ij += Nij * Nij
        self.SX_ij += Nij * Nk[np.newaxis, :]

    def merge(self, other):
        self.n += other.n
        self.S_k += other.S_k
        self.SS_k += other.SS_k
        self.S_ij += other.S_ij
        self.SS_ij += other.SS_ij
        self.SX_ij += other.SX_ij


def _variance(n, S, SS):
    if n < 2:
        return np.zeros(np.shape(S))
    # integer numerator is exact; divide once at the end
    return (n * SS - S * S) / (n * (n - 1.0))


@dataclass
class SimulationReport:
    """Monte Carlo Horton statistics of an ensemble of order-``K`` trees.

    Arrays are indexed by order: ``mean_Nk[k]`` estimates ``N_k[K]`` and
    ``mean_Nij[i, j]`` estimates ``N_ij[K]``; index 0 is unused padding.
    ``tokunaga_hat[i, j] = mean_Nij[i, j] / mean_Nk[j]`` is NaN outside
    ``1 <= i < j <= K``.  Standard errors are sample standard deviations
    over ``sqrt(samples)``; ``se_tokunaga`` uses the ratio-estimator
    linearization.
    """

    K: int
    samples: int
    mean_Nk: np.ndarray
    se_Nk: np.ndarray
    mean_Nij: np.ndarray
    se_Nij: np.ndarray
    tokunaga_hat: np.ndarray
    se_tokunaga: np.ndarray

    @classmethod
    def from_sums(cls, K, sums: _Sums):
        n = sums.n
        mean_k = sums.S_k / n
        se_k = np.sqrt(np.maximum(_variance(n, sums.S_k, sums.SS_k), 0.0) / n)
        mean_ij = sums.S_ij / n
        se_ij = np.sqrt(np.maximum(_variance(n, sums.S_ij, sums.SS_ij), 0.0) / n)

        T_hat = np.full((K + 1, K + 1), np.nan)
        se_T = np.full((K + 1, K + 1), np.nan)
        var_j = _variance(n, sums.S_k, sums.SS_k)
        var_ij = _variance(n, sums.S_ij, sums.SS_ij)
        if n >= 2:
            cov = (n * sums.SX_ij - sums.S_ij * sums.S_k[np.newaxis, :]) / (n * (n - 1.0))
        else:
            cov = np.zeros((K + 1, K + 1))
        for j in range(2, K + 1):
            for i in range(1, j):
                r = mean_ij[i, j] / mean_k[j]
                T_hat[i, j] = r
                v = var_ij[i, j] + r * r * var_j[j] - 2.0 * r * cov[i, j]
                se_T[i, j] = math.sqrt(max(v, 0.0) / n) / mean_k[j]
        return cls(K, n, mean_k, se_k, mean_ij, se_ij, T_hat, se_T)

    def pairs(self):
        """``(i, j)`` for ``1 <= i < j <= K``."""
        return [(i, j) for j in range(2, self.K + 1) for i in range(1, j)]


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: ``requested`` or the CPU count, capped by ``HORTONLAB_THREADS``."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("HORTONLAB_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _run_chunks(config, work, make_acc):
    """Apply ``work(acc, index)`` over all samples; merge chunk accumulators in index order."""
    chunks = [range(lo, min(lo + _CHUNK, config.samples)) for lo in range(0, config.samples, _CHUNK)]

    def run(chunk):
        acc = make_acc()
        for i in chunk:
            work(acc, i)
        return acc

    threads = resolve_threads(config.threads)
    if threads == 1 or len(chunks) == 1:
        results = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    total = results[0]
    for r in results[1:]:
        total.merge(r)
    return total


def estimate(config: SamplerConfig) -> SimulationReport:
    """Average Horton statistics over ``config.samples`` independent trees."""
    K = config.K
    means = config.means(K)
    dist = _DIST_CODE[config.distribution]

    def work(acc, i):
        rng = _generator(config.seed, 0, i)
        left, right, ok = _grow_kernel(rng, K, means, dist, config.max_nodes)
        if not ok:
            raise TreeTooLargeError(f"sample {i} exceeded {config.max_nodes} nodes")
        order = _orders_kernel(left, right)
        acc.add(*_statistics_kernel(left, right, order))

    return SimulationReport.from_sums(K, _run_chunks(config, work, lambda: _Sums(K)))


class _PruneAcc:
    def __init__(self, K):
        self.pruned = _Sums(K)
        self.identity_violations = 0
        self.order_violations = 0

    def merge(self, other):
        self.pruned.merge(other.pruned)
        self.identity_violations += other.identity_violations
        self.order_violations += other.order_violations


def _z_scores(a, sa, b, sb):
    """``|a - b|`` in units of the combined standard error; NaN where undefined."""
    diff = np.abs(a - b)
    scale = np.sqrt(sa * sa + sb * sb)
    z = np.full(diff.shape, np.nan)
    ok = np.isfinite(diff) & np.isfinite(scale)
    pos = ok & (scale > 0)
    z[pos] = diff[pos] / scale[pos]
    flat = ok & (scale == 0)
    z[flat] = np.where(diff[flat] == 0, 0.0, np.inf)
    return z


@dataclass
class PruneInvarianceReport:
    """Pruned order-``K+1`` ensemble against a directly sampled order-``K`` one.

    ``z_pruned_vs_direct[i, j]`` is ``|T_hat_pruned - T_hat_direct|`` in
    units of the combined standard error; ``z_pruned_vs_theory`` compares the
    pruned ensemble with ``T_{j-i}``.  ``identity_violations`` counts sampled
    trees on which ``N_k[t] = N_{k-1}[prune(t)]`` or
    ``N_ij[t] = N_{i-1,j-1}[prune(t)]`` failed.
    """

    K: int
    samples: int
    direct: SimulationReport
    pruned: SimulationReport
    identity_violations: int
    order_violations: int
    z_pruned_vs_direct: np.ndarray
    z_pruned_vs_theory: np.ndarray
    z_direct_vs_theory: np.ndarray
    theory: np.ndarray = field(repr=False)

    @property
    def max_discrepancy(self) -> float:
        return float(np.nanmax(self.z_pruned_vs_direct)) if self.K >= 2 else 0.0

    @property
    def max_theory_discrepancy(self) -> float:
        return float(np.nanmax(self.z_pruned_vs_theory)) if self.K >= 2 else 0.0


def prune_invariance_check(config: SamplerConfig) -> PruneInvarianceReport:
    """Sample order ``K+1``, prune once, and compare with order ``K`` directly.

    The order-``K+1`` trees use stream 1 so they are independent of the
    direct ensemble (stream 0, the same trees :func:`estimate` sees).
    """
    K = config.K
    if K < 3:
        raise NonpositiveKError(f"the prune-invariance check needs K >= 3, got {K}")
    if config.distribution == DETERMINISTIC:
        config.check_integral(K + 1)
    means = config.means(K + 1)
    dist = _DIST_CODE[config.distribution]

    def work(acc, i):
        rng = _generator(config.seed, 1, i)
        left, right, ok = _grow_kernel(rng, K + 1, means, dist, config.max_nodes)
        if not ok:
            raise TreeTooLargeError(f"sample {i} exceeded {config.max_nodes} nodes")
        order = _orders_kernel(left, right)
        if order[0] != K + 1:
            acc.order_violations += 1
        Nk, Nij = _statistics_kernel(left, right, order)
        pl, pr, _ = _prune_kernel(left, right)
        porder = _orders_kernel(pl, pr)
        pNk, pNij = _statistics_kernel(pl, pr, porder)
        if (
            pNk.shape[0] != K + 1
            or not np.array_equal(Nk[2:], pNk[1:])
            or not np.array_equal(np.triu(Nij[2:, 2:]), np.triu(pNij[1:, 1:]))
        ):
            acc.identity_violations += 1
            return
        acc.pruned.add(pNk, pNij)

    acc = _run_chunks(config, work, lambda: _PruneAcc(K))
    direct = estimate(config)
    pruned = SimulationReport.from_sums(K, acc.pruned)

    theory = np.full((K + 1, K + 1), np.nan)
    for i, j in direct.pairs():
        theory[i, j] = config.seq.term(j - i)
    zero = np.zeros_like(theory)
    return PruneInvarianceReport(
        K=K,
        samples=config.samples,
        direct=direct,
        pruned=pruned,
        identity_violations=acc.identity_violations,
        order_violations=acc.order_violations,
        z_pruned_vs_direct=_z_scores(pruned.tokunaga_hat, pruned.se_tokunaga, direct.tokunaga_hat, direct.se_tokunaga),
        z_pruned_vs_theory=_z_scores(pruned.tokunaga_hat, pruned.se_tokunaga, theory, zero),
        z_direct_vs_theory=_z_scores(direct.tokunaga_hat, direct.se_tokunaga, theory, zero),
        theory=theory,
    )
