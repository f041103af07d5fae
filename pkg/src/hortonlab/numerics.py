"""Theoretical Horton numbers for mean self-similar trees.

``zeta_K = (N_1[K], ..., N_K[K])`` is obtained two independent ways:

* :func:`zeta_by_recursion` fills the table downward from ``N_K[K] = 1``
  using the side-branch balance
  ``N_k = 2 N_{k+1} + sum_{j=1}^{K-k} T_j N_{k+j}``;
* :func:`zeta1_by_series` reads ``N_1[K]`` off the power series of
  ``-1 / t_hat(z)``.

The geometric family also has a closed form, :func:`zeta1_geometric_closed_form`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HortonOverflowError, NoRootInDomainError, NonpositiveKError, ValidationError
from .tokunaga import TokunagaSequence, geometric_roots, horton_exponent


def _check_K(K, name="K", minimum=1):
    if int(K) != K or K < minimum:
        raise NonpositiveKError(f"{name} must be an integer >= {minimum}, got {K}")
    return int(K)


def _integer_terms(seq, n):
    if not seq.is_integral(n):
        raise ValidationError("exact mode needs integer Tokunaga coefficients")
    return [int(t) for t in seq.terms(n)]


@dataclass(frozen=True)
class ZetaTable:
    """Horton numbers of order-``K`` trees.

    ``zeta[k - 1]`` is ``N_k[K]`` and ``xi[k - 1] = zeta[k - 1] / zeta[0]``.
    In exact mode the entries are Python ints (``xi`` stays float).
    """

    K: int
    zeta: np.ndarray
    xi: np.ndarray


def zeta_by_recursion(seq: TokunagaSequence, K: int, exact: bool = False) -> ZetaTable:
    K = _check_K(K)
    if exact:
        T = _integer_terms(seq, K - 1)
        zeta = [0] * K
        zeta[K - 1] = 1
        for k in range(K - 2, -1, -1):
            zeta[k] = 2 * zeta[k + 1] + sum(T[j] * zeta[k + 1 + j] for j in range(K - 1 - k))
        zeta = np.array(zeta, dtype=object)
        xi = np.array([float(z / zeta[0]) for z in zeta])
        return ZetaTable(K, zeta, xi)

    T = seq.terms(K - 1)
    zeta = np.zeros(K)
    zeta[K - 1] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K - 2, -1, -1):
            zeta[k] = 2.0 * zeta[k + 1] + T[: K - 1 - k] @ zeta[k + 1 :]
    if not np.all(np.isfinite(zeta)):
        raise HortonOverflowError(f"Horton numbers exceed double range at K = {K}")
    return ZetaTable(K, zeta, zeta / zeta[0])


def series_reciprocal(coeffs, n: int):
    """First ``n`` coefficients of ``1 / f`` for ``f = sum coeffs[i] z^i``.

    Plain long division; works with floats, ints or Fractions as long as
    ``coeffs[0]`` is invertible in that type.
    """
    if coeffs[0] == 0:
        raise ZeroDivisionError("series with zero constant term has no reciprocal")
    out = []
    inv0 = 1 / coeffs[0] if not isinstance(coeffs[0], int) else None
    for m in range(n):
        acc = 1 if m == 0 else 0
        for i in range(1, min(m, len(coeffs) - 1) + 1):
            acc -= coeffs[i] * out[m - i]
        if inv0 is None:
            q, r = divmod(acc, coeffs[0])
            # t(0) = -1 here, so integer division is exact
            if r:
                raise ValueError("integer reciprocal is not integral")
            out.append(q)
        else:
            out.append(acc * inv0)
    return out


def zeta1_by_series(seq: TokunagaSequence, Kmax: int, exact: bool = False) -> np.ndarray:
    """``[N_1[1], ..., N_1[Kmax]]`` from the coefficients of ``-1 / t_hat``.

    ``N_1[K]`` is the coefficient of ``z^(K-1)``.  Only ``t(0..Kmax-1)`` is
    needed, so infinite sequences are truncated there without error.
    """
    Kmax = _check_K(Kmax, "Kmax")
    if exact:
        T = _integer_terms(seq, Kmax - 1)
        coeffs = [-1] + T
        if len(coeffs) > 1:
            coeffs[1] += 2
        recip = series_reciprocal(coeffs, Kmax)
        return np.array([-r for r in recip], dtype=object)
    recip = series_reciprocal(seq.coefficients(Kmax), Kmax)
    out = -np.array(recip, dtype=float)
    if not np.all(np.isfinite(out)):
        raise HortonOverflowError(f"N_1[K] exceeds double range before K = {Kmax}")
    return out


def zeta1_geometric_closed_form(a: float, c: float, K: int) -> float:
    """``N_1[K + 1]`` for ``T_k = a c^(k-1)`` from the two-pole partial fractions.

    Note the index shift: ``K = 0`` returns ``N_1[1] = 1``.
    """
    K = _check_K(K, minimum=0)
    p1, p2 = geometric_roots(a, c)
    return ((1.0 - c * p2) / p2 ** (K + 1) - (1.0 - c * p1) / p1 ** (K + 1)) / (2.0 * c * (p1 - p2))


def check_shift_property(seq: TokunagaSequence, Kmax: int, rtol: float = 1e-12) -> bool:
    """True iff ``N_{j+1}[K+1] == N_j[K]`` for all ``1 <= j <= K < Kmax``."""
    Kmax = _check_K(Kmax, "Kmax", minimum=2)
    prev = zeta_by_recursion(seq, 1).zeta
    for K in range(1, Kmax):
        nxt = zeta_by_recursion(seq, K + 1).zeta
        if not np.allclose(nxt[1:], prev, rtol=rtol, atol=0.0):
            return False
        prev = nxt
    return True


@dataclass
class ConvergenceReport:
    """Outcome of :func:`verify_strong_horton`.

    ``ratio_sequence[K - 1]`` is ``N_1[K + 1] / N_1[K]``; ``per_j_errors``
    maps ``j`` to ``|xi_Kmax(j) - R^(1-j)|`` where ``R`` is the theoretical
    exponent when one exists, otherwise ``R_estimate``.
    ``diverged`` means no convergence was detected up to ``Kmax``; it is a
    tail heuristic, not a proof.
    """

    Kmax: int
    R_estimate: float
    R_theory: float | None
    per_j_errors: dict
    ratio_sequence: np.ndarray
    diverged: bool
    tail_fluctuation: float
    xi: np.ndarray = field(repr=False)

    @property
    def converged(self) -> bool:
        return not self.diverged


def verify_strong_horton(
    seq: TokunagaSequence,
    Kmax: int,
    jmax: int,
    tail: int = 5,
    fluctuation_tol: float = 1e-3,
) -> ConvergenceReport:
    """Numerically check ``N_j[K] / N_1[K] -> R^(1-j)``.

    The ratio sequence ``N_1[K+1] / N_1[K]`` is declared divergent when its
    last ``tail`` values spread by more than ``fluctuation_tol`` relative to
    the final value.
    """
    Kmax = _check_K(Kmax, "Kmax", minimum=2)
    jmax = _check_K(jmax, "jmax", minimum=2)
    if jmax > Kmax:
        raise NonpositiveKError(f"jmax = {jmax} exceeds Kmax = {Kmax}")
    table = zeta_by_recursion(seq, Kmax)
    # N_1[K] = zeta_Kmax(Kmax - K + 1) by the shift property
    zeta1 = table.zeta[::-1]
    ratios = zeta1[1:] / zeta1[:-1]
    last = ratios[-tail:]
    fluctuation = float((last.max() - last.min()) / abs(last[-1]))
    diverged = fluctuation > fluctuation_tol

    try:
        R_theory = horton_exponent(seq).R
    except NoRootInDomainError:
        R_theory = None
    R_ref = R_theory if R_theory is not None else float(ratios[-1])
    errors = {j: abs(float(table.xi[j - 1]) - R_ref ** (1 - j)) for j in range(1, jmax + 1)}
    return ConvergenceReport(
        Kmax=Kmax,
        R_estimate=float(ratios[-1]),
        R_theory=R_theory,
        per_j_errors=errors,
        ratio_sequence=ratios,
        diverged=diverged,
        tail_fluctuation=fluctuation,
        xi=table.xi,
    )


def horton_lower_bound(seq: TokunagaSequence, K: int) -> float:
    """``(T_1 + 2)^(K-1)``, a lower bound on ``N_1[K]``."""
    return math.pow(seq.term(1) + 2.0, K - 1)
