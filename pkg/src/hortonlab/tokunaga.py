"""Tokunaga sequences, their generating function and the Horton exponent.

A mean self-similar tree model is determined by a sequence ``T_k >= 0``:
the expected number of side-branches of order ``j - k`` per branch of
order ``j``.  Its generating function

    t_hat(z) = -1 + 2 z + sum_{k>=1} T_k z^k

has a single zero ``w0`` in ``(0, 1/2]`` and the Horton exponent is
``R = 1 / w0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NegativeParamError, NoRootInDomainError, OutOfDomainError

GEOMETRIC = "geometric"
SHALLOW = "shallow"
DIFFERENTIATED = "differentiated"
EXPLICIT = "explicit"
FAMILIES = (GEOMETRIC, SHALLOW, DIFFERENTIATED, EXPLICIT)


@dataclass(frozen=True)
class TokunagaSequence:
    """Side-branching law ``{T_k}``.

    Use the named constructors :meth:`geometric`, :meth:`shallow`,
    :meth:`differentiated` and :meth:`explicit` rather than building
    instances directly.
    """

    family: str
    params: tuple

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown Tokunaga family {self.family!r}")
        params = tuple(float(p) for p in self.params)
        if any(not math.isfinite(p) or p < 0 for p in params):
            raise NegativeParamError(f"{self.family} parameters must be finite and non-negative: {params}")
        if self.family in (GEOMETRIC, DIFFERENTIATED):
            if len(params) != 2 or min(params) <= 0:
                raise NegativeParamError(f"{self.family} needs a > 0 and c > 0, got {params}")
        if self.family == SHALLOW and len(params) != 2:
            raise ValueError("shallow family takes exactly (T1, T2)")
        object.__setattr__(self, "params", params)

    @classmethod
    def geometric(cls, a: float, c: float) -> "TokunagaSequence":
        """``T_k = a c^(k-1)``."""
        return cls(GEOMETRIC, (a, c))

    @classmethod
    def shallow(cls, T1: float, T2: float) -> "TokunagaSequence":
        """``T_1, T_2`` arbitrary, ``T_k = 0`` for ``k >= 3``."""
        return cls(SHALLOW, (T1, T2))

    @classmethod
    def differentiated(cls, a: float, c: float) -> "TokunagaSequence":
        """``T_k = a k c^(k-1)``."""
        return cls(DIFFERENTIATED, (a, c))

    @classmethod
    def explicit(cls, terms: Sequence[float]) -> "TokunagaSequence":
        """Given ``T_1..T_m``; every later term is zero."""
        return cls(EXPLICIT, tuple(terms))

    @property
    def a(self) -> float:
        return self.params[0]

    @property
    def c(self) -> float:
        return self.params[1]

    @property
    def is_finite_support(self) -> bool:
        return self.family in (SHALLOW, EXPLICIT)

    def term(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"Tokunaga terms start at k = 1, got {k}")
        if self.family in (GEOMETRIC, DIFFERENTIATED):
            try:
                power = self.c ** (k - 1)
            except OverflowError:
                return math.inf
            return self.a * power * (k if self.family == DIFFERENTIATED else 1)
        if k <= len(self.params):
            return self.params[k - 1]
        return 0.0

    def terms(self, n: int) -> np.ndarray:
        """``array([T_1, ..., T_n])``."""
        return np.array([self.term(k) for k in range(1, n + 1)], dtype=float)

    def is_integral(self, n: int | None = None) -> bool:
        """True when ``T_1..T_n`` are all integers (all terms if ``n`` is None)."""
        if n is None:
            if self.is_finite_support:
                n = len(self.params)
            else:
                # a c^(k-1) stays integral for all k iff a and c are integers
                return self.a.is_integer() and self.c.is_integer()
        return all(float(self.term(k)).is_integer() for k in range(1, n + 1))

    @property
    def growth_rate(self) -> float:
        """``limsup T_k^(1/k)``; zero for finitely supported sequences."""
        if self.is_finite_support:
            return 0.0
        return self.c

    @property
    def radius(self) -> float:
        """Radius of convergence of ``t_hat``."""
        return math.inf if self.is_finite_support else 1.0 / self.c

    def coefficients(self, n: int) -> np.ndarray:
        """First ``n`` power-series coefficients ``t(0), ..., t(n-1)`` of ``t_hat``."""
        t = np.zeros(n, dtype=float)
        if n > 0:
            t[0] = -1.0
        if n > 1:
            t[1:] = self.terms(n - 1)
            t[1] += 2.0
        return t

    def describe(self) -> dict:
        if self.family == EXPLICIT:
            return {"family": self.family, "T": list(self.params)}
        names = {GEOMETRIC: ("a", "c"), DIFFERENTIATED: ("a", "c"), SHALLOW: ("T1", "T2")}[self.family]
        return {"family": self.family, **dict(zip(names, self.params))}


@dataclass(frozen=True)
class ExponentResult:
    w0: float
    R: float
    method: str
    residual: float


def t_hat(seq: TokunagaSequence, z: float) -> float:
    """Generating function ``-1 + 2z + sum T_k z^k`` in closed form."""
    if not seq.is_finite_support and abs(z) * seq.c >= 1.0:
        raise OutOfDomainError(f"z = {z} outside the convergence disc |z| < {1 / seq.c}")
    if seq.family == GEOMETRIC:
        a, c = seq.params
        return -1.0 + 2.0 * z + a * z / (1.0 - c * z)
    if seq.family == DIFFERENTIATED:
        a, c = seq.params
        return -1.0 + 2.0 * z + a * z / (1.0 - c * z) ** 2
    if seq.family == SHALLOW:
        T1, T2 = seq.params
        return -1.0 + (T1 + 2.0) * z + T2 * z * z
    # Horner on t(0..m)
    coeffs = seq.coefficients(len(seq.params) + 2)
    acc = 0.0
    for coef in coeffs[::-1]:
        acc = acc * z + coef
    return acc


def geometric_roots(a: float, c: float) -> tuple:
    """Roots ``p1 > p2 > 0`` of ``1 - (a + c + 2) z + 2 c z^2``."""
    if not (a > 0 and c > 0):
        raise NegativeParamError(f"geometric roots need a > 0 and c > 0, got a={a}, c={c}")
    s = a + c + 2.0
    big = s + math.sqrt(s * s - 8.0 * c)
    # p1 * p2 = 1 / (2c); this avoids cancellation in p2
    return big / (4.0 * c), 2.0 / big


def differentiated_cubic(a: float, c: float) -> tuple:
    """Numerator ``p(z)`` of ``t_hat`` for ``T_k = a k c^(k-1)``, highest degree first."""
    if not (a > 0 and c > 0):
        raise NegativeParamError(f"cubic needs a > 0 and c > 0, got a={a}, c={c}")
    return (2.0 * c * c, -c * (c + 4.0), a + 2.0 * c + 2.0, -1.0)


def differentiated_c_branches(a: float, w0: float) -> tuple:
    """The two values of ``c`` for which ``w0`` solves the differentiated cubic.

    Solving ``p(w0) = 0`` for ``c`` gives ``c = 1/w0 +- sqrt(a / ((1 - 2 w0) w0))``;
    which sign applies depends on ``(a, c)``.
    """
    if not 0 < w0 < 0.5:
        raise OutOfDomainError(f"w0 must lie in (0, 1/2), got {w0}")
    root = math.sqrt(a / ((1.0 - 2.0 * w0) * w0))
    return 1.0 / w0 + root, 1.0 / w0 - root


def _bisect(f, lo, hi, tol):
    flo = f(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < tol and abs(fmid) < tol:
            break
    return 0.5 * (lo + hi)


def _bracket(f, upper):
    """First grid cell of ``(0, upper]`` where ``f`` turns non-negative."""
    h = upper / 64.0
    prev = 0.0
    for i in range(1, 65):
        z = upper if i == 64 else i * h
        if f(z) >= 0.0:
            return prev, z
        prev = z
    raise NoRootInDomainError(f"t_hat stays negative on (0, {upper}]")


def horton_exponent(seq: TokunagaSequence, tol: float = 1e-12) -> ExponentResult:
    """Zero ``w0`` of ``t_hat`` in ``(0, 1/2]`` and ``R = 1 / w0``.

    Closed forms are used for the geometric and shallow families (and for
    explicit sequences of length at most two); otherwise a bracketing scan
    followed by bisection.  The differentiated family is solved on its cubic
    numerator, which has no pole.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    family = seq.family
    if family == GEOMETRIC:
        w0 = geometric_roots(*seq.params)[1]
        method = "closed_form"
    elif family == SHALLOW or (family == EXPLICIT and len(seq.params) <= 2):
        T1 = seq.term(1)
        T2 = seq.term(2)
        b = T1 + 2.0
        # 2 / (b + sqrt(b^2 + 4 T2)) is the stable form; T2 = 0 gives 1 / (T1 + 2)
        w0 = 2.0 / (b + math.sqrt(b * b + 4.0 * T2))
        method = "closed_form"
    elif family == DIFFERENTIATED:
        coeffs = differentiated_cubic(*seq.params)
        cubic = lambda z: ((coeffs[0] * z + coeffs[1]) * z + coeffs[2]) * z + coeffs[3]
        # on (0, 1/c) the cubic has the sign of t_hat; it has no pole at 1/c
        upper = min(0.5, 1.0 / seq.c)
        lo, hi = _bracket(cubic, upper)
        w0 = _bisect(cubic, lo, hi, tol)
        method = "bisection"
    else:
        f = lambda z: t_hat(seq, z)
        lo, hi = _bracket(f, 0.5)
        w0 = _bisect(f, lo, hi, tol)
        method = "bisection"
    return ExponentResult(w0, 1.0 / w0, method, abs(t_hat(seq, w0)))


def series_t_hat(seq: TokunagaSequence, z: float, n_terms: int = 200) -> float:
    """Truncated power series ``sum_{j < n_terms} t(j) z^j``, for cross-checks."""
    coeffs = seq.coefficients(n_terms)
    return float(np.polynomial.polynomial.polyval(z, coeffs))
