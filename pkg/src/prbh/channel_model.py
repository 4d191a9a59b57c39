"""Cloner probabilities, truncated cloner distributions and the quantum capacity.

The channel is the convex sum over N >= 1 of 1 -> N qubit cloners, weighted by

    p_N(z) = (1 - z)^3 * N (N + 1) / 2 * z^(N - 1),     0 <= z < 1.

The power ``z^(N-1)`` is what makes the weights sum to one; it also gives
``p_1 = (1 - z)^3`` and matches the ``z^k`` block weights of the channel
output under ``k = N - 1``.  A variant with ``N^(N-1)`` does not normalize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

DEFAULT_TERM_CAP = 100_000


class TruncationCapExceeded(RuntimeError):
    """Raised when a series tolerance is not reached within the term cap."""


@dataclass(frozen=True)
class MassIndicator:
    """Normalized bare-mass parameter, restricted to ``0 <= z < 1``."""

    z: float

    def __post_init__(self):
        z = self.z
        if isinstance(z, bool) or not isinstance(z, (int, float)):
            raise TypeError(f"mass indicator must be a real number, got {type(z).__name__}")
        z = float(z)
        if not math.isfinite(z):
            raise ValueError(f"mass indicator must be finite, got {z}")
        if not 0.0 <= z < 1.0:
            raise ValueError(f"mass indicator must satisfy 0 <= z < 1, got {z}")
        object.__setattr__(self, "z", z)

    def __float__(self):
        return self.z


ZLike = Union[MassIndicator, float]


def as_mass_indicator(z: ZLike) -> MassIndicator:
    return z if isinstance(z, MassIndicator) else MassIndicator(z)


def cloner_probability(z: ZLike, N: int) -> float:
    """Probability of the 1 -> N cloner realization at mass indicator ``z``.

    ``N (N + 1) / 2`` is an exact integer, so ``N = 1`` evaluates the very
    same floating-point expression as ``(1 - z) ** 3``.
    """
    z = as_mass_indicator(z).z
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    if z == 0.0:
        return 1.0 if N == 1 else 0.0
    return (1.0 - z) ** 3 * (N * (N + 1) // 2) * z ** (N - 1)


def tail_mass(z: ZLike, n: int) -> float:
    """Exact remainder ``sum_{M > n} p_M``.

    Closed form of the shifted series ``sum_{m >= n+1} m (m+1) z^(m-1)``, obtained
    by writing ``m = n + 1 + k`` and summing ``z^k``, ``k z^k`` and ``k^2 z^k``.
    All terms are nonnegative, so there is no cancellation against 1.
    """
    z = as_mass_indicator(z).z
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if z == 0.0:
        return 0.0 if n >= 1 else 1.0
    m = n + 1
    w = 1.0 - z
    bracket = m * (m + 1) * w * w + (2 * m + 1) * z * w + z * (1.0 + z)
    return 0.5 * z**n * bracket


@dataclass(frozen=True)
class ClonerDistribution:
    z: MassIndicator
    n_max: int
    probs: tuple
    tail_mass: float
    tail_tol: float

    def __len__(self):
        return self.n_max

    def p(self, N: int) -> float:
        """``p_N`` for ``1 <= N <= n_max``."""
        if not 1 <= N <= self.n_max:
            raise IndexError(f"N={N} outside 1..{self.n_max}")
        return self.probs[N - 1]

    @property
    def total(self) -> float:
        return math.fsum(self.probs)

    def rows(self):
        """``(N, p_N)`` pairs in increasing N."""
        return list(enumerate(self.probs, start=1))


def _check_tol(tail_tol: float) -> float:
    tail_tol = float(tail_tol)
    if not 0.0 < tail_tol < 1.0:
        raise ValueError(f"tail_tol must satisfy 0 < tail_tol < 1, got {tail_tol}")
    return tail_tol


def build_distribution(z: ZLike, tail_tol: float = 1e-9, cap: int = DEFAULT_TERM_CAP) -> ClonerDistribution:
    """Truncate the cloner ensemble at the smallest ``n_max`` whose remainder is ``<= tail_tol``."""
    mi = as_mass_indicator(z)
    tail_tol = _check_tol(tail_tol)
    if mi.z == 0.0:
        return ClonerDistribution(mi, 1, (1.0,), 0.0, tail_tol)

    probs = []
    for n in range(1, cap + 1):
        probs.append(cloner_probability(mi, n))
        rest = tail_mass(mi, n)
        if rest <= tail_tol:
            return ClonerDistribution(mi, n, tuple(probs), rest, tail_tol)
    raise TruncationCapExceeded(
        f"truncation cap exceeded: tail mass {tail_mass(mi, cap):.3e} > {tail_tol:.3e} after {cap} terms at z={mi.z}"
    )


@dataclass(frozen=True)
class CapacityEstimate:
    z: float
    value: float
    n_terms: int
    tail_bound: float


def capacity_series(z: ZLike, tail_tol: float = 1e-12, cap: int = DEFAULT_TERM_CAP) -> CapacityEstimate:
    """Truncated quantum-capacity series with a certified remainder bound.

    Term k of the series equals ``p_{k+1} * log2((k+2)/(k+1))``. For every dropped
    term the log factor is at most ``log2((n+2)/(n+1))``, so the remainder is
    bounded by the cloner tail mass times that factor.
    """
    dist = build_distribution(z, tail_tol, cap)
    terms = [p * math.log1p(1.0 / N) / math.log(2.0) for N, p in dist.rows()]
    n = dist.n_max
    bound = dist.tail_mass * math.log1p(1.0 / (n + 1)) / math.log(2.0)
    return CapacityEstimate(dist.z.z, math.fsum(terms), n, bound)


def quantum_capacity(z: ZLike, tail_tol: float = 1e-12, cap: int = DEFAULT_TERM_CAP) -> float:
    return capacity_series(z, tail_tol, cap).value
