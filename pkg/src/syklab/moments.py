"""Pair-partition combinatorics and the interpolating moment family.

m_k(a) sums exp(-2a * crossings) over the (k-1)!! pair partitions of
{1..k}; a = 0 gives Gaussian moments (k-1)!!, a = infinity the Catalan
numbers (semicircle moments).  The limit mean/variance functionals of
the eigenvalue-statistic CLT are linear combinations of these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ResourceGuardError
from .kernels import count_crossings, iter_pair_blocks, matching_exp_sum

PAIR_PARTITION_K_CAP = 20  # (k-1)!! = 654_729_075 at k = 20


@dataclass(frozen=True)
class PairPartition:
    """A perfect matching of {1..k}: k/2 disjoint pairs, stored sorted."""

    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for a, b in self.blocks:
            if not a < b:
                raise ValueError(f"block ({a}, {b}) must be increasing")
            seen.update((a, b))
        k = 2 * len(self.blocks)
        if seen != set(range(1, k + 1)):
            raise ValueError(f"blocks do not partition 1..{k}")
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks)))

    @classmethod
    def from_pairs(cls, *pairs: tuple[int, int]) -> "PairPartition":
        return cls(tuple((min(p), max(p)) for p in pairs))

    @property
    def k(self) -> int:
        return 2 * len(self.blocks)

    def block_of_position(self) -> dict[int, int]:
        """Map 0-based position p to the index of the block containing p+1."""
        out: dict[int, int] = {}
        for b, (x, y) in enumerate(self.blocks):
            out[x - 1] = b
            out[y - 1] = b
        return out


def pair_partitions(k: int) -> list[PairPartition]:
    """All pair partitions of {1..k}; empty for odd k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > PAIR_PARTITION_K_CAP:
        raise ResourceGuardError(f"pair partition enumeration capped at k <= {PAIR_PARTITION_K_CAP}")
    if k % 2 != 0:
        return []
    return [
        PairPartition(tuple((a + 1, b + 1) for a, b in blocks)) for blocks in iter_pair_blocks(k)
    ]


def crossing_pairs(p: PairPartition) -> list[tuple[int, int]]:
    """Block-index pairs {r, s} that interleave as a < b < c < d."""
    out = []
    nb = len(p.blocks)
    for i in range(nb):
        ai, bi = p.blocks[i]
        for j in range(i + 1, nb):
            aj, bj = p.blocks[j]
            if ai < aj < bi < bj:
                out.append((i, j))
    return out


def crossing_number(p: PairPartition) -> int:
    """Number of interleaved block pairs of the partition."""
    return count_crossings(p.blocks)


def double_factorial_odd(k: int) -> int:
    """(k-1)!! for even k >= 0."""
    return math.prod(range(1, k, 2))


def catalan_number(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def m_k_a(k: int, a: float) -> float:
    """The moment family: 0 for odd k; sum over pair partitions of
    exp(-2a * crossings) for even k.  Closed forms at a in {0, inf}."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if a < 0:
        raise ValueError("a must be nonnegative")
    if k % 2 != 0:
        return 0.0
    if a == 0:
        return float(double_factorial_odd(k))
    if math.isinf(a):
        return float(catalan_number(k // 2))
    if k > PAIR_PARTITION_K_CAP:
        raise ResourceGuardError(f"moment enumeration capped at k <= {PAIR_PARTITION_K_CAP}")
    return float(matching_exp_sum(k, float(a)))


def _coefficients(f) -> Sequence[float]:
    return getattr(f, "coefficients", f)


def limit_mean_functional(f, a: float) -> float:
    """<x f'/2, rho_infinity> for a polynomial f, via the moment sequence:
    sum_k a_k (k/2) m_k(a)."""
    coeffs = _coefficients(f)
    return sum(c * (k / 2.0) * m_k_a(k, a) for k, c in enumerate(coeffs) if c)


def limit_variance(f, a: float, gamma: float) -> float:
    """Limiting scaled variance of the linear statistic: the squared mean
    functional times (gamma - 1)."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    mu = limit_mean_functional(f, a)
    return mu * mu * (gamma - 1.0)


def covariance_limit(k: int, k_prime: int, a: float, gamma: float) -> float:
    """Limiting scaled covariance of the k-th and k'-th empirical moments:
    (m_k(a) k/2)(m_k'(a) k'/2)(gamma - 1); zero when k + k' is odd."""
    if k < 1 or k_prime < 1:
        raise ValueError("moment orders must be >= 1")
    return (m_k_a(k, a) * k / 2.0) * (m_k_a(k_prime, a) * k_prime / 2.0) * (gamma - 1.0)
