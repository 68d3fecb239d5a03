"""Counting and sampling of q-subset configurations.

B_m counts m-tuples of index sets whose word product is +/- identity,
equivalently tuples whose masks XOR to zero.  Exact formulas exist for
m = 3 and the unrestricted m = 4 count; brute force covers the rest
under an enumeration budget.  The overlap |R cap R'| of two uniform
q-subsets is exactly hypergeometric and approximately Poisson(q^2/n).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from . import kernels
from .errors import ResourceGuardError
from .hamiltonian import index_set_masks

BRUTE_FORCE_BUDGET = 10**7  # |I_n|**m cap for exhaustive tuple counting
_VECTOR_SAMPLING_MAX_N = 1024


def _check_nq(n: int, q: int) -> None:
    if n < 1 or not 1 <= q <= n:
        raise ValueError(f"require 1 <= q <= n, got n={n}, q={q}")


def count_B3_exact(n: int, q: int) -> int:
    """Triples with Psi_R1 Psi_R2 Psi_R3 = +/- I (all distinct, automatically):
    binom(n,q) binom(q,q/2) binom(n-q,q/2); zero for odd q or n < 3q/2."""
    _check_nq(n, q)
    if q % 2 != 0 or 2 * n < 3 * q:
        return 0
    h = q // 2
    return math.comb(n, q) * math.comb(q, h) * math.comb(n - q, h)


def count_B4_exact(n: int, q: int) -> int:
    """Unrestricted 4-tuples with word product +/- I: the pairs (R1,R2) and
    (R3,R4) share their symmetric difference A, summed over |A| = 2k."""
    _check_nq(n, q)
    total = 0
    for k in range(min(q, n - q) + 1):
        total += math.comb(n, 2 * k) * math.comb(2 * k, k) ** 2 * math.comb(n - 2 * k, q - k) ** 2
    return total


def count_Bm_bruteforce(n: int, q: int, m: int, distinct: bool = True) -> int:
    """Exhaustive count of m-tuples whose masks XOR to zero; with
    ``distinct`` the tuple entries must be pairwise different."""
    _check_nq(n, q)
    if m < 1:
        raise ValueError("m must be >= 1")
    ni = math.comb(n, q)
    if ni**m > BRUTE_FORCE_BUDGET:
        raise ResourceGuardError(f"brute force over {ni}**{m} tuples exceeds {BRUTE_FORCE_BUDGET:g}")
    masks = np.sort(index_set_masks(n, q))
    return int(kernels.count_xor_null_tuples(masks, m, distinct))


def bm_bound_ratio(n: int, q: int, m: int) -> float:
    """|B_m| * sqrt(n) / |I_n|**(m-1); stays bounded in n at fixed (q, m)."""
    if m <= 2:
        return 0.0
    count = count_Bm_bruteforce(n, q, m, distinct=True)
    ni = math.comb(n, q)
    return count * math.sqrt(n) / ni ** (m - 1)


# ---------------------------------------------------------------------------
# overlap law of two independent uniform q-subsets
# ---------------------------------------------------------------------------


def hypergeometric_overlap_pmf(n: int, q: int) -> np.ndarray:
    """Exact pmf of |R cap R'| for independent uniform q-subsets of {1..n}."""
    _check_nq(n, q)
    denom = math.comb(n, q)
    out = np.zeros(q + 1)
    for j in range(q + 1):
        if q - j <= n - q:
            out[j] = math.comb(q, j) * math.comb(n - q, q - j) / denom
    return out


def poisson_pmf(rate: float, size: int) -> np.ndarray:
    """Poisson pmf on 0..size-1."""
    return stats.poisson.pmf(np.arange(size), rate)


def total_variation(p: np.ndarray, r: np.ndarray) -> float:
    """TV distance between pmfs given on initial segments of {0,1,...};
    mass missing from the shorter/truncated array is counted as living
    where the other pmf vanishes (exact for our hypergeometric/Poisson
    and empirical comparisons)."""
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    size = max(len(p), len(r))
    pp = np.zeros(size)
    rr = np.zeros(size)
    pp[: len(p)] = p
    rr[: len(r)] = r
    missing = abs((1.0 - pp.sum()) - (1.0 - rr.sum()))
    return 0.5 * (float(np.sum(np.abs(pp - rr))) + missing)


def unrank_subset(n: int, q: int, rank: int) -> tuple[int, ...]:
    """The rank-th q-subset of {1..n} in lexicographic order."""
    _check_nq(n, q)
    if not 0 <= rank < math.comb(n, q):
        raise ValueError(f"rank {rank} outside 0..{math.comb(n, q) - 1}")
    out = []
    x = 1
    r = rank
    for j in range(q, 0, -1):
        while math.comb(n - x, j - 1) <= r:
            r -= math.comb(n - x, j - 1)
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def random_subset_rank(n: int, q: int, rng: np.random.Generator) -> int:
    """Uniform rank in [0, binom(n,q)) by rejection on raw generator bytes."""
    total = math.comb(n, q)
    nbits = total.bit_length()
    nbytes = (nbits + 7) // 8
    mask = (1 << nbits) - 1
    while True:
        r = int.from_bytes(rng.bytes(nbytes), "little") & mask
        if r < total:
            return r


def intersection_histogram(
    n: int, q: int, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Empirical pmf of |R cap R'| over independent uniform draws.

    Moderate n uses vectorized top-q selection on random keys; very large
    n falls back to combinatorial unranking of uniform ranks, which needs
    no n-sized scratch per draw.
    """
    _check_nq(n, q)
    if 2 * q > n:
        raise ValueError("overlap sampling expects q <= n/2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts = np.zeros(q + 1, dtype=np.int64)
    if n <= _VECTOR_SAMPLING_MAX_N:
        chunk = max(1, min(trials, 4_000_000 // n))
        left = trials
        rows = np.arange(chunk)[:, None]
        while left > 0:
            c = min(chunk, left)
            picks1 = np.argpartition(rng.random((c, n)), q - 1, axis=1)[:, :q]
            picks2 = np.argpartition(rng.random((c, n)), q - 1, axis=1)[:, :q]
            b1 = np.zeros((c, n), dtype=bool)
            b2 = np.zeros((c, n), dtype=bool)
            b1[rows[:c], picks1] = True
            b2[rows[:c], picks2] = True
            overlaps = np.sum(b1 & b2, axis=1)
            counts += np.bincount(overlaps, minlength=q + 1)
            left -= c
    else:
        for _ in range(trials):
            r1 = set(unrank_subset(n, q, random_subset_rank(n, q, rng)))
            r2 = unrank_subset(n, q, random_subset_rank(n, q, rng))
            counts[sum(1 for i in r2 if i in r1)] += 1
    return counts / float(trials)
