"""Coupling tensors and dense assembly of the random q-body Hamiltonian.

H = i**floor(q/2) * binom(n, q)**-0.5 * sum_R J_R Psi_R over all q-element
index sets R, with i.i.d. mean-zero unit-variance couplings J_R.  The
matrix is built by scattering signed monomial matrices (Jordan-Wigner
images of the words), so assembly is exact up to float rounding of J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable

import numpy as np

from . import kernels
from .clifford import PHASES, IndexSet, word_symplectic
from .errors import NumericValidationError, ResourceGuardError

DENSE_HAMILTONIAN_CAP = 22  # L = 2048
ENUMERATION_BUDGET = 10**7  # injective-assignment tuples per partition

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class CouplingDistribution:
    """Law of the i.i.d. couplings: mean 0, variance 1, fourth moment gamma."""

    kind: str
    gamma: float
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None
    moment_fn: Callable[[int], float] | None = None

    _GAMMAS = {"gaussian": 3.0, "rademacher": 1.0, "uniform_scaled": 1.8}

    def __post_init__(self):
        if self.kind in self._GAMMAS:
            if self.gamma != self._GAMMAS[self.kind]:
                raise ValueError(
                    f"{self.kind} has fourth moment {self._GAMMAS[self.kind]}, got {self.gamma}"
                )
        elif self.kind == "custom":
            if self.sampler is None:
                raise ValueError("custom distribution requires a sampler")
            if self.gamma < 1.0:
                raise ValueError("fourth moment of a unit-variance law is >= 1")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "rademacher":
            return 2.0 * rng.integers(0, 2, size=size) - 1.0
        if self.kind == "uniform_scaled":
            return rng.uniform(-_SQRT3, _SQRT3, size=size)
        return np.asarray(self.sampler(rng, size), dtype=float)

    def moment(self, m: int) -> float:
        """E[J**m], used by the exact enumeration oracles."""
        if m < 0:
            raise ValueError("moment order must be nonnegative")
        if self.kind == "gaussian":
            return float(math.prod(range(1, m, 2))) if m % 2 == 0 else 0.0
        if self.kind == "rademacher":
            return 1.0 if m % 2 == 0 else 0.0
        if self.kind == "uniform_scaled":
            return 3.0 ** (m // 2) / (m + 1) if m % 2 == 0 else 0.0
        if self.moment_fn is None:
            raise ValueError("custom distribution lacks a moment function")
        return float(self.moment_fn(m))


GAUSSIAN = CouplingDistribution("gaussian", 3.0)
RADEMACHER = CouplingDistribution("rademacher", 1.0)
UNIFORM_SCALED = CouplingDistribution("uniform_scaled", 1.8)

NAMED_DISTRIBUTIONS = {
    "gaussian": GAUSSIAN,
    "rademacher": RADEMACHER,
    "uniform_scaled": UNIFORM_SCALED,
}


def _check_nq(n: int, q: int) -> None:
    if not 1 <= q <= n:
        raise ValueError(f"require 1 <= q <= n, got n={n}, q={q}")


def enumerate_index_set(n: int, q: int) -> list[IndexSet]:
    """All q-element subsets of {1..n} in lexicographic order."""
    _check_nq(n, q)
    return [IndexSet.from_indices(c, n) for c in combinations(range(1, n + 1), q)]


@lru_cache(maxsize=64)
def index_set_masks(n: int, q: int) -> np.ndarray:
    """Bitmasks of enumerate_index_set(n, q) as uint64, same order."""
    _check_nq(n, q)
    out = np.zeros(math.comb(n, q), dtype=np.uint64)
    for i, c in enumerate(combinations(range(1, n + 1), q)):
        bits = 0
        for j in c:
            bits |= 1 << (j - 1)
        out[i] = bits
    out.flags.writeable = False  # cached and shared
    return out


@lru_cache(maxsize=16)
def _word_monomial_arrays(n: int, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x_mask, z_mask, i-exponent) of the Jordan-Wigner image of every
    word Psi_R, R in lexicographic order."""
    sets = enumerate_index_set(n, q)
    xm = np.zeros(len(sets), dtype=np.uint64)
    zm = np.zeros(len(sets), dtype=np.uint64)
    pe = np.zeros(len(sets), dtype=np.int64)
    for i, s in enumerate(sets):
        x, z, e = word_symplectic(s)
        xm[i], zm[i], pe[i] = x, z, e
    for arr in (xm, zm, pe):
        arr.flags.writeable = False  # cached and shared
    return xm, zm, pe


@dataclass(frozen=True)
class CouplingSample:
    """One draw of the full coupling tensor, indexed like enumerate_index_set."""

    n: int
    q: int
    values: np.ndarray
    distribution: CouplingDistribution = GAUSSIAN

    def __post_init__(self):
        _check_nq(self.n, self.q)
        expected = math.comb(self.n, self.q)
        if len(self.values) != expected:
            raise ValueError(f"expected {expected} couplings, got {len(self.values)}")

    def dump_csv(self, target) -> None:
        """Write (index, J_R) rows for audit; 17 significant digits."""
        close = False
        if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
            target = open(target, "w", encoding="utf-8")
            close = True
        try:
            target.write("index,J\n")
            for i, v in enumerate(self.values):
                target.write(f"{i},{v:.17g}\n")
        finally:
            if close:
                target.close()


def sample_couplings(
    dist: CouplingDistribution, n: int, q: int, rng: np.random.Generator
) -> CouplingSample:
    """Draw the i.i.d. coupling tensor; deterministic given the generator state."""
    _check_nq(n, q)
    values = dist.sample(rng, math.comb(n, q))
    return CouplingSample(n, q, values, dist)


@dataclass
class HamiltonianMatrix:
    entries: np.ndarray
    n: int
    q: int
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def assemble_dense(sample: CouplingSample, cap: int = DENSE_HAMILTONIAN_CAP) -> HamiltonianMatrix:
    """Assemble the dense Hermitian Hamiltonian from a coupling sample."""
    n, q = sample.n, sample.q
    if n % 2 != 0:
        raise ValueError(f"n must be even, got {n}")
    if n > cap:
        raise ResourceGuardError(f"dense Hamiltonian capped at n <= {cap}, got n = {n}")
    L = 1 << (n // 2)
    xm, zm, pe = _word_monomial_arrays(n, q)
    norm = 1.0 / math.sqrt(math.comb(n, q))
    prefactor = PHASES[(q // 2) % 4]
    # Each summand i**floor(q/2) J_R Psi_R is Hermitian exactly when the
    # total i-exponent matches the X/Z overlap parity of its monomial;
    # real couplings then make H Hermitian entry-for-entry in floating
    # arithmetic, so an O(1)-per-word certificate replaces an O(L^2) scan.
    overlap_parity = (np.bitwise_count(xm & zm) & np.uint64(1)).astype(np.int64)
    total_exp = (pe + q // 2) % 4
    if np.any((total_exp & 1) != overlap_parity):
        raise NumericValidationError("assembled words are not individually Hermitian")
    coeffs = np.asarray(
        [prefactor * PHASES[int(e) % 4] for e in pe], dtype=np.complex128
    ) * (norm * sample.values)
    H = kernels.assemble_monomials(xm, zm, coeffs, L)
    tr = complex(np.trace(H))
    if abs(tr) > 1e-10 * L:
        raise NumericValidationError(f"assembled matrix not traceless: trace {tr:g}")
    return HamiltonianMatrix(H, n, q, metadata={"distribution": sample.distribution.kind})


def _partition_budget_guard(ni: int, max_blocks: int) -> None:
    if max_blocks > 0 and ni**max_blocks > ENUMERATION_BUDGET:
        raise ResourceGuardError(
            f"enumeration over {ni}**{max_blocks} assignments exceeds budget {ENUMERATION_BUDGET:g}"
        )


def exact_moment_expectation(n: int, q: int, k: int, dist: CouplingDistribution) -> float:
    """E[L**-1 Tr H**k] with no sampling error, by exhaustive enumeration.

    Tuples where some index set appears exactly once vanish (mean-zero
    couplings), so the sum runs over set partitions of the k positions
    with all blocks of size >= 2, weighted by closed-form moments of J.
    """
    _check_nq(n, q)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1.0
    ni = math.comb(n, q)
    _partition_budget_guard(ni, k // 2)
    masks = index_set_masks(n, q)
    total = 0.0
    for block_of_pos, nblocks in kernels.partitions_min_block2(k):
        sizes = np.bincount(block_of_pos, minlength=nblocks) if nblocks else []
        weight = math.prod(dist.moment(int(c)) for c in sizes)
        if weight == 0.0:
            continue
        s = kernels.signed_trace_assignment_sum(masks, block_of_pos, nblocks, k)
        total += weight * float(s)
    e = ((q // 2) * k) % 4
    if e % 2 == 1:
        # Tr H^k is real, so the signed sum must cancel when i**e is imaginary.
        if abs(total) > 1e-9:
            raise NumericValidationError("imaginary moment contribution did not cancel")
        return 0.0
    sign = 1.0 if e == 0 else -1.0
    return sign * total / ni ** (k / 2.0)
