"""Exact algebra of Majorana operator words.

The generators psi_1..psi_n obey {psi_i, psi_j} = 2 delta_ij, so any
ordered product reduces to a canonical monomial on an index set A
(stored as a bitmask) times a phase in {+1, +i, -1, -i}, tracked as a
power of i.  Products, traces and the crossing-sign identity are all
computed symbolically; a Jordan-Wigner matrix realization on n/2 qubits
is available for small n as a verification oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, ResourceGuardError
from .kernels import fold_word_sequence, merge_sign_exponent
from .moments import PairPartition, crossing_pairs

PHASES = (1 + 0j, 1j, -1 + 0j, -1j)

DENSE_WORD_CAP = 16  # L = 2**(n/2) = 256 at the cap


def phase_to_exponent(phase: complex) -> int:
    """Map a fourth root of unity to its power of i."""
    for e, value in enumerate(PHASES):
        if phase == value:
            return e
    raise ValueError(f"phase must be one of {{1, i, -1, -i}}, got {phase!r}")


@dataclass(frozen=True)
class IndexSet:
    """A subset of {1..n} as a bitmask (index i lives at bit i-1)."""

    bits: int
    n: int

    def __post_init__(self):
        if self.n % 2 != 0 or not 2 <= self.n <= 64:
            raise ValueError(f"n must be even with 2 <= n <= 64, got {self.n}")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits 0x{self.bits:x} outside positions 1..{self.n}")

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> "IndexSet":
        bits = 0
        for i in indices:
            if not 1 <= i <= n:
                raise ValueError(f"index {i} outside 1..{n}")
            bits |= 1 << (i - 1)
        return cls(bits, n)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if self.bits >> i & 1)

    @property
    def cardinality(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, i: int) -> bool:
        return 1 <= i <= self.n and bool(self.bits >> (i - 1) & 1)

    def __xor__(self, other: "IndexSet") -> "IndexSet":
        if self.n != other.n:
            raise DimensionMismatchError(f"n mismatch: {self.n} != {other.n}")
        return IndexSet(self.bits ^ other.bits, self.n)

    def intersection_size(self, other: "IndexSet") -> int:
        if self.n != other.n:
            raise DimensionMismatchError(f"n mismatch: {self.n} != {other.n}")
        return (self.bits & other.bits).bit_count()


@dataclass(frozen=True)
class MajoranaWord:
    """Canonical monomial: a support set plus a phase i**phase_exponent."""

    support: IndexSet
    phase_exponent: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase_exponent", self.phase_exponent % 4)

    @classmethod
    def identity(cls, n: int) -> "MajoranaWord":
        return cls(IndexSet(0, n))

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int, phase: complex = 1) -> "MajoranaWord":
        return cls(IndexSet.from_indices(indices, n), phase_to_exponent(phase))

    @property
    def n(self) -> int:
        return self.support.n

    @property
    def phase(self) -> complex:
        return PHASES[self.phase_exponent]


def word_product(lhs: MajoranaWord, rhs: MajoranaWord) -> MajoranaWord:
    """Multiply two canonical words: support is the symmetric difference,
    the sign picks up one factor of -1 per anticommutation transposition."""
    if lhs.n != rhs.n:
        raise DimensionMismatchError(f"n mismatch: {lhs.n} != {rhs.n}")
    swaps = merge_sign_exponent(lhs.support.bits, rhs.support.bits)
    exponent = lhs.phase_exponent + rhs.phase_exponent + 2 * (swaps & 1)
    return MajoranaWord(lhs.support ^ rhs.support, exponent)


def normalized_trace(w: MajoranaWord) -> complex:
    """L^-1 Tr of the word: its phase when the support is empty, else 0."""
    return w.phase if w.support.bits == 0 else 0j


def product_trace(sets: Sequence[IndexSet]) -> complex:
    """L^-1 Tr of the ordered product of plain monomials Psi_{A_1}..Psi_{A_k}."""
    sets = list(sets)
    if not sets:
        return 1 + 0j
    n = sets[0].n
    for s in sets[1:]:
        if s.n != n:
            raise DimensionMismatchError("all sets must share n")
    support, sign = fold_word_sequence(s.bits for s in sets)
    if support != 0:
        return 0j
    return complex(1 - 2 * sign)


def pi_sign_identity(pi: PairPartition, assignment: Sequence[IndexSet], q: int) -> int:
    """Sign (-1)**(sum of |R_r cap R_s| over the crossings {r,s} of pi).

    For even q this equals i**(q*k/2) times the normalized trace of the
    pi-ordered word sequence, with the block-r word placed at both
    positions of block r.
    """
    if q % 2 != 0:
        raise ValueError("sign identity is stated for even q only")
    if len(assignment) != len(pi.blocks):
        raise ValueError("assignment must provide one index set per block")
    for r in assignment:
        if r.cardinality != q:
            raise ValueError(f"index set {r.indices} does not have cardinality {q}")
    total = 0
    for r, s in crossing_pairs(pi):
        total += assignment[r].intersection_size(assignment[s])
    return -1 if total % 2 else 1


def word_sequence_from_partition(
    pi: PairPartition, assignment: Sequence[IndexSet]
) -> list[IndexSet]:
    """The ordered sequence Psi_{R_pi(1)} .. Psi_{R_pi(k)} as index sets."""
    block_of_pos = pi.block_of_position()
    return [assignment[block_of_pos[p]] for p in range(pi.k)]


# ---------------------------------------------------------------------------
# Jordan-Wigner realization (verification oracle for small n)
# ---------------------------------------------------------------------------
#
# psi_{2k-1} = Z^(k-1) (x) X (x) I..., psi_{2k} = Z^(k-1) (x) Y (x) I...
# on m = n/2 qubits; qubit 1 is the most significant bit of the basis
# index.  Every word is then a signed monomial matrix described by an
# X-mask, a Z-mask, and a power of i (X factors to the left of Z factors).


def _qubit_bit(k: int, m: int) -> int:
    return 1 << (m - k)


def majorana_symplectic(i: int, n: int) -> tuple[int, int, int]:
    """(x_mask, z_mask, i-exponent) of the Jordan-Wigner image of psi_i."""
    if not 1 <= i <= n:
        raise ValueError(f"index {i} outside 1..{n}")
    m = n // 2
    k = (i + 1) // 2
    x = _qubit_bit(k, m)
    if i % 2 == 1:
        z = ((1 << (k - 1)) - 1) << (m - k + 1)
        e = 0
    else:
        z = ((1 << k) - 1) << (m - k)
        e = 1
    return x, z, e


def _symplectic_product(a: tuple[int, int, int], b: tuple[int, int, int]) -> tuple[int, int, int]:
    x1, z1, e1 = a
    x2, z2, e2 = b
    e = (e1 + e2 + 2 * ((z1 & x2).bit_count() & 1)) % 4
    return x1 ^ x2, z1 ^ z2, e


def word_symplectic(support: IndexSet) -> tuple[int, int, int]:
    """Fold the Jordan-Wigner images of the generators of a word."""
    rep = (0, 0, 0)
    for i in support.indices:
        rep = _symplectic_product(rep, majorana_symplectic(i, support.n))
    return rep


def monomial_matrix(x: int, z: int, e: int, m: int) -> np.ndarray:
    """Dense matrix of i**e * X^x * Z^z on m qubits."""
    L = 1 << m
    basis = np.arange(L, dtype=np.uint64)
    rows = (basis ^ np.uint64(x)).astype(np.int64)
    signs = 1.0 - 2.0 * (np.bitwise_count(np.uint64(z) & basis) & np.uint64(1)).astype(float)
    M = np.zeros((L, L), dtype=np.complex128)
    M[rows, np.arange(L)] = PHASES[e % 4] * signs
    return M


def _check_dense_cap(n: int, cap: int) -> None:
    if n > cap:
        raise ResourceGuardError(f"dense realization capped at n <= {cap}, got n = {n}")


def dense_majorana(j: int, n: int, cap: int = DENSE_WORD_CAP) -> np.ndarray:
    """Dense Jordan-Wigner matrix of psi_j; Hermitian, squares to identity."""
    if n % 2 != 0:
        raise ValueError(f"n must be even, got {n}")
    _check_dense_cap(n, cap)
    x, z, e = majorana_symplectic(j, n)
    return monomial_matrix(x, z, e, n // 2)


def dense_word(w: MajoranaWord, cap: int = DENSE_WORD_CAP) -> np.ndarray:
    """Dense matrix of a word, phase included."""
    _check_dense_cap(w.n, cap)
    x, z, e = word_symplectic(w.support)
    return monomial_matrix(x, z, (e + w.phase_exponent) % 4, w.n // 2)
