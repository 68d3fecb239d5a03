"""Hot numeric kernels: bitmask word folding, monomial-matrix assembly,
and exhaustive tuple enumeration.

Index sets live in ``uint64`` bitmasks here.  Every kernel exists twice:
a ``numba``-jitted loop (default) and a pure-numpy/python fallback.  Set
``SYKLAB_NO_NUMBA=1`` to select the fallback at import time; both paths
are importable under ``*_numba`` / ``*_numpy`` names for benchmarks and
cross-checks (see ``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

NUMBA_ENV_FLAG = "SYKLAB_NO_NUMBA"
USE_NUMBA = HAVE_NUMBA and os.environ.get(NUMBA_ENV_FLAG, "").strip().lower() not in {
    "1",
    "true",
    "yes",
    "on",
}


# ---------------------------------------------------------------------------
# scalar bit helpers (python ints, exact for any n <= 64)
# ---------------------------------------------------------------------------


def merge_sign_exponent(a: int, b: int) -> int:
    """Transpositions needed to merge the sorted index list of mask ``b``
    into that of mask ``a``: the count of pairs (i in a, j in b) with i > j.
    """
    s = 0
    mm = b
    while mm:
        lsb = mm & -mm
        p = lsb.bit_length() - 1
        s += (a >> (p + 1)).bit_count()
        mm ^= lsb
    return s


def fold_word_sequence(masks) -> tuple[int, int]:
    """Reduce an ordered sequence of masks to (support_mask, sign_exponent).

    The product of the corresponding Majorana monomials equals
    (-1)**sign_exponent times the monomial on support_mask.
    """
    acc = 0
    s = 0
    for m in masks:
        s += merge_sign_exponent(acc, int(m))
        acc ^= int(m)
    return acc, s & 1


# ---------------------------------------------------------------------------
# pure-numpy / python implementations
# ---------------------------------------------------------------------------

_U64_ONE = np.uint64(1)


def _assemble_monomials_numpy(xmasks, zmasks, coeffs, L):
    H = np.zeros((L, L), dtype=np.complex128)
    basis = np.arange(L, dtype=np.uint64)
    cols = np.arange(L)
    for r in range(len(xmasks)):
        rows = (basis ^ xmasks[r]).astype(np.int64)
        parity = (np.bitwise_count(zmasks[r] & basis) & _U64_ONE).astype(np.float64)
        H[rows, cols] += coeffs[r] * (1.0 - 2.0 * parity)
    return H


def _count_xor_null_tuples_numpy(masks_sorted, m, distinct):
    ni = len(masks_sorted)
    if m == 1:
        return int(np.count_nonzero(masks_sorted == 0))
    # Tuples (R_1..R_m) with XOR zero: R_m is determined by the first m-1,
    # so enumerate those, vectorizing everything after the first index.
    mid = m - 2
    if mid == 0:
        grids = np.zeros((0, 1), dtype=np.int64)
        xor_mid = np.zeros(1, dtype=np.uint64)
    else:
        grids = np.indices((ni,) * mid).reshape(mid, -1)
        xor_mid = masks_sorted[grids[0]].copy()
        for t in range(1, mid):
            xor_mid ^= masks_sorted[grids[t]]
    count = 0
    for i0 in range(ni):
        x_last = masks_sorted[i0] ^ xor_mid
        j = np.searchsorted(masks_sorted, x_last)
        j = np.minimum(j, ni - 1)
        hit = masks_sorted[j] == x_last
        if distinct:
            ok = hit & (j != i0)
            for t in range(mid):
                ok &= (grids[t] != i0) & (grids[t] != j)
                for t2 in range(t + 1, mid):
                    ok &= grids[t] != grids[t2]
            count += int(np.count_nonzero(ok))
        else:
            count += int(np.count_nonzero(hit))
    return count


def _signed_trace_assignment_sum_python(masks, block_of_pos, nblocks, kfirst):
    ni = len(masks)
    K = len(block_of_pos)
    if nblocks == 0:
        return 1
    total = 0
    idx = [0] * nblocks
    masks_int = [int(v) for v in masks]
    while True:
        distinct = True
        for i in range(nblocks):
            for j in range(i + 1, nblocks):
                if idx[i] == idx[j]:
                    distinct = False
                    break
            if not distinct:
                break
        if distinct:
            acc = 0
            s = 0
            good = True
            for p in range(kfirst):
                mk = masks_int[idx[block_of_pos[p]]]
                s += merge_sign_exponent(acc, mk)
                acc ^= mk
            if acc != 0:
                good = False
            if good:
                t1 = 1 - 2 * (s & 1)
                acc = 0
                s = 0
                for p in range(kfirst, K):
                    mk = masks_int[idx[block_of_pos[p]]]
                    s += merge_sign_exponent(acc, mk)
                    acc ^= mk
                if acc == 0:
                    total += t1 * (1 - 2 * (s & 1))
        pos = nblocks - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < ni:
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            break
    return total


def iter_pair_blocks(k):
    """Yield every perfect matching of range(k) as a tuple of (a, b) pairs
    with a < b, blocks ordered by their smaller element."""
    if k % 2 != 0:
        return
    if k == 0:
        yield ()
        return

    def rec(free):
        if not free:
            yield ()
            return
        a0 = free[0]
        for i in range(1, len(free)):
            rest = free[1:i] + free[i + 1 :]
            for tail in rec(rest):
                yield ((a0, free[i]),) + tail

    yield from rec(tuple(range(k)))


def count_crossings(blocks) -> int:
    """Number of interleaved block pairs a < b < c < d with {a,c},{b,d} blocks."""
    kappa = 0
    nb = len(blocks)
    for i in range(nb):
        ai, bi = blocks[i]
        for j in range(nb):
            aj, bj = blocks[j]
            if ai < aj < bi < bj:
                kappa += 1
    return kappa


def _matching_exp_sum_python(k, a):
    if k % 2 != 0:
        return 0.0
    total = 0.0
    for blocks in iter_pair_blocks(k):
        total += np.exp(-2.0 * a * count_crossings(blocks))
    return float(total)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _popcount_u64(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + (
            (x >> np.uint64(2)) & np.uint64(0x3333333333333333)
        )
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @njit(cache=True)
    def _inversions_u64(acc, m):
        cnt = np.uint64(0)
        mm = m
        while mm != np.uint64(0):
            lsb = mm & (np.uint64(0) - mm)
            p = _popcount_u64(lsb - np.uint64(1))
            if p < np.uint64(63):
                cnt += _popcount_u64(acc >> (p + np.uint64(1)))
            mm ^= lsb
        return cnt

    @njit(cache=True)
    def _assemble_monomials_nb(xmasks, zmasks, coeffs, L):
        for r in range(xmasks.shape[0]):
            if xmasks[r] >= np.uint64(L):
                raise ValueError("x-mask outside the matrix dimension")
        H = np.zeros((L, L), dtype=np.complex128)
        for r in range(xmasks.shape[0]):
            x = xmasks[r]
            z = zmasks[r]
            c = coeffs[r]
            for b in range(L):
                bb = np.uint64(b)
                row = np.int64(bb ^ x)
                if _popcount_u64(z & bb) & np.uint64(1):
                    H[row, b] -= c
                else:
                    H[row, b] += c
        return H

    @njit(cache=True)
    def _count_xor_null_tuples_nb(masks_sorted, m, distinct):
        ni = masks_sorted.shape[0]
        if m == 1:
            cnt = 0
            for i in range(ni):
                if masks_sorted[i] == np.uint64(0):
                    cnt += 1
            return cnt
        idx = np.zeros(m - 1, dtype=np.int64)
        count = 0
        while True:
            x = np.uint64(0)
            for t in range(m - 1):
                x ^= masks_sorted[idx[t]]
            j = np.searchsorted(masks_sorted, x)
            if j < ni and masks_sorted[j] == x:
                ok = True
                if distinct:
                    for t in range(m - 1):
                        if idx[t] == j:
                            ok = False
                            break
                    if ok:
                        for t1 in range(m - 1):
                            for t2 in range(t1 + 1, m - 1):
                                if idx[t1] == idx[t2]:
                                    ok = False
                                    break
                            if not ok:
                                break
                if ok:
                    count += 1
            pos = m - 2
            while pos >= 0:
                idx[pos] += 1
                if idx[pos] < ni:
                    break
                idx[pos] = 0
                pos -= 1
            if pos < 0:
                break
        return count

    @njit(cache=True)
    def _signed_trace_assignment_sum_nb(masks, block_of_pos, nblocks, kfirst):
        ni = masks.shape[0]
        K = block_of_pos.shape[0]
        if nblocks == 0:
            return 1
        total = 0
        idx = np.zeros(nblocks, dtype=np.int64)
        while True:
            distinct = True
            for i in range(nblocks):
                for j in range(i + 1, nblocks):
                    if idx[i] == idx[j]:
                        distinct = False
                        break
                if not distinct:
                    break
            if distinct:
                acc = np.uint64(0)
                s = np.uint64(0)
                for p in range(kfirst):
                    mk = masks[idx[block_of_pos[p]]]
                    s += _inversions_u64(acc, mk)
                    acc ^= mk
                if acc == np.uint64(0):
                    t1 = 1 - 2 * np.int64(s & np.uint64(1))
                    acc = np.uint64(0)
                    s = np.uint64(0)
                    for p in range(kfirst, K):
                        mk = masks[idx[block_of_pos[p]]]
                        s += _inversions_u64(acc, mk)
                        acc ^= mk
                    if acc == np.uint64(0):
                        total += t1 * (1 - 2 * np.int64(s & np.uint64(1)))
            pos = nblocks - 1
            while pos >= 0:
                idx[pos] += 1
                if idx[pos] < ni:
                    break
                idx[pos] = 0
                pos -= 1
            if pos < 0:
                break
        return total

    @njit(cache=True)
    def _matching_exp_sum_nb(k, a):
        if k % 2 != 0:
            return 0.0
        if k == 0:
            return 1.0
        half = k // 2
        used = np.zeros(k, dtype=np.uint8)
        fst = np.zeros(half, dtype=np.int64)
        snd = np.zeros(half, dtype=np.int64)
        total = 0.0
        d = 0
        fst[0] = 0
        used[0] = 1
        c = 1
        while d >= 0:
            while c < k and used[c]:
                c += 1
            if c >= k:
                used[fst[d]] = 0
                d -= 1
                if d >= 0:
                    used[snd[d]] = 0
                    c = snd[d] + 1
                continue
            snd[d] = c
            used[c] = 1
            if d == half - 1:
                kappa = 0
                for i in range(half):
                    for j in range(i + 1, half):
                        if fst[j] < snd[i] and snd[i] < snd[j]:
                            kappa += 1
                total += np.exp(-2.0 * a * kappa)
                used[c] = 0
                c += 1
            else:
                d += 1
                nf = 0
                while used[nf]:
                    nf += 1
                fst[d] = nf
                used[nf] = 1
                c = nf + 1
        return total

    assemble_monomials_numba = _assemble_monomials_nb
    count_xor_null_tuples_numba = _count_xor_null_tuples_nb
    signed_trace_assignment_sum_numba = _signed_trace_assignment_sum_nb
    matching_exp_sum_numba = _matching_exp_sum_nb
else:  # pragma: no cover
    assemble_monomials_numba = None
    count_xor_null_tuples_numba = None
    signed_trace_assignment_sum_numba = None
    matching_exp_sum_numba = None

assemble_monomials_numpy = _assemble_monomials_numpy
count_xor_null_tuples_numpy = _count_xor_null_tuples_numpy
signed_trace_assignment_sum_numpy = _signed_trace_assignment_sum_python
matching_exp_sum_numpy = _matching_exp_sum_python

if USE_NUMBA:
    assemble_monomials = assemble_monomials_numba
    count_xor_null_tuples = count_xor_null_tuples_numba
    signed_trace_assignment_sum = signed_trace_assignment_sum_numba
    matching_exp_sum = matching_exp_sum_numba
else:
    assemble_monomials = assemble_monomials_numpy
    count_xor_null_tuples = count_xor_null_tuples_numpy
    signed_trace_assignment_sum = signed_trace_assignment_sum_numpy
    matching_exp_sum = matching_exp_sum_numpy


# ---------------------------------------------------------------------------
# enumeration scaffolding shared by the exact oracles
# ---------------------------------------------------------------------------


def partitions_min_block2(K):
    """Yield set partitions of range(K) whose blocks all have size >= 2,
    as (block_of_pos int8 array, nblocks) pairs.

    Only these partitions can contribute to moments of products of i.i.d.
    mean-zero couplings: an index set appearing exactly once kills the term.
    """
    if K == 0:
        yield np.zeros(0, dtype=np.int8), 0
        return
    if K > 12:
        raise ValueError("partition enumeration supported for K <= 12")
    assign = np.zeros(K, dtype=np.int8)
    sizes: list[int] = []
    out = []

    def rec(i, nb):
        singles = sum(1 for s in sizes if s == 1)
        if singles > K - i:
            return
        if i == K:
            out.append((assign.copy(), nb))
            return
        for b in range(nb):
            sizes[b] += 1
            assign[i] = b
            rec(i + 1, nb)
            sizes[b] -= 1
        sizes.append(1)
        assign[i] = nb
        rec(i + 1, nb + 1)
        sizes.pop()

    rec(0, 0)
    yield from out
