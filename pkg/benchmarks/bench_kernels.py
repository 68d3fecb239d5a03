#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy/python fallbacks.

Run once to JIT-compile, then measure; the same comparison is what the
SYKLAB_NO_NUMBA=1 environment flag switches at import time.
"""

import math
import time

import numpy as np

from syklab import kernels
from syklab.hamiltonian import _word_monomial_arrays, index_set_masks


def timeit(fn, *args, repeat=3):
    fn(*args)  # warm (JIT compile / cache touch)
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, size, numba_fn, numpy_fn, args):
    t_nb = timeit(numba_fn, *args) if numba_fn is not None else math.nan
    t_np = timeit(numpy_fn, *args)
    speedup = t_np / t_nb if t_nb == t_nb else math.nan
    print(f"{name:32s} {size:>14s} numba {t_nb:9.4f}s numpy {t_np:9.4f}s x{speedup:7.1f}")


def main():
    print(f"numba available: {kernels.HAVE_NUMBA}; dispatch uses numba: {kernels.USE_NUMBA}")
    rng = np.random.default_rng(0)

    for n, q in [(16, 4), (20, 4)]:
        xm, zm, _ = _word_monomial_arrays(n, q)
        L = 1 << (n // 2)
        coeffs = (rng.standard_normal(len(xm)) + 0j).astype(np.complex128)
        row(
            "assemble_monomials",
            f"({n},{q}) L={L}",
            kernels.assemble_monomials_numba,
            kernels.assemble_monomials_numpy,
            (xm, zm, coeffs, L),
        )

    for n, q, m in [(10, 2, 3), (8, 2, 4)]:
        masks = np.sort(index_set_masks(n, q))
        row(
            "count_xor_null_tuples",
            f"({n},{q}) m={m}",
            kernels.count_xor_null_tuples_numba,
            kernels.count_xor_null_tuples_numpy,
            (masks, m, True),
        )

    masks = index_set_masks(10, 4)
    block_of_pos = np.array([0, 1, 0, 1], dtype=np.int8)
    row(
        "signed_trace_assignment_sum",
        "(10,4) k=4",
        kernels.signed_trace_assignment_sum_numba,
        kernels.signed_trace_assignment_sum_numpy,
        (masks, block_of_pos, 2, 4),
    )

    for k in (10, 12):
        row(
            "matching_exp_sum",
            f"k={k}",
            kernels.matching_exp_sum_numba,
            kernels.matching_exp_sum_numpy,
            (k, 1.0),
        )


if __name__ == "__main__":
    main()
