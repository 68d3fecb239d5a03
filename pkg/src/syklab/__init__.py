"""syklab: a desk-scale laboratory for q-body Majorana random matrices.

Exact word algebra and combinatorial oracles cross-checked against Monte
Carlo ensembles of diagonalized Hamiltonians, culminating in checks of
the central limit theorem for linear eigenvalue statistics.
"""

__version__ = "0.1.0"

import os as _os

# Per-sample results must not depend on the worker-pool width, and BLAS
# kernels are not bitwise-reproducible across thread counts; pin the
# count (once, before numpy first loads) unless the caller already chose.
for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")

from .clifford import IndexSet, MajoranaWord, dense_majorana, normalized_trace, pi_sign_identity, product_trace, word_product
from .hamiltonian import (
    GAUSSIAN,
    RADEMACHER,
    UNIFORM_SCALED,
    CouplingDistribution,
    CouplingSample,
    HamiltonianMatrix,
    assemble_dense,
    enumerate_index_set,
    exact_moment_expectation,
    sample_couplings,
)
from .harness import (
    ExperimentConfig,
    RunRecord,
    empirical_covariance,
    exact_covariance_oracle,
    lipschitz_concentration_audit,
    normality_test,
    run_ensemble,
    scaled_fluctuations,
    variance_bound_audit,
)
from .moments import PairPartition, covariance_limit, crossing_number, limit_mean_functional, limit_variance, m_k_a, pair_partitions
from .setcomb import bm_bound_ratio, count_B3_exact, count_B4_exact, count_Bm_bruteforce, intersection_histogram
from .smoothing import FejerKernel, fejer_derivative, fejer_eval, smooth
from .spectrum import Polynomial, SpectralSample, Tabulated, eigenvalues, empirical_moment, linear_statistic
