"""Diagonalization paths, linear statistics, empirical moments."""

import numpy as np
import pytest

from syklab.errors import NumericValidationError
from syklab.hamiltonian import GAUSSIAN, CouplingSample, HamiltonianMatrix, assemble_dense, sample_couplings
from syklab.spectrum import (
    Polynomial,
    Tabulated,
    eigensystem,
    eigenvalues,
    empirical_moment,
    linear_statistic,
)


def gaussian_hamiltonian(n, q, seed):
    return assemble_dense(sample_couplings(GAUSSIAN, n, q, np.random.default_rng(seed)))


def test_zero_matrix_spectrum():
    spec = eigenvalues(assemble_dense(CouplingSample(6, 2, np.zeros(15))))
    assert not spec.eigenvalues.any()
    assert len(spec.eigenvalues) == 8


def test_spectrum_is_sorted_and_traceless(rng):
    spec = eigenvalues(gaussian_hamiltonian(10, 4, 5))
    lam = spec.eigenvalues
    assert np.all(np.diff(lam) >= 0)
    assert abs(lam.sum()) <= 1e-8 * len(lam)


@pytest.mark.parametrize("q", [2, 3])
def test_block_path_matches_full_diagonalization(q):
    H = gaussian_hamiltonian(8, q, 123)
    lam = eigenvalues(H).eigenvalues
    full = np.sort(np.linalg.eigvalsh(H.entries))
    assert np.allclose(lam, full, atol=1e-12)


def test_eigensystem_reconstruction_residual():
    H = gaussian_hamiltonian(8, 2, 9)
    spec, vecs = eigensystem(H)
    rebuilt = (vecs * spec.eigenvalues) @ vecs.conj().T
    assert np.linalg.norm(H.entries - rebuilt) <= 1e-10 * np.linalg.norm(H.entries)


def test_non_hermitian_rejected():
    H = gaussian_hamiltonian(6, 2, 1)
    bad = H.entries.copy()
    bad[0, 1] += 0.5
    with pytest.raises(NumericValidationError):
        eigenvalues(HamiltonianMatrix(bad, H.n, H.q))


def test_reflection_symmetry_under_coupling_negation(rng):
    sample = sample_couplings(GAUSSIAN, 8, 3, rng)
    lam = eigenvalues(assemble_dense(sample)).eigenvalues
    flipped = CouplingSample(8, 3, -sample.values)
    lam_neg = eigenvalues(assemble_dense(flipped)).eigenvalues
    assert np.allclose(lam_neg, -lam[::-1], atol=1e-10)


def test_linear_statistic_normalization():
    spec = eigenvalues(gaussian_hamiltonian(8, 2, 3))
    assert linear_statistic(spec, Polynomial((1.0,))) == pytest.approx(1.0)


def test_linear_statistic_x_on_zero_matrix():
    spec = eigenvalues(assemble_dense(CouplingSample(6, 2, np.zeros(15))))
    assert linear_statistic(spec, Polynomial((0.0, 1.0))) == 0.0


def test_linear_statistic_square_equals_coupling_norm(rng):
    sample = sample_couplings(GAUSSIAN, 10, 4, rng)
    spec = eigenvalues(assemble_dense(sample))
    expected = float(np.mean(sample.values**2))
    assert linear_statistic(spec, Polynomial((0.0, 0.0, 1.0))) == pytest.approx(expected, rel=1e-10)


def test_polynomial_statistic_is_moment_combination(rng):
    spec = eigenvalues(gaussian_hamiltonian(8, 4, 21))
    f = Polynomial((0.3, -1.0, 2.0, 0.0, 0.25))
    combo = sum(c * empirical_moment(spec, k) for k, c in enumerate(f.coefficients))
    assert linear_statistic(spec, f) == pytest.approx(combo, abs=1e-10)


def test_empirical_moment_edges(rng):
    spec = eigenvalues(gaussian_hamiltonian(8, 2, 14))
    assert empirical_moment(spec, 0) == 1.0
    assert abs(empirical_moment(spec, 1)) < 1e-8
    with pytest.raises(ValueError):
        empirical_moment(spec, -1)


def test_tabulated_validation_and_clamping():
    with pytest.raises(ValueError):
        Tabulated(np.array([0.0, 1.0, 3.0]), np.zeros(3), 1.0)
    f = Tabulated(np.linspace(-1, 1, 5), np.linspace(-1, 1, 5), 1.0)
    assert f(5.0) == 1.0  # clamped beyond the hull
    assert f(-5.0) == -1.0
    assert f(0.25) == pytest.approx(0.25)


def test_tabulated_from_callable():
    f = Tabulated.from_callable(abs, -2.0, 2.0, 9, lipschitz=1.0)
    assert f(0.0) == 0.0
    assert f(1.5) == pytest.approx(1.5)
    assert f.sup_norm == 2.0
