"""Diagonalization, empirical measures, and linear eigenvalue statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericValidationError
from .hamiltonian import HamiltonianMatrix

HERMITICITY_TOL = 1e-10
TRACE_SUM_TOL = 1e-8  # |sum of eigenvalues| <= tol * L for a traceless matrix


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with coefficients a_0..a_m (low order first)."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    @classmethod
    def monomial(cls, k: int) -> "Polynomial":
        return cls((0.0,) * k + (1.0,))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear function on a uniform grid, clamped outside it,
    with a declared Lipschitz constant."""

    xs: np.ndarray
    ys: np.ndarray
    lipschitz: float

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
            raise ValueError("grid and values must be 1-d arrays of equal length >= 2")
        steps = np.diff(xs)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValueError("grid must be uniform and increasing")
        if not np.isfinite(self.lipschitz) or self.lipschitz < 0:
            raise ValueError("a finite Lipschitz constant is required")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_callable(
        cls, fn: Callable, lo: float, hi: float, num: int, lipschitz: float
    ) -> "Tabulated":
        xs = np.linspace(lo, hi, num)
        return cls(xs, np.asarray([fn(x) for x in xs], dtype=float), lipschitz)

    @property
    def spacing(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.ys)))

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)


TestFunction = Polynomial | Tabulated


@dataclass(frozen=True)
class SpectralSample:
    """Sorted spectrum of one Hamiltonian draw."""

    eigenvalues: np.ndarray
    n: int
    q: int
    provenance: dict = field(default_factory=dict)


def _validate_hermitian(entries: np.ndarray) -> float:
    scale = float(np.max(np.abs(entries)))
    defect = float(np.max(np.abs(entries - entries.conj().T)))
    if defect > HERMITICITY_TOL * max(scale, 1.0):
        raise NumericValidationError(f"matrix not Hermitian: defect {defect:g}")
    return scale


def _parity_sectors(L: int) -> tuple[np.ndarray, np.ndarray]:
    parity = np.bitwise_count(np.arange(L, dtype=np.uint64)) & np.uint64(1)
    return np.where(parity == 0)[0], np.where(parity == 1)[0]


def eigenvalues(H: HamiltonianMatrix, provenance: dict | None = None) -> SpectralSample:
    """Full real spectrum, sorted ascending.

    Even-q Hamiltonians preserve the fermion-parity grading of the
    Jordan-Wigner basis, so the matrix splits into two blocks of half the
    dimension; the split is taken only when the off-blocks are exactly
    zero, and the result is the same full spectrum either way.
    """
    entries = H.entries
    L = entries.shape[0]
    vals = None
    if H.q % 2 == 0 and L >= 4:
        even, odd = _parity_sectors(L)
        if not entries[np.ix_(even, odd)].any() and not entries[np.ix_(odd, even)].any():
            # Zero off-blocks plus Hermitian diagonal blocks certify the
            # whole matrix, so validation can stay within the sectors.
            blocks = (entries[np.ix_(even, even)], entries[np.ix_(odd, odd)])
            for block in blocks:
                _validate_hermitian(block)
            vals = np.concatenate([np.linalg.eigvalsh(b) for b in blocks])
    if vals is None:
        _validate_hermitian(entries)
        vals = np.linalg.eigvalsh(entries)
    vals = np.sort(vals)
    if abs(float(np.sum(vals))) > TRACE_SUM_TOL * L:
        raise NumericValidationError("eigenvalue sum violates tracelessness")
    return SpectralSample(vals, H.n, H.q, provenance or dict(H.metadata))


def eigensystem(H: HamiltonianMatrix) -> tuple[SpectralSample, np.ndarray]:
    """Spectrum plus eigenvectors, with a reconstruction-residual check."""
    _validate_hermitian(H.entries)
    vals, vecs = np.linalg.eigh(H.entries)
    norm = float(np.linalg.norm(H.entries))
    residual = float(np.linalg.norm(H.entries - (vecs * vals) @ vecs.conj().T))
    if residual > 1e-10 * max(norm, 1e-300):
        raise NumericValidationError(f"eigendecomposition residual {residual:g} too large")
    return SpectralSample(vals, H.n, H.q, dict(H.metadata)), vecs


def linear_statistic(s: SpectralSample, f: TestFunction) -> float:
    """Mean of f over the spectrum: L**-1 sum_j f(lambda_j)."""
    return float(np.mean(f(s.eigenvalues)))


def empirical_moment(s: SpectralSample, k: int) -> float:
    """k-th moment of the empirical eigenvalue measure, L**-1 Tr H**k."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1.0
    return float(np.mean(s.eigenvalues**k))
