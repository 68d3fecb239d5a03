import os

# Pin BLAS threading before numpy loads so per-sample results (and hence
# every determinism assertion) cannot depend on worker counts.
for _var in ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest

# pass/fail lines recorded by the acceptance criteria, echoed after the
# run summary (pytest captures ordinary prints)
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def kron_majorana(j: int, n: int) -> np.ndarray:
    """Independent dense oracle: explicit Kronecker chain
    psi_{2k-1} = Z^(k-1) (x) X (x) I..., psi_{2k} = Z^(k-1) (x) Y (x) I..."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    I = np.eye(2, dtype=complex)
    m = n // 2
    k = (j + 1) // 2
    factors = [Z] * (k - 1) + [X if j % 2 == 1 else Y] + [I] * (m - k)
    out = np.array([[1.0 + 0j]])
    for f in factors:
        out = np.kron(out, f)
    return out
