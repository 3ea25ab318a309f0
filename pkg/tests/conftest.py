import numpy as np
import pytest

from noether_qds import harness

SX, SY, SZ, SM = harness.SIGMA_X, harness.SIGMA_Y, harness.SIGMA_Z, harness.SIGMA_MINUS
I2 = np.eye(2, dtype=complex)


def taylor_exp(X, t, terms=30):
    """Truncated power series, independent of scipy's expm."""
    X = np.asarray(X, dtype=complex) * t
    out = np.eye(X.shape[0], dtype=complex)
    term = np.eye(X.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    return out


def apply_lindblad_schrodinger(H, ops, S):
    out = 1j * (S @ H - H @ S)
    for L in ops:
        Ld = L.conj().T
        out = out + L @ S @ Ld - 0.5 * S @ Ld @ L - 0.5 * Ld @ L @ S
    return out


def apply_lindblad_heisenberg(H, ops, A):
    out = -1j * (A @ H - H @ A)
    for L in ops:
        Ld = L.conj().T
        out = out + Ld @ A @ L - 0.5 * A @ Ld @ L - 0.5 * Ld @ L @ A
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def deph():
    return harness.dephasing()


@pytest.fixture
def amp():
    return harness.amplitude_damping()


# (criterion, passed, detail) lines recorded by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
