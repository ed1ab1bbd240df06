import math
import sys

import numpy as np
import pytest

from su11tomo.states import state_pair_coherent, state_perelomov, state_superposition_pair

N_MAX = 10


@pytest.fixture(scope="session")
def pair_coherent():
    return state_pair_coherent(3.0, 0, N_MAX)


@pytest.fixture(scope="session")
def perelomov():
    return state_perelomov(0.6, 0, N_MAX)


@pytest.fixture(scope="session")
def superposition():
    return state_superposition_pair(3.0, 0, N_MAX)


def exact_factorial_B(m, k, q):
    """Series coefficient from integer factorials; independent of the lgamma path."""
    num = math.factorial(m + k + q) * math.factorial(m + q)
    den = math.factorial(m) * math.factorial(m + k)
    return math.sqrt(num / den) / math.factorial(q)


def analytic_gk(rho, k, y):
    """Continuous-phase Fourier component: (1-y)^{q+1} y^{k/2} sum_m B_mk rho_{m+k,m} y^m."""
    y = np.asarray(y, dtype=float)
    q = rho.q
    total = np.zeros_like(y, dtype=complex)
    for m in range(rho.n_max - k + 1):
        total += exact_factorial_B(m, k, q) * rho.elements[m + k, m] * y**m
    return (1 - y) ** (q + 1) * y ** (k / 2) * total


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
