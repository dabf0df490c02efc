from math import factorial

import numpy as np
from hypothesis import settings, strategies as st
from scipy.linalg import expm

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def fock_coherent(alpha, dim):
    """Coherent amplitudes from the factorial series (independent of the package)."""
    return np.array([np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt(float(factorial(n)))
                     for n in range(dim)], dtype=complex)


def expm_displacement(u, dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    return expm(u * a.conj().T - np.conj(u) * a)


def disk_points(radius=2.0):
    r = st.floats(0, radius, allow_nan=False)
    theta = st.floats(0, 2 * np.pi, allow_nan=False)
    return st.builds(lambda r, t: complex(r * np.cos(t), r * np.sin(t)), r, theta)


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unit(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
