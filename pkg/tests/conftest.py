import numpy as np
import pytest
from scipy.linalg import expm

from dpw_delaunay.delaunay import DelaunayParams, xi_minus1
from dpw_delaunay.loops import LoopMatrix, diag, multiply

CYLINDER = DelaunayParams(0.25, 0.25, 0.0)
UNDULOID = DelaunayParams(0.3, 0.2, 0.0)
SPHERE = DelaunayParams(0.5, 0.0, 0.0)
NODOID = DelaunayParams(0.3, -0.05, float(np.sqrt(0.1875)))
OPEN = DelaunayParams(0.3, 0.3, 0.0)


def random_twisted(rng, degree, scale=1.0):
    """Twisted loop of the given degree with no determinant constraint."""
    modes = {}
    for k in range(-degree, degree + 1):
        m = scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        if k % 2 == 0:
            m[0, 1] = m[1, 0] = 0
        else:
            m[0, 0] = m[1, 1] = 0
        modes[k] = m
    return LoopMatrix.from_modes(modes)


def unipotent(rng, upper, modes=(-1, 1), scale=0.4):
    """``[[1, u], [0, 1]]`` or its transpose with ``u`` an odd Laurent polynomial."""
    m = {0: np.eye(2, dtype=complex)}
    for k in modes:
        e = np.zeros((2, 2), dtype=complex)
        e[(0, 1) if upper else (1, 0)] = scale * complex(*rng.normal(size=2))
        m[k] = m[k] + e if k in m else e
    return LoopMatrix.from_modes(m)


def random_sl_twisted(rng, scale=0.4):
    """Twisted loop of degree 4 with ``det = 1`` (product of four unipotents and an element of K)."""
    g1 = multiply(unipotent(rng, True, scale=scale), unipotent(rng, False, scale=scale), headroom=1)
    g2 = multiply(unipotent(rng, True, scale=scale), unipotent(rng, False, scale=scale), headroom=1)
    d = float(np.exp(0.5 * rng.normal()))
    return multiply(LoopMatrix.constant(diag(d, 1 / d)), multiply(g1, g2, headroom=2))


def random_positive(rng, scale=0.4):
    """Positive loop of degree 3: ``diag[d, 1/d]`` times an upper unipotent in ``lam, lam^3``."""
    d = float(np.exp(0.3 * rng.normal()))
    return multiply(LoopMatrix.constant(diag(d, 1 / d)),
                    unipotent(rng, True, modes=(1, 3), scale=scale))


def expm_oracle(params, w, lam):
    """Pointwise ``exp(w xi_{-1}(lam))`` through scipy's Pade exponential."""
    return np.array([expm(w * x) for x in xi_minus1(params, lam)])


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


# (criterion, description, measured, threshold, passed) rows from test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, desc, value, limit, ok in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'} criterion {crit}: {desc} (measured {value:.3e}, limit {limit:.1e})")
