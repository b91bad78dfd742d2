import numpy as np
import pytest


def random_spd(rng, n, shift=1.0):
    g = rng.normal(size=(n, n))
    return g.T @ g + shift * np.eye(n)


def random_sym(rng, n):
    g = rng.normal(size=(n, n))
    return 0.5 * (g + g.T)


def b_orthonormalize(g, b):
    """Columns of ``g`` made orthonormal in the ``b`` inner product."""
    vals, vecs = np.linalg.eigh(g.T @ b @ g)
    return g @ vecs @ np.diag(vals ** -0.5) @ vecs.T


def subspace_objective(g, s, b):
    """``tr(A^T s A)`` at the b-orthonormal basis ``A`` of span(g), without forming ``A``."""
    return float(np.trace(np.linalg.solve(g.T @ b @ g, g.T @ s @ g)))


def subspace_distance(u, v):
    """Frobenius distance between orthogonal projectors onto span(u) and span(v)."""
    qu, _ = np.linalg.qr(u)
    qv, _ = np.linalg.qr(v)
    return np.linalg.norm(qu @ qu.T - qv @ qv.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    acceptance = __import__("sys").modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.RESULTS:
        terminalreporter.write_line(line)
