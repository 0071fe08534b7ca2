import numpy as np
import pytest

from fibershell import nurbs


def fd_jacobian(fun, x, h=1e-6):
    """Central-difference Jacobian of a vector function."""
    x = np.asarray(x, dtype=float).ravel()
    cols = []
    for j in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2 * h))
    return np.array(cols).T


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(b)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def wavy_element(rng):
    """One quadratic element on a perturbed patch: ``(q, Xe)`` at its Gauss points."""
    patch = nurbs.build_rect_patch(1.0, 0.8, (2, 2), (1, 1))
    X = patch.control_points()
    X[:, 2] += 0.1 * rng.standard_normal(len(X))
    X[:, :2] += 0.03 * rng.standard_normal((len(X), 2))
    q = nurbs.element_quadrature(patch)
    return q, X[q.conn[0]]


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
