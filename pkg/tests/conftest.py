"""Shared fixtures: reference curves and potentials are expensive, so cache them."""
import functools

import numpy as np
import pytest

from finitegap.curve import curve_from_branch_points
from finitegap.periods import compute_periods
from finitegap.sigma import sigma_context
from finitegap.spectral import average_S, make_potential

LEMNISCATIC = (-1.0, 0.0, 1.0)
GENUS2 = (-2.0, -1.0, 0.5, 1.0, 3.0)
GENUS3 = (-1.5, -0.2, 0.4, 1.1, 2.0, 3.5, 4.0)

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def cached_curve(E):
    return curve_from_branch_points(E)


@functools.lru_cache(maxsize=None)
def cached_context(E):
    curve = cached_curve(E)
    return sigma_context(curve, compute_periods(curve))


@functools.lru_cache(maxsize=None)
def cached_potential(E, support=None):
    curve = cached_curve(E)
    ctx = cached_context(E)
    return make_potential(curve, support, per=ctx.per, sigma_ctx=ctx)


@functools.lru_cache(maxsize=None)
def cached_average(E, support=None):
    return average_S(cached_potential(E, support))


def trapezoid(f, x):
    """Trapezoidal rule (np.trapezoid needs numpy >= 2)."""
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))


def random_branch_points(rng, g):
    """Sorted branch points with gaps and bands of comparable size."""
    steps = rng.uniform(0.4, 1.6, 2 * g)
    return tuple(np.concatenate([[0.0], np.cumsum(steps)]) - rng.uniform(0.0, 2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
