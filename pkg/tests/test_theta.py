import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GENUS2, cached_curve
from finitegap.periods import compute_periods
from finitegap.theta import (
    ThetaContext,
    ThetaJet,
    cumulants_from_moments,
    log_theta,
    moments_from_cumulants,
    set_partitions,
    theta,
    theta_derivative,
)


@pytest.fixture(scope="module")
def ctx():
    return ThetaContext(compute_periods(cached_curve(GENUS2)).tau)


def naive_theta(z, tau, char=None, N=12):
    g = len(z)
    a, b = (np.zeros(g), np.zeros(g)) if char is None else map(np.asarray, char)
    total = 0j
    for m in itertools.product(range(-N, N + 1), repeat=g):
        k = np.array(m) + a
        total += np.exp(1j * np.pi * k @ tau @ k + 2j * np.pi * k @ (z + b))
    return total


def test_against_naive_sum(ctx):
    z = np.array([0.13 + 0.05j, -0.2 + 0.1j])
    np.testing.assert_allclose(theta(z, ctx), naive_theta(z, ctx.tau), rtol=1e-13)
    char = (np.array([0.5, 0.0]), np.array([0.5, 0.5]))
    np.testing.assert_allclose(theta(z, ctx, char), naive_theta(z, ctx.tau, char), rtol=1e-12)


def test_periodicity_and_quasi_periodicity(ctx):
    z = np.array([0.1 - 0.07j, 0.3 + 0.02j])
    t0 = theta(z, ctx)
    e = np.array([0.0, 1.0])
    np.testing.assert_allclose(theta(z + e, ctx), t0, rtol=1e-12)
    col = ctx.tau @ e
    factor = np.exp(-1j * np.pi * e @ ctx.tau @ e - 2j * np.pi * e @ z)
    np.testing.assert_allclose(theta(z + col, ctx), factor * t0, rtol=1e-11)


def test_even_without_characteristic(ctx):
    z = np.array([0.21 + 0.1j, -0.05 + 0.03j])
    np.testing.assert_allclose(theta(-z, ctx), theta(z, ctx), rtol=1e-13)


def test_derivatives_match_finite_differences(ctx):
    z = np.array([0.1 + 0.02j, -0.1 + 0.05j])
    h = 1e-4
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (theta(z + e, ctx) - theta(z - e, ctx)) / (2 * h)
        np.testing.assert_allclose(theta_derivative(z, ctx, (i,)), fd, rtol=1e-7)
    e0 = np.array([h, 0.0])
    e1 = np.array([0.0, h])
    fd = (theta(z + e0 + e1, ctx) - theta(z + e0 - e1, ctx) - theta(z - e0 + e1, ctx) + theta(z - e0 - e1, ctx)) / (4 * h * h)
    np.testing.assert_allclose(theta_derivative(z, ctx, (0, 1)), fd, rtol=1e-6)


def test_jet_log_derivatives(ctx):
    z = np.array([[0.1 + 0.02j, -0.1 + 0.05j]])
    jet = ThetaJet(ctx, z, np.eye(2))
    np.testing.assert_allclose(jet.log_value[0], log_theta(z[0], ctx), rtol=1e-13)
    t = theta(z[0], ctx)
    d0 = theta_derivative(z[0], ctx, (0,))
    d00 = theta_derivative(z[0], ctx, (0, 0))
    np.testing.assert_allclose(jet.log_derivative((0,))[0], d0 / t, rtol=1e-12)
    np.testing.assert_allclose(jet.log_derivative((0, 0))[0], d00 / t - (d0 / t) ** 2, rtol=1e-11)
    raw = jet.derivative((0, 0)) * np.exp(jet.shift)
    np.testing.assert_allclose(raw[0], d00, rtol=1e-12)


def test_axis_log_derivatives_agree_with_joint_cumulants(ctx):
    z = np.array([[0.1 + 0.02j, -0.1 + 0.05j], [0.3 - 0.1j, 0.2 + 0.4j]])
    jet = ThetaJet(ctx, z, np.eye(2))
    axis = jet.axis_log_derivatives(1, 6)
    for k in range(1, 7):
        np.testing.assert_allclose(axis[k - 1], jet.log_derivative((1,) * k), rtol=1e-10, atol=1e-10)


def test_large_imaginary_argument_stays_finite(ctx):
    z = np.array([0.1 + 40.0j, -0.3 - 25.0j])
    lt = log_theta(z, ctx)
    assert np.isfinite(lt)
    # quasi-periodicity holds for the logarithm far from the origin
    e = np.array([1.0, 0.0])
    col = ctx.tau @ e
    expected = lt - 1j * np.pi * e @ ctx.tau @ e - 2j * np.pi * e @ z
    diff = log_theta(z + col, ctx) - expected
    assert abs(diff.real) < 1e-9
    assert abs((diff.imag + np.pi) % (2 * np.pi) - np.pi) < 1e-9


@pytest.mark.parametrize("n,bell", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)])
def test_set_partition_counts(n, bell):
    assert len(set_partitions(n)) == bell


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4))
def test_moment_cumulant_round_trip(vals):
    # cumulants of a univariate "distribution" given as arbitrary numbers
    kappa = {k: vals[k - 1] for k in range(1, 5)}

    def cum(m):
        return kappa[len(m)]

    def mom(m):
        return moments_from_cumulants(cum, m)

    for n in range(1, 5):
        assert math.isclose(cumulants_from_moments(mom, (0,) * n), kappa[n], abs_tol=1e-9)


def test_rejects_non_positive_imaginary_part():
    from finitegap.errors import NonConvergent

    with pytest.raises(NonConvergent):
        ThetaContext(np.array([[1.0 - 0.5j]]))
