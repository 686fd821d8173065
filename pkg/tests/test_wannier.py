import math

import numpy as np
import pytest

from conftest import GENUS2, GENUS3, LEMNISCATIC, cached_average, cached_potential, trapezoid
from finitegap.curve import point
from finitegap.errors import ConfigError
from finitegap.spectral import bloch_psi, density_of_states
from finitegap.wannier import (
    band_width_K,
    crossover_threshold,
    display_values,
    evaluate_series,
    moment_by_reduction,
    moments,
    potential_taylor,
    q_from_display,
    q_from_recurrence,
    reciprocal_curve,
    reduce_to_basis,
    saddles,
    wannier_asymptotic,
    wannier_direct,
    wannier_series,
    wannier_support,
    wannier_translated,
)

SUPPORT1 = (3,)


@pytest.fixture(scope="module")
def lem():
    return cached_potential(LEMNISCATIC, SUPPORT1), cached_average(LEMNISCATIC, SUPPORT1)


def test_wannier_support_avoids_band_edges():
    assert wannier_support(1, 1) == (3,)
    assert wannier_support(2, 1) == (3, 5)
    assert wannier_support(2, 2) == (2, 5)
    assert wannier_support(3, 2) == (2, 5, 7)
    for g in (1, 2, 3):
        for n in range(1, g + 1):
            sup = wannier_support(g, n)
            assert not {2 * n - 1, 2 * n} & set(sup)
            assert all(i in (2 * k, 2 * k + 1) for k, i in enumerate(sup, start=1))


def test_bad_band_or_support_rejected(lem):
    pot, avg = lem
    with pytest.raises(ConfigError):
        wannier_direct(pot, 2, [0.0], avg)
    with pytest.raises(ConfigError):
        moments(pot, 0, 2, avg)
    with pytest.raises(ConfigError):
        wannier_direct(cached_potential(LEMNISCATIC), 1, [0.0])
    with pytest.raises(ConfigError):
        wannier_series(pot, 1, order=5, avg=avg)


def test_value_at_origin_is_first_moment(lem):
    pot, avg = lem
    w = wannier_direct(pot, 1, [0.0], avg)
    assert w.W[0] == pytest.approx(moments(pot, 1, 0, avg)[0], rel=1e-10)
    assert w.max_imag < 1e-7


def test_against_uniform_quasimomentum_grid(lem):
    # W = K^{-1/2} int psi dk over the Brillouin zone, lambda(k) by inverting the density of states
    pot, avg = lem
    curve = pot.curve
    K = band_width_K(pot, 1, avg)
    t, w = np.polynomial.legendre.leggauss(40)
    ks = 0.25 * K * (t + 1)
    w = 0.25 * K * w

    def lam_of(k):
        lo, hi = curve.E[0], curve.E[1]
        for _ in range(55):
            mid = 0.5 * (lo + hi)
            if math.pi * density_of_states(avg, curve, [mid])[0] < k:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    x = np.array([0.0, 0.7, 2.0, 4.0])
    total = 0j
    for k, wt in zip(ks, w):
        lam = lam_of(k)
        for sheet in (1, -1):
            total = total + wt * bloch_psi(pot, avg, x, point(curve, lam, sheet=sheet))
    np.testing.assert_allclose(wannier_direct(pot, 1, x, avg).W, (total / math.sqrt(K)).real, atol=1e-8)


def test_even_and_translated(lem):
    pot, avg = lem
    T = pot.period
    x = np.array([0.3, 1.1, 2.9])
    w = wannier_direct(pot, 1, x, avg).W
    np.testing.assert_allclose(wannier_direct(pot, 1, -x, avg).W, w, atol=1e-10)
    shifted = wannier_translated(pot, 1, x + T, 1, avg=avg)
    np.testing.assert_allclose(shifted.W, w, atol=1e-9)
    assert shifted.max_imag < 1e-7


def test_norm_and_orthogonality_genus_one(lem):
    pot, avg = lem
    T = pot.period
    x = np.linspace(-8 * T, 9 * T, 1701)
    w0 = wannier_direct(pot, 1, x, avg).W
    w1 = wannier_translated(pot, 1, x, 1, avg=avg).W
    assert abs(trapezoid(w0 * w0, x) / (2 * math.pi) - 1.0) < 1e-4
    assert abs(trapezoid(w0 * w1, x) / (2 * math.pi)) < 1e-4


@pytest.mark.parametrize("n", [1, 2])
def test_norm_genus_two(n):
    sup = wannier_support(2, n)
    pot = cached_potential(GENUS2, sup)
    avg = cached_average(GENUS2, sup)
    L = pot.length_scale
    x = np.linspace(-8 * L, 8 * L, 801)
    w = wannier_direct(pot, n, x, avg)
    assert w.max_imag < 1e-7
    assert abs(trapezoid(w.W**2, x) / (2 * math.pi) - 1.0) < 1e-3
    assert np.max(np.abs(w.W[:40])) < 1e-3 * np.max(np.abs(w.W))


def test_reciprocal_curve_genus_one(lem):
    pot, avg = lem
    rc = reciprocal_curve(pot, avg)
    s1 = avg.s[0]
    lam = np.array([0.3 + 0.1j, -2.0, 1.7])
    np.testing.assert_allclose(rc.R(lam), 4 * (lam + s1) * (lam + 1) * lam, rtol=1e-13)
    np.testing.assert_allclose(rc.branch_points, np.sort([-1.0, 0.0, -s1]), atol=1e-13)


def test_exact_differentials_reduce_to_zero():
    R = np.array([0.3, -1.0, 0.5, 2.0, -0.7, 4.0])  # degree 2g+1 with g = 2
    P = np.polynomial.polynomial
    for m in range(4):
        # d(lambda^m mu) = (m lambda^{m-1} R + lambda^m R' / 2) dlambda / mu
        mono = np.r_[np.zeros(m), 1.0]
        exact = P.polyadd(P.polymul(P.polyder(mono), R), 0.5 * P.polymul(mono, P.polyder(R)))
        np.testing.assert_allclose(reduce_to_basis(exact, R), 0.0, atol=1e-12)
    low = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(reduce_to_basis(low, R), [1.0, 2.0, 3.0, 0.0])


@pytest.mark.parametrize("E", [LEMNISCATIC, GENUS2, GENUS3])
def test_moments_by_reduction(E):
    g = (len(E) - 1) // 2
    sup = wannier_support(g, 1)
    pot = cached_potential(E, sup)
    avg = cached_average(E, sup)
    M = moments(pot, 1, 5, avg)
    for k in range(6):
        assert abs(moment_by_reduction(pot, 1, k, avg) - M[k]) < 1e-10 * max(1.0, abs(M[k]))


@pytest.mark.parametrize("E", [LEMNISCATIC, GENUS2, GENUS3])
def test_series_engines_agree(E):
    g = (len(E) - 1) // 2
    sup = wannier_support(g, 1)
    pot = cached_potential(E, sup)
    avg = cached_average(E, sup)
    series = wannier_series(pot, 1, 6, avg)
    dv = display_values(pot)
    qd = q_from_display(dv["wp_gg"], dv["wp_gggg"], dv["wp_gggggg"])
    np.testing.assert_allclose(series.q, qd, atol=1e-8 * np.max(np.abs(qd)))
    qr = q_from_recurrence(potential_taylor(pot, 12), 3)
    np.testing.assert_allclose(series.q, qr, atol=1e-8 * np.max(np.abs(qd)))


@pytest.mark.parametrize("E", [LEMNISCATIC, GENUS2, GENUS3])
def test_half_period_values(E):
    from finitegap.wannier import wp_gggg_from_kdv

    g = (len(E) - 1) // 2
    sup = wannier_support(g, 1)
    pot = cached_potential(E, sup)
    dv = display_values(pot)
    assert abs(dv["wp_gg"] + 0.5 * sum(E) - sum(E[i - 1] for i in sup)) < 1e-9
    kdv = wp_gggg_from_kdv(pot.curve, sup)
    assert abs(dv["wp_gggg"] - kdv) < 1e-8 * max(1.0, abs(kdv))


def test_series_matches_direct(lem):
    pot, avg = lem
    series = wannier_series(pot, 1, 6, avg)
    x = np.array([0.05, 0.1]) * pot.period
    direct = wannier_direct(pot, 1, x, avg).W
    np.testing.assert_allclose(evaluate_series(series, x).W, direct, rtol=1e-4)
    assert series.W_coeffs[0] == pytest.approx(series.moments[0])


def test_crossover_threshold(lem):
    pot, avg = lem
    series = wannier_series(pot, 1, 6, avg)
    xc = crossover_threshold(series, 2 * pot.period)
    assert 0.1 * pot.period < xc < 2 * pot.period
    v = evaluate_series(series, [0.5 * xc])
    assert v.tail[0] < 0.1 * abs(v.W[0])


def test_saddle_data(lem):
    pot, avg = lem
    (sd,) = saddles(pot, 1, avg)
    assert sd.side == 1
    assert sd.lam0 == pytest.approx(-avg.s[0], abs=1e-12)
    assert sd.c > 0 and sd.decay_rate > 0


def test_asymptotic_form(lem):
    pot, avg = lem
    T = pot.period
    x = np.linspace(10 * T, 11 * T, 41)
    d = wannier_direct(pot, 1, x, avg).W
    a = wannier_asymptotic(pot, 1, x, avg)
    i = np.argmax(np.abs(a))
    assert 0.9 < d[i] / a[i] < 1.1
    assert 0.9 < np.max(np.abs(d)) / np.max(np.abs(a)) < 1.1
