import math

import numpy as np
import pytest

from conftest import GENUS2, LEMNISCATIC, cached_average, cached_curve, cached_potential
from finitegap.curve import curve_from_branch_points, point
from finitegap.errors import ConfigError, SingularHalfPeriod
from finitegap.spectral import (
    S_values,
    average_S_ergodic,
    bloch_psi,
    default_support,
    density_of_states,
    dirichlet_eigenvalues,
    dirichlet_trace,
    empirical_S_average,
    ergodic_window_estimate,
    make_potential,
    potential_u,
    quasimomentum,
    quasimomentum_periods,
    weyl_w,
)


def band_energy(E, n):
    return 0.5 * (E[2 * n - 2] + E[2 * n - 1])


def test_default_support():
    assert default_support(1) == (2,)
    assert default_support(3) == (2, 4, 6)


@pytest.mark.parametrize("E", [LEMNISCATIC, GENUS2])
def test_potential_is_real(E):
    pot = cached_potential(E)
    g = pot.genus
    x = np.linspace(0.0, 3 * pot.length_scale, 200)
    assert np.max(np.abs(pot.jet(x).wp(g, g).imag)) < 1e-8
    u = potential_u(pot, x)
    assert np.isrealobj(u) and np.all(np.isfinite(u))


def test_lemniscatic_supports():
    curve = cached_curve(LEMNISCATIC)
    pot3 = make_potential(curve, (3,))
    assert dirichlet_trace(pot3, [0.0])[0] == pytest.approx(1.0, abs=1e-10)
    assert potential_u(pot3, [0.0])[0] == pytest.approx(-2.0, abs=1e-9)
    pot2 = make_potential(curve, (2,))
    assert abs(potential_u(pot2, [0.0])[0]) < 1e-9
    with pytest.raises((ConfigError, SingularHalfPeriod)):
        make_potential(curve, (1,))


def test_supports_must_meet_every_gap():
    curve = cached_curve(GENUS2)
    for support in [(2, 4), (3, 5), (2, 5), (3, 4)]:
        make_potential(curve, support)
    for support in [(1, 2), (4, 5), (2, 2)]:
        with pytest.raises(SingularHalfPeriod):
            make_potential(curve, support)


@pytest.mark.parametrize("E", [LEMNISCATIC, GENUS2])
def test_dirichlet_eigenvalues_stay_in_gap_closures(E):
    pot = cached_potential(E)
    x = np.linspace(0.0, 2 * pot.length_scale, 40)
    mu = np.sort(np.real(dirichlet_eigenvalues(pot, x)), axis=-1)
    for k in range(pot.genus):
        assert np.all(mu[:, k] >= E[2 * k + 1] - 1e-8)
        assert np.all(mu[:, k] <= E[2 * k + 2] + 1e-8)
    # trace formula u = sum E - 2 sum mu
    np.testing.assert_allclose(potential_u(pot, x), sum(E) - 2 * mu.sum(axis=1), atol=1e-8)


@pytest.mark.parametrize("E", [LEMNISCATIC, GENUS2])
def test_bloch_solves_schrodinger(E):
    pot = cached_potential(E)
    avg = cached_average(E)
    lam = band_energy(E, 1)
    p = point(pot.curve, lam)
    x0 = np.array([0.3, 0.7 * pot.length_scale])
    res = []
    for h in (0.04, 0.02, 0.01):
        xs = x0[:, None] + h * np.arange(-2, 3)
        psi = bloch_psi(pot, avg, xs.ravel(), p).reshape(xs.shape)
        d2 = (-psi[:, 4] + 16 * psi[:, 3] - 30 * psi[:, 2] + 16 * psi[:, 1] - psi[:, 0]) / (12 * h * h)
        res.append(np.max(np.abs(-d2 + (potential_u(pot, x0) - lam) * psi[:, 2])))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders > 1.9)


@pytest.mark.parametrize("E", [LEMNISCATIC, GENUS2])
def test_weyl_function(E):
    pot = cached_potential(E)
    avg = cached_average(E)
    lam = band_energy(E, 1)
    p = point(pot.curve, lam)
    x0 = np.linspace(0.1, 2 * pot.length_scale, 7)
    h = 3e-3
    w = weyl_w(pot, x0, p)
    np.testing.assert_allclose(w, weyl_w(pot, x0, p, route="S"), atol=1e-6)
    stencil = lambda f: (f(x0 - 2 * h) - 8 * f(x0 - h) + 8 * f(x0 + h) - f(x0 + 2 * h)) / (12 * h)
    wx = stencil(lambda x: weyl_w(pot, x, p))
    assert np.max(np.abs(wx + w**2 + lam - potential_u(pot, x0))) < 1e-5
    dlogpsi = stencil(lambda x: np.log(bloch_psi(pot, avg, x, p)))
    np.testing.assert_allclose(dlogpsi, w, atol=1e-6)


def test_bloch_normalisation_periodic():
    pot = cached_potential(LEMNISCATIC)
    avg = cached_average(LEMNISCATIC)
    p = point(pot.curve, band_energy(LEMNISCATIC, 1))
    np.testing.assert_allclose(
        abs(bloch_psi(pot, avg, [0.0], p)[0]) ** 2, abs(S_values(pot, [0.0], p.lam)[0] / avg(p.lam)), rtol=1e-12
    )
    T = pot.period
    x, w = np.polynomial.legendre.leggauss(80)
    x = 0.5 * T * (x + 1)
    mean = np.sum(0.5 * w * np.abs(bloch_psi(pot, avg, x, p)) ** 2)
    assert abs(mean - 1.0) < 1e-8


def test_periodic_average_against_quadrature():
    pot = cached_potential(LEMNISCATIC)
    avg = cached_average(LEMNISCATIC)
    assert avg.mode == "periodic"
    emp = empirical_S_average(pot, pot.period)
    np.testing.assert_allclose(emp, avg.s, atol=1e-6)
    assert avg.s[0] == pytest.approx(-0.45694658, abs=1e-7)


def test_quasimomentum_period_genus_one():
    pot = cached_potential(LEMNISCATIC)
    avg = cached_average(LEMNISCATIC)
    qm = quasimomentum_periods(avg, pot.per, pot.curve)
    target = (1j * math.pi / pot.per.omega_p[0, 0]).real
    assert abs(qm.K[0] - target) < 1e-8
    assert abs(qm.K_direct[0] - target) < 1e-8


def test_quasimomentum_periods_genus_two():
    pot = cached_potential(GENUS2)
    qm = quasimomentum_periods(cached_average(GENUS2), pot.per, pot.curve)
    assert qm.residual < 1e-8
    assert np.all(qm.K > 0)


def test_density_of_states():
    pot = cached_potential(GENUS2)
    avg = cached_average(GENUS2)
    E = np.array(GENUS2)
    xi = np.linspace(E[0], E[-1] + 2, 120)
    n = density_of_states(avg, pot.curve, xi)
    assert n[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(n) >= -1e-10)
    gap = density_of_states(avg, pot.curve, np.linspace(E[1], E[2], 5))
    np.testing.assert_allclose(gap, gap[0], atol=1e-9)
    qm = quasimomentum_periods(avg, pot.per, pot.curve)
    assert gap[0] == pytest.approx(qm.K[0] / (2 * math.pi), abs=1e-8)


def test_density_at_first_gap_is_inverse_period():
    pot = cached_potential(LEMNISCATIC)
    avg = cached_average(LEMNISCATIC)
    n = density_of_states(avg, pot.curve, [0.0])[0]
    assert n == pytest.approx(1.0 / pot.period, abs=1e-9)
    k = quasimomentum(avg, pot.curve, point(pot.curve, 0.0))
    assert k.real == pytest.approx(math.pi / pot.period, abs=1e-9)


def test_windowed_average_error_is_order_inverse_length():
    pot = cached_potential(GENUS2)
    assert not pot.winding.periodic
    est = ergodic_window_estimate(pot, levels=3)
    exact = average_S_ergodic(pot.per).s
    scaled = est.windows[:, None] * np.abs(est.values - exact)
    assert np.max(scaled) < 2.0
    assert np.all(np.abs(est.values[-1] - exact) < np.abs(est.values[0] - exact) + 1e-3)


def test_rational_winding_is_detected():
    # E = (-1, 0, 1) scaled and shifted stays periodic
    pot = make_potential(curve_from_branch_points([1.0, 3.0, 5.0]))
    assert pot.winding.periodic
    assert pot.period == pytest.approx(cached_potential(LEMNISCATIC).period / math.sqrt(2.0), rel=1e-10)
