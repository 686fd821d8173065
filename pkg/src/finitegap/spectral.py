"""Finite-gap Schrodinger operator L = -d^2/dx^2 + u(x) built on the curve.

Along the line h(x) = i x e_g - Omega the Bolza polynomial is
S(x, lambda) = prod (lambda - lambda_k(x)), whose roots are the Dirichlet
eigenvalues.  Since d/dx = i d/du_g, the potential is the trace formula

    u(x) = sum E_i - 2 wp_gg(i x e_g - Omega),

and the Bloch function with Weyl function w = (S_x + i mu) / (2 S) is

    psi(x, P) = sqrt(S(0, lambda) / <S>(lambda))
                * sigma(h(x) + v) sigma(h(0)) / (sigma(h(0) + v) sigma(h(x)))
                * exp(i x (J(P) + c)),

with v = int_infinity^P dh, J(P) = int_{E_{2g+1}}^P dr_g and the constant
c = (eta 1)_g.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .curve import Curve, SurfacePoint
from .errors import ConfigError, SingularHalfPeriod, SingularPeriodMatrix
from .periods import (
    HalfPeriod,
    PeriodData,
    WindingVector,
    abel_map,
    compute_periods,
    half_period_from_support,
    half_period_parity,
    integrals_from_top,
    winding_and_classification,
)
from .sigma import SigmaContext, SigmaJet, log_sigma, sigma_context, zeta_formula_constant

REALITY_TOL = 1e-8


def default_support(g: int) -> tuple:
    """One branch point per finite gap: {2, 4, ..., 2g}."""
    return tuple(range(2, 2 * g + 1, 2))


@dataclass(frozen=True)
class Potential:
    curve: Curve
    per: PeriodData
    sigma_ctx: SigmaContext
    Omega: HalfPeriod
    Omega_p: np.ndarray
    winding: WindingVector

    @property
    def genus(self) -> int:
        return self.curve.genus

    @property
    def period(self) -> float | None:
        return self.winding.period

    @property
    def length_scale(self) -> float:
        """Period when periodic, else 2 pi / max |U_k|."""
        if self.winding.periodic:
            return self.winding.period
        return 2.0 * math.pi / float(np.max(np.abs(self.winding.U)))

    def h(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((len(x), self.genus), dtype=complex)
        out[:, -1] = 1j * x
        return out - self.Omega.Omega

    def jet(self, x) -> SigmaJet:
        return SigmaJet(self.sigma_ctx, self.h(x))


def make_potential(
    curve: Curve,
    support=None,
    per: PeriodData | None = None,
    sigma_ctx: SigmaContext | None = None,
    certify: bool = True,
) -> Potential:
    """Potential for the half-period Omega supported on ``support`` (1-based branch points).

    The certificate checks that the support has one branch point in each gap
    closure (regularity on the real line), that Omega is even, non-singular
    and not purely imaginary, and that u is real on a sample of x.
    """
    per = compute_periods(curve) if per is None else per
    sctx = sigma_context(curve, per) if sigma_ctx is None else sigma_ctx
    g = curve.genus
    support = default_support(g) if support is None else tuple(support)
    if sorted(support) != sorted(set(support)) or len(support) != g or any(
        i not in (2 * k, 2 * k + 1) for k, i in enumerate(sorted(support), start=1)
    ):
        raise SingularHalfPeriod(
            f"support {support} does not put one Dirichlet point in each gap closure [E_2k, E_2k+1]; "
            "the potential would have real poles"
        )
    hp = half_period_from_support(curve, per, support)
    if half_period_parity(hp, sctx.characteristic) != 1:
        raise SingularHalfPeriod(f"half-period with support {support} is odd")
    if np.max(np.abs(hp.Omega.real)) < 1e-12 * curve.scale:
        raise ConfigError(f"half-period with support {support} is purely imaginary")
    if SigmaJet(sctx, hp.Omega, check=False).relative_size < 1e-10:
        raise SingularHalfPeriod(f"sigma vanishes at the half-period with support {support}")
    wv = winding_and_classification(per)
    if wv.periodic:
        Omega_p = per.omega_p @ wv.n.astype(float)
    else:
        e_g = np.zeros(g)
        e_g[-1] = 1.0
        Omega_p = per.omega_p @ e_g
    pot = Potential(curve, per, sctx, hp, Omega_p, wv)
    if certify:
        x = np.linspace(0.0, pot.length_scale, 100)
        vals = pot.jet(x).wp(g, g)
        if not np.all(np.isfinite(vals)) or np.max(np.abs(vals.imag)) > REALITY_TOL * (1 + np.max(np.abs(vals))):
            raise SingularHalfPeriod(f"potential is not real for support {support}")
    return pot


# ---------------------------------------------------------------------------
# potential and Dirichlet data


def _real(vals, what):
    vals = np.asarray(vals)
    if np.max(np.abs(vals.imag), initial=0.0) > REALITY_TOL * (1 + np.max(np.abs(vals))):
        raise SingularHalfPeriod(f"{what} has imaginary part {np.max(np.abs(vals.imag)):.2e}")
    return vals.real


def dirichlet_trace(pot: Potential, x):
    """wp_gg(i x e_g - Omega) = lambda_1(x) + ... + lambda_g(x)."""
    g = pot.genus
    return _real(pot.jet(x).wp(g, g), "wp_gg")


def potential_u(pot: Potential, x):
    """u(x) = sum E_i - 2 wp_gg(i x e_g - Omega)."""
    return float(np.sum(pot.curve.E)) - 2.0 * dirichlet_trace(pot, x)


def S_coefficients(pot: Potential, x, jet: SigmaJet | None = None) -> np.ndarray:
    """Ascending coefficients of S(x, lambda), shape (g+1, N)."""
    g = pot.genus
    jet = pot.jet(x) if jet is None else jet
    rows = [-np.atleast_1d(jet.wp(g, j)) for j in range(1, g + 1)]
    return np.array(rows + [np.ones_like(rows[0])])


def S_values(pot: Potential, x, lam, jet: SigmaJet | None = None):
    """S(x, lambda) for each x (lambda scalar)."""
    co = S_coefficients(pot, x, jet)
    return sum(co[k] * lam**k for k in range(co.shape[0]))


def S_x_values(pot: Potential, x, lam, jet: SigmaJet | None = None):
    """d S / dx = i dP/du_g = -i sum_j wp_{g,g,j} lambda^{j-1}."""
    g = pot.genus
    jet = pot.jet(x) if jet is None else jet
    return -1j * sum(np.atleast_1d(jet.wp(g, g, j)) * lam ** (j - 1) for j in range(1, g + 1))


def dirichlet_eigenvalues(pot: Potential, x) -> np.ndarray:
    """Roots of S(x, .) sorted, shape (N, g)."""
    co = S_coefficients(pot, x)
    roots = [np.sort(np.roots(co[::-1, i]).real) for i in range(co.shape[1])]
    return np.array(roots)


# ---------------------------------------------------------------------------
# averages


@dataclass(frozen=True)
class AveragePolynomial:
    """<S>(lambda) = lambda^g + sum_j s_j lambda^{j-1}."""

    s: np.ndarray
    mode: str

    @property
    def genus(self) -> int:
        return len(self.s)

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.s, [1.0]])

    def __call__(self, lam):
        return np.polynomial.polynomial.polyval(lam, self.coefficients)

    def roots(self) -> np.ndarray:
        return np.sort(np.roots(self.coefficients[::-1]).real)


def _eta_over_omega_p(per: PeriodData) -> np.ndarray:
    if np.linalg.cond(per.omega_p) > 1e12:
        raise SingularPeriodMatrix("omega' is numerically singular")
    return np.linalg.solve(per.omega_p.T, per.eta_p.T).T


def average_S_ergodic(per: PeriodData) -> AveragePolynomial:
    """s_j = det(omega' with row j replaced by eta'_{g,.}) / det(omega') = (eta' omega'^{-1})_{g,j}."""
    M = _eta_over_omega_p(per)
    return AveragePolynomial(_real(M[-1], "ergodic average"), "ergodic")


def average_S_periodic(per: PeriodData) -> AveragePolynomial:
    """s_j = det(rows 1..g-1 of omega'; eta'_{j,.}) / det(omega') = (eta' omega'^{-1})_{j,g}."""
    M = _eta_over_omega_p(per)
    return AveragePolynomial(_real(M[:, -1], "periodic average"), "periodic")


def average_S(pot: Potential) -> AveragePolynomial:
    return average_S_periodic(pot.per) if pot.winding.periodic else average_S_ergodic(pot.per)


def empirical_average(f, L: float, n_samples: int = 2048, nodes: int = 16):
    """(1/L) int_0^L f(x) dx by composite Gauss-Legendre; ``f`` maps an x array to values."""
    panels = max(1, int(math.ceil(n_samples / nodes)))
    edges = np.linspace(0.0, L, panels + 1)
    x, w = quad._nodes(edges[:-1], edges[1:], nodes)
    vals = np.asarray(f(x.ravel()))
    vals = vals.reshape(vals.shape[:-1] + x.shape)
    return np.sum(vals * w, axis=(-2, -1)) / L


def empirical_S_average(pot: Potential, L: float, n_samples: int | None = None) -> np.ndarray:
    """Windowed average of the coefficients s_j = -<wp_{g,j}> over [0, L]."""
    g = pot.genus
    if n_samples is None:
        n_samples = int(64 * L / pot.length_scale * g) + 256

    def f(x):
        jet = pot.jet(x)
        return np.array([-jet.wp(g, j) for j in range(1, g + 1)])

    return _real(empirical_average(f, L, n_samples), "empirical average")


@dataclass(frozen=True)
class WindowedEstimate:
    windows: np.ndarray
    values: np.ndarray  # (levels, g)
    estimate: np.ndarray
    error_bar: np.ndarray
    scaled_errors: np.ndarray  # L_k |A_k - A_last|, bounded when the error is O(1/L)


def ergodic_window_estimate(pot: Potential, L0: float | None = None, levels: int = 5) -> WindowedEstimate:
    """Averages over doubling windows with an O(1/L) error bar for the largest one."""
    L0 = 25.0 * pot.length_scale if L0 is None else L0
    Ls = L0 * 2.0 ** np.arange(levels)
    vals = np.array([empirical_S_average(pot, L) for L in Ls])
    scaled = Ls[:-1, None] * np.abs(vals[:-1] - vals[-1])
    bound = np.max(scaled, axis=0)
    return WindowedEstimate(Ls, vals, vals[-1], 2.0 * bound / Ls[-1], scaled)


# ---------------------------------------------------------------------------
# Bloch and Weyl functions


@dataclass(frozen=True)
class BlochData:
    """Point-dependent ingredients of the Bloch function at P."""

    point: SurfacePoint
    v: np.ndarray  # int_infinity^P dh
    J: complex  # int_{E_{2g+1}}^P dr_g
    c: complex  # (eta 1)_g
    Ir: np.ndarray  # int_{E_{2g+1}}^P dr (all g components)


def bloch_data(pot: Potential, p: SurfacePoint) -> BlochData:
    curve = pot.curve
    Ir = integrals_from_top(curve, curve.meromorphic_numerators(), p)
    return BlochData(p, abel_map(curve, pot.per, p), complex(Ir[-1]), -zeta_formula_constant(pot.sigma_ctx), Ir)


def bloch_psi(pot: Potential, avg: AveragePolynomial, x, p: SurfacePoint, data: BlochData | None = None):
    """Normalised Bloch function psi(x, P) for an array of x."""
    d = bloch_data(pot, p) if data is None else data
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ctx = pot.sigma_ctx
    h = pot.h(x)
    h0 = pot.h([0.0])
    ls = log_sigma(h + d.v, ctx) - log_sigma(h, ctx)
    ls0 = log_sigma(h0 + d.v, ctx) - log_sigma(h0, ctx)
    S0 = S_values(pot, [0.0], p.lam)[0]
    norm = np.sqrt(S0 / avg(p.lam))
    return norm * np.exp(ls - ls0 + 1j * x * (d.J + d.c))


def weyl_w(pot: Potential, x, p: SurfacePoint, route: str = "zeta", data: BlochData | None = None):
    """Weyl function w = d/dx log psi.

    ``route="zeta"``: i (zeta_g(h + v) - zeta_g(h) + J + c);
    ``route="S"``: (S_x + i mu) / (2 S).
    """
    g = pot.genus
    if route == "S":
        jet = pot.jet(x)
        S = S_values(pot, x, p.lam, jet)
        return (S_x_values(pot, x, p.lam, jet) + 1j * p.mu) / (2.0 * S)
    if route != "zeta":
        raise ValueError("route must be 'zeta' or 'S'")
    d = bloch_data(pot, p) if data is None else data
    h = pot.h(x)
    zp = SigmaJet(pot.sigma_ctx, h + d.v).zeta(g)
    z0 = SigmaJet(pot.sigma_ctx, h).zeta(g)
    return 1j * (zp - z0 + d.J + d.c)


# ---------------------------------------------------------------------------
# quasi-momentum


def quasimomentum(avg: AveragePolynomial, curve: Curve, p: SurfacePoint, p0: SurfacePoint | None = None) -> complex:
    """k(P) = int_{P0}^P <S>/mu dlambda; P0 defaults to (E_1, 0)."""
    nums = avg.coefficients[None, :]
    k = complex(integrals_from_top(curve, nums, p)[0])
    p0 = SurfacePoint(complex(curve.E[0]), 0j) if p0 is None else p0
    return k - complex(integrals_from_top(curve, nums, p0)[0])


def density_of_states(avg: AveragePolynomial, curve: Curve, xi) -> np.ndarray:
    """n(xi) = k(xi + i0) / pi with k(E_1) = 0; constant across gaps."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    nums = avg.coefficients[None, :]
    k = quad_cut(curve, nums, xi) - quad_cut(curve, nums, np.array([curve.E[0]]))[0]
    return k.real / np.pi


def quad_cut(curve: Curve, nums, xi) -> np.ndarray:
    from .periods import cut_integrals_from_top

    return cut_integrals_from_top(curve, nums, xi)[0]


@dataclass(frozen=True)
class QuasiMomentumData:
    K: np.ndarray  # matrix formula
    K_direct: np.ndarray  # 2 int_band <S>/mu_+ dlambda

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.K - self.K_direct)))


def band_integral(curve: Curve, nums, n: int, nodes: int = 200) -> complex:
    """int over band n (1-based, finite bands) of num / mu_+ dlambda."""
    return complex(quad.segment_integral(curve.E, nums, 2 * (n - 1), 0.0, np.pi, 1, nodes)[0])


def quasimomentum_periods(avg: AveragePolynomial, per: PeriodData, curve: Curve) -> QuasiMomentumData:
    """K = 2 omega^T (2 kappa_{g,.} - s), cross-checked by band quadrature.

    The orientation makes K_n twice the quasi-momentum gained across band n
    (positive); for g = 1 it equals i pi / omega'.
    """
    g = per.genus
    K = 2.0 * per.omega.T @ (2.0 * per.kappa[g - 1] - avg.s)
    nums = avg.coefficients[None, :]
    direct = np.array([2.0 * band_integral(curve, nums, n) for n in range(1, g + 1)])
    return QuasiMomentumData(_real(K, "K"), _real(direct, "K (direct)"))
