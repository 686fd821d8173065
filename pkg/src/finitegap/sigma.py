"""Kleinian sigma, zeta and wp functions of a hyperelliptic curve.

sigma(u) = C exp(u^T kappa u) theta[eps]((2 omega)^{-1} u; tau),  kappa = eta (2 omega)^{-1}.

The half-integer characteristic ``eps`` encodes the vector of Riemann
constants with base point at infinity.  It is found by searching all
characteristics for the one whose theta function vanishes on the Abel image
of (g-1)-point divisors, where sigma must vanish.  The constant ``C`` is
fixed by the small-argument normalisation on the Abel image of the curve:
sigma_I(v)^2 = xi^{2g}(1 + O(xi^2)) with lambda = xi^{-2}.

Derivatives are exact: they are moments of the theta lattice sum (see
``theta.ThetaJet``).  Indices in the public API are 1-based, as in
``zeta(u, ctx, i)`` with i = 1..g.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import quadrature as quad
from .curve import Curve, SurfacePoint, point
from .errors import NearDivisor, RootFindingFailure
from .periods import PeriodData, abel_map, compute_periods
from .theta import ThetaContext, ThetaJet, moments_from_cumulants

NEAR_DIVISOR = 1e-12


def onishi_multi_index(g: int) -> tuple:
    """1-based multi-index I with sigma_I nonzero at the origin of the curve image."""
    return tuple(range(2, 2 * (g // 2) + 1, 2))


def _schur_sign(g: int) -> float:
    # leading Schur-Weierstrass term: g=1 sigma ~ u_1, g=2 sigma ~ u_1 - u_2^3/3
    return -1.0 if g == 2 else 1.0


@dataclass(frozen=True)
class SigmaContext:
    curve: Curve
    per: PeriodData
    theta_ctx: ThetaContext
    characteristic: tuple
    constant: complex
    multi_index: tuple
    riemann_constant: np.ndarray = field(repr=False)
    modular_prefactor: complex = field(repr=False)

    @property
    def genus(self) -> int:
        return self.curve.genus

    @property
    def A(self) -> np.ndarray:
        return np.linalg.inv(2.0 * self.per.omega)

    @property
    def kappa(self) -> np.ndarray:
        return self.per.kappa


def _random_point(curve: Curve, rng) -> SurfacePoint:
    c = 0.5 * (curve.E[0] + curve.E[-1])
    lam = c + curve.scale * (rng.uniform(-0.6, 0.6) + 1j * rng.uniform(0.1, 0.5) * rng.choice([-1, 1]))
    return point(curve, lam, sheet=int(rng.choice([-1, 1])))


def _all_characteristics(g: int):
    halves = list(itertools.product((0.0, 0.5), repeat=g))
    for a in halves:
        for b in halves:
            yield np.array(a), np.array(b)


def find_characteristic(curve: Curve, per: PeriodData, tctx: ThetaContext, trials: int = 3, seed: int = 7):
    """Characteristic [a, b] whose theta vanishes on (g-1)-point Abel sums.

    Returns ``(a, b, score)`` with ``score`` the worst relative size of the
    lattice sum over the test divisors.
    """
    g = curve.genus
    A = np.linalg.inv(2.0 * per.omega)
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(trials):
        v = np.zeros(g, dtype=complex)
        for _ in range(g - 1):
            v = v + abel_map(curve, per, _random_point(curve, rng))
        pts.append(v)
    z = np.array(pts) @ A.T
    best = None
    scores = []
    for a, b in _all_characteristics(g):
        if g == 1 and not (a[0] and b[0]):
            scores.append(1.0)
            continue
        jet = ThetaJet(tctx, z, A, (a, b))
        s = float(np.max(jet.relative_size))
        scores.append(s)
        if best is None or s < best[2]:
            best = (a, b, s)
    if best[2] > 1e-8 or sum(s < 1e-8 for s in scores) != 1:
        raise NearDivisor("no unique vanishing characteristic found")
    return best


def _unit_sigma_I(ctx_like, u):
    """sigma_I(u) / C for a batch u (rows)."""
    return sigma_derivative(u, ctx_like, ctx_like.multi_index, normalised=False)


def sigma_context(curve: Curve, per: PeriodData | None = None, target_tol: float = 1e-16) -> SigmaContext:
    per = compute_periods(curve) if per is None else per
    g = curve.genus
    tctx = ThetaContext(per.tau, target_tol=target_tol)
    a, b, _ = find_characteristic(curve, per, tctx)
    K = 2.0 * per.omega @ b + 2.0 * per.omega_p @ a
    E = curve.E
    prod = np.prod([E[i] - E[j] for i in range(len(E)) for j in range(i + 1, len(E))])
    pref = np.sqrt(np.pi**g / np.linalg.det(2.0 * per.omega) + 0j) * (prod + 0j) ** 0.25
    ctx = SigmaContext(curve, per, tctx, (a, b), 1.0, onishi_multi_index(g), K, complex(pref))
    limit = calibration_limit(ctx)
    C = _schur_sign(g) / limit
    return SigmaContext(curve, per, tctx, (a, b), complex(C), ctx.multi_index, K, complex(pref))


def curve_image_near_infinity(curve: Curve, xi: float) -> np.ndarray:
    """v(xi) = int_infinity^P dh for P = (xi^{-2}, mu > 0)."""
    H = curve.holomorphic_numerators()[:, : curve.genus]
    return -quad.far_integral(curve.E, H, 1.0 / xi**2)


def calibration_limit(ctx: SigmaContext, xis=(0.04, 0.02, 0.01, 0.005)) -> complex:
    """lim sigma_I(v(xi)) / (C v_g(xi)^g) as xi -> 0, by extrapolation in xi^2."""
    g = ctx.genus
    vals = []
    for xi in xis:
        v = curve_image_near_infinity(ctx.curve, xi)
        vals.append(complex(_unit_sigma_I(ctx, v[None, :])[0] / v[-1] ** g))
    x = np.array(xis) ** 2
    # polynomial fit in xi^2 evaluated at zero (Neville)
    coef = np.polyfit(x, np.array(vals), len(x) - 1)
    return complex(coef[-1])


class SigmaJet:
    """sigma and its derivatives at a batch of arguments ``u`` (shape (N, g) or (g,)).

    Multi-indices are 1-based.  ``check`` enables the near-divisor guard for
    logarithmic derivatives.
    """

    def __init__(self, ctx: SigmaContext, u, check: bool = True):
        u = np.asarray(u, dtype=complex)
        self.single = u.ndim == 1
        self.u = np.atleast_2d(u)
        self.ctx = ctx
        self.check = check
        A = ctx.A
        self.theta = ThetaJet(ctx.theta_ctx, self.u @ A.T, A, ctx.characteristic)
        kap = ctx.kappa
        self.Q = np.einsum("ni,ij,nj->n", self.u, kap, self.u)
        self.Qgrad = 2.0 * self.u @ kap.T

    def _out(self, val):
        val = np.broadcast_to(val, (self.u.shape[0],))
        return val[0] if self.single else np.array(val)

    def _q_cumulant(self, multi0):
        if len(multi0) == 1:
            return self.Qgrad[:, multi0[0]]
        if len(multi0) == 2:
            return 2.0 * self.ctx.kappa[multi0[0], multi0[1]]
        return 0.0

    @property
    def log_sigma(self):
        return self._out(np.log(self.ctx.constant) + self.Q + self.theta.log_value)

    @property
    def relative_size(self):
        return self._out(self.theta.relative_size)

    def value(self):
        return self._out(self.ctx.constant * np.exp(self.Q + self.theta.shift) * self.theta.S)

    def derivative(self, multi):
        """Raw partial derivative of sigma."""
        m0 = tuple(int(i) - 1 for i in multi)
        n = len(m0)
        total = 0.0
        for r in range(n + 1):
            for sub in itertools.combinations(range(n), r):
                rest = tuple(m0[i] for i in range(n) if i not in sub)
                mq = moments_from_cumulants(self._q_cumulant, rest) if rest else 1.0
                total = total + mq * self.theta.derivative(tuple(m0[i] for i in sub))
        return self._out(self.ctx.constant * np.exp(self.Q + self.theta.shift) * total)

    def log_derivative(self, multi):
        m0 = tuple(int(i) - 1 for i in multi)
        if self.check and np.any(self.theta.relative_size < NEAR_DIVISOR):
            raise NearDivisor("argument lies on (or too close to) the sigma divisor")
        val = self.theta.log_derivative(m0)
        if 1 <= len(m0) <= 2:
            val = val + self._q_cumulant(m0)
        return self._out(val)

    def zeta(self, i):
        return self.log_derivative((i,))

    def wp(self, *multi):
        if len(multi) < 2:
            raise ValueError("wp needs at least two indices")
        return -self.log_derivative(multi)


def sigma(u, ctx: SigmaContext):
    return SigmaJet(ctx, u, check=False).value()


def log_sigma(u, ctx: SigmaContext):
    return SigmaJet(ctx, u, check=False).log_sigma


def sigma_derivative(u, ctx: SigmaContext, multi, normalised: bool = True):
    val = SigmaJet(ctx, u, check=False).derivative(multi)
    return val if normalised else val / ctx.constant


def sigma_I(u, ctx: SigmaContext):
    """Derivative of sigma along the multi-index of ``onishi_multi_index``."""
    return sigma_derivative(u, ctx, ctx.multi_index)


def zeta(u, ctx: SigmaContext, i: int):
    return SigmaJet(ctx, u).zeta(i)


def wp(u, ctx: SigmaContext, multi):
    return SigmaJet(ctx, u).wp(*multi)


# ---------------------------------------------------------------------------
# Bolza polynomial and Jacobi inversion


def bolza_coefficients(u, ctx: SigmaContext, jet: SigmaJet | None = None) -> np.ndarray:
    """Ascending coefficients of P(lambda, u) = lambda^g - sum_j wp_{g,j}(u) lambda^{j-1}."""
    g = ctx.genus
    jet = SigmaJet(ctx, u) if jet is None else jet
    c = [-jet.wp(g, j) for j in range(1, g + 1)]
    return np.array(c + [np.ones_like(c[0])])


def bolza_polynomial(lam, u, ctx: SigmaContext) -> complex:
    return np.polynomial.polynomial.polyval(lam, bolza_coefficients(u, ctx))


def bolza_derivative_g(lam, jet: SigmaJet, g: int):
    """d P(lambda, u) / d u_g = -sum_j wp_{g,g,j} lambda^{j-1}."""
    return -sum(jet.wp(g, g, j) * lam ** (j - 1) for j in range(1, g + 1))


def jacobi_inversion(u, ctx: SigmaContext) -> list:
    """Divisor {(lambda_k, mu_k)} whose Abel sum is u (modulo periods)."""
    u = np.asarray(u, dtype=complex)
    g = ctx.genus
    jet = SigmaJet(ctx, u)
    coef = bolza_coefficients(u, ctx, jet)
    roots = np.roots(coef[::-1])
    if len(roots) != g or not np.all(np.isfinite(roots)):
        raise RootFindingFailure("Bolza polynomial roots are not finite")
    return [SurfacePoint(complex(r), complex(-bolza_derivative_g(r, jet, g))) for r in roots]


# ---------------------------------------------------------------------------
# identity suite


def _rel(a, b):
    return abs(a - b) / (1.0 + abs(b))


def divadd_residual(u, p: SurfacePoint, ctx: SigmaContext) -> float:
    """sigma(u-v)sigma(u+v) / (sigma_I(v)^2 sigma(u)^2) against P(lambda, u), v = A(P)."""
    v = abel_map(ctx.curve, ctx.per, p)
    u = np.asarray(u, dtype=complex)
    jet = SigmaJet(ctx, np.array([u - v, u + v, u]), check=False)
    ls = jet.log_sigma
    sI = sigma_I(v, ctx)
    lhs = np.exp(ls[0] + ls[1] - 2 * ls[2]) / sI**2
    return _rel(lhs, bolza_polynomial(p.lam, u, ctx))


def rel22_residual(p: SurfacePoint, ctx: SigmaContext, hp) -> float:
    """sigma(v - Omega)^2 / sigma_I(v)^2 against sigma(Omega)^2 exp(-2 Delta^T v) prod (lambda - E_i).

    Follows from the point+divisor addition theorem at u = Omega together with
    sigma(v + Omega) = +/- exp(2 Delta^T v) sigma(v - Omega).
    """
    v = abel_map(ctx.curve, ctx.per, p)
    lhs = sigma(v - hp.Omega, ctx) ** 2 / sigma_I(v, ctx) ** 2
    E = ctx.curve.E
    rhs = sigma(hp.Omega, ctx) ** 2 * np.exp(-2.0 * hp.Delta @ v)
    rhs = rhs * np.prod([p.lam - E[i - 1] for i in hp.support])
    return _rel(lhs, rhs)


def zeta_addition_check(u, p: SurfacePoint, ctx: SigmaContext) -> float:
    """Residual of the zeta formula for the point P and generic u.

    The left side carries the constant -(eta 1)_g, the value of the
    second-kind integral at the base image A(E_{2g+1}) = -omega 1, so that
    both sides agree as P -> infinity.
    """
    from .periods import integrals_from_top

    g = ctx.genus
    u = np.asarray(u, dtype=complex)
    v = abel_map(ctx.curve, ctx.per, p)
    num = np.zeros((1, g + 1))
    num[0, g] = 1.0
    J = complex(integrals_from_top(ctx.curve, num, p)[0])
    jet = SigmaJet(ctx, u)
    Pval = np.polynomial.polynomial.polyval(p.lam, bolza_coefficients(u, ctx, jet))
    lhs = zeta_formula_constant(ctx) - J + 0.5 * p.mu / Pval + 0.5 * bolza_derivative_g(p.lam, jet, g) / Pval
    rhs = zeta(u + v, ctx, g) - jet.zeta(g)
    return _rel(lhs, rhs)


def zeta_formula_constant(ctx: SigmaContext) -> complex:
    """(2 eta n)_g for A(E_{2g+1}) = 2 omega n, i.e. -(eta 1)_g."""
    g = ctx.genus
    base = abel_map(ctx.curve, ctx.per, SurfacePoint(complex(ctx.curve.E[-1]), 0j))
    n, m = ctx.per.lattice_coordinates(base)
    return complex(ctx.per.eta_vector(np.round(2 * n) / 2, np.round(2 * m) / 2)[g - 1])


def jacobian_relations_check(u, ctx: SigmaContext) -> dict:
    """Residuals of the quadratic relations between wp_{ggi} and wp_{ik} and of the KdV-type relations."""
    g = ctx.genus
    a = ctx.curve.alpha
    jet = SigmaJet(ctx, u)
    cache = {}

    def p(*idx):
        if any(i < 1 or i > g for i in idx):
            return 0.0
        key = tuple(sorted(idx))
        if key not in cache:
            cache[key] = jet.wp(*key)
        return cache[key]

    def d(i, k):
        return 1.0 if i == k else 0.0

    def al(k):
        return a[k] if 0 <= k < len(a) else 0.0

    prod = np.zeros((g, g))
    for i in range(1, g + 1):
        for k in range(1, g + 1):
            c = al(2 * i - 2) * d(i, k) + 0.5 * (al(2 * i - 1) * d(k, i + 1) + al(2 * k - 1) * d(i, k + 1))
            rhs = (
                4 * p(g, g) * p(g, i) * p(g, k)
                - 2 * (p(g, i) * p(g - 1, k) + p(g, k) * p(g - 1, i))
                + 4 * (p(g, k) * p(g, i - 1) + p(g, i) * p(g, k - 1))
                + 4 * p(k - 1, i - 1)
                - 2 * (p(k, i - 2) + p(i, k - 2))
                + al(2 * g) * p(g, k) * p(g, i)
                + 0.5 * al(2 * g - 1) * (d(i, g) * p(k, g) + d(k, g) * p(i, g))
                + c
            )
            prod[i - 1, k - 1] = _rel(p(g, g, i) * p(g, g, k), rhs)
    kdv = np.zeros(g)
    for i in range(1, g + 1):
        rhs = (6 * p(g, g) + al(2 * g)) * p(g, i) + 6 * p(g, i - 1) - 2 * p(g - 1, i) + 0.5 * d(g, i) * al(2 * g - 1)
        kdv[i - 1] = _rel(p(g, g, g, i), rhs)
    return {"product3": prod, "kdv": kdv}


def quasi_periodicity_residual(u, ctx: SigmaContext, n, m) -> float:
    """sigma(u + 2 omega n + 2 omega' m) / sigma(u) against its exponential factor.

    The factor carries the sign (-1)^{2(a.n - b.m) + n.m} fixed by the
    characteristic [a, b]; for g = 1 this is the familiar sigma(u + 2 omega) = -exp(...) sigma(u).
    """
    per = ctx.per
    u = np.asarray(u, dtype=complex)
    shift = per.lattice_vector(n, m)
    D = per.eta_vector(n, m)
    diff = log_sigma(u + shift, ctx) - log_sigma(u, ctx)
    a, b = ctx.characteristic
    sign = (-1.0) ** int(round(2 * (a @ np.asarray(n) - b @ np.asarray(m)) + np.asarray(n) @ np.asarray(m)))
    r = diff - D @ (u + 0.5 * shift)
    return abs(sign * np.exp(r) - 1.0)


# ---------------------------------------------------------------------------
# finite-difference cross-check


def log_sigma_fd(u, ctx: SigmaContext, multi, step: float | None = None) -> complex:
    """Central-difference derivative of log sigma, one Richardson step (order 4)."""
    u = np.asarray(u, dtype=complex)
    if step is None:
        step = 1e-2 * float(np.max(np.abs(ctx.per.omega)))
    m0 = [int(i) - 1 for i in multi]

    def central(h):
        k = len(m0)
        total = 0.0
        for signs in itertools.product((1, -1), repeat=k):
            du = np.zeros_like(u)
            for s, i in zip(signs, m0):
                du[i] += s * h
            total = total + np.prod(signs) * log_sigma(u + du, ctx)
        return total / (2 * h) ** k

    return (4 * central(0.5 * step) - central(step)) / 3


def wp_axis_derivatives(u, ctx: SigmaContext, i: int, nmax: int):
    """[wp_{i..i} with k indices for k = 2..nmax] (1-based axis i), fast path for repeated indices."""
    jet = SigmaJet(ctx, u)
    if np.any(jet.theta.relative_size < NEAR_DIVISOR):
        raise NearDivisor("argument lies on (or too close to) the sigma divisor")
    kap = jet.theta.axis_log_derivatives(i - 1, nmax)
    out = []
    for k in range(2, nmax + 1):
        val = kap[k - 1]
        if k == 2:
            val = val + 2.0 * ctx.kappa[i - 1, i - 1]
        out.append(jet._out(-val))
    return out


def base_eta_vector(ctx: SigmaContext) -> np.ndarray:
    """2 eta n for A(E_{2g+1}) = 2 omega n (equals -eta 1)."""
    base = abel_map(ctx.curve, ctx.per, SurfacePoint(complex(ctx.curve.E[-1]), 0j))
    n, m = ctx.per.lattice_coordinates(base)
    return ctx.per.eta_vector(np.round(2 * n) / 2, np.round(2 * m) / 2)
