"""Wannier functions of a band of the finite-gap operator.

For band n = [E_{2n-1}, E_{2n}] the Wannier function is the normalised
a-cycle integral of the Bloch function against the quasi-momentum,

    W_n(x) = K_n^{-1/2} oint_{a_n} psi(x, P) dK,   dK = <S> dlambda / mu,

traversed in the direction that makes K_n positive.  Both banks of the band
contribute, the lower one through the involution P -> P*, so

    W_n(x) = K_n^{-1/2} int_band (psi(x, P+) + psi(x, P-)) <S> / mu_+ dlambda.

At x = 0 the Bloch normalisation turns the integrand into a differential of
the reciprocal curve mu#^2 = 4 <S>(lambda) prod_{i not in I} (lambda - E_i),
where I is the support of the half-period Omega, and the Taylor coefficients
of W_n are moments of that differential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from .curve import Curve, SurfacePoint
from .errors import ConfigError, NoSaddle
from .periods import abel_base, cut_integrals_from_top
from .sigma import base_eta_vector, log_sigma, wp_axis_derivatives
from .spectral import (
    AveragePolynomial,
    Potential,
    S_coefficients,
    average_S,
    quasimomentum_periods,
)

IMAG_TOL = 1e-7
BATCH = 8192  # sigma evaluations per block


def _check_band(pot: Potential, n: int) -> None:
    if not 1 <= int(n) <= pot.genus:
        raise ConfigError(f"band index {n} outside 1..{pot.genus}")
    check_support(pot, n)


def wannier_support(g: int, n: int) -> tuple:
    """Half-period support giving single-valued Bloch normalisation on a_n.

    One branch point per gap closure [E_{2k}, E_{2k+1}], avoiding both edges
    of band n: E_{2k} left of the band, E_{2k+1} right of it.
    """
    return tuple(2 * k if k < n else 2 * k + 1 for k in range(1, g + 1))


def check_support(pot: Potential, n: int) -> None:
    """Require that neither edge of band n lies in the support of Omega.

    An edge E_i in the support is a Dirichlet point at x = 0; there
    sqrt(S(0,.)/<S>) changes sign around E_i while the Bloch function does
    not, so the banks no longer join into a smooth closed-cycle integrand.
    """
    sup = set(pot.Omega.support)
    if {2 * n - 1, 2 * n} & sup:
        raise ConfigError(
            f"support {tuple(pot.Omega.support)} contains an edge of band {n}; "
            f"use {wannier_support(pot.genus, n)}"
        )


def band_edges(curve: Curve, n: int) -> tuple[float, float]:
    E = curve.E
    return float(E[2 * n - 2]), float(E[2 * n - 1])


def band_width_K(pot: Potential, n: int, avg: AveragePolynomial | None = None) -> float:
    """Quasi-momentum width K_n of band n (positive)."""
    avg = average_S(pot) if avg is None else avg
    return float(quasimomentum_periods(avg, pot.per, pot.curve).K[n - 1])


# ---------------------------------------------------------------------------
# reciprocal curve


@dataclass(frozen=True)
class ReciprocalCurve:
    """mu#^2 = 4 <S>(lambda) prod_{i not in I} (lambda - E_i)."""

    avg: AveragePolynomial
    complement: np.ndarray  # E_i with i not in the support of Omega
    support_points: np.ndarray  # E_i with i in the support

    @property
    def branch_points(self) -> np.ndarray:
        return np.sort(np.concatenate([self.avg.roots(), self.complement]))

    def R(self, lam):
        lam = np.asarray(lam, dtype=complex)
        out = 4.0 * self.avg(lam)
        for e in self.complement:
            out = out * (lam - e)
        return out

    def R_coefficients(self) -> np.ndarray:
        """Ascending coefficients of R#."""
        co = 4.0 * self.avg.coefficients
        for e in self.complement:
            co = np.polynomial.polynomial.polymul(co, [-e, 1.0])
        return co

    def moment_density(self, lam):
        """sqrt(<S> / prod_{i not in I}(lambda - E_i)) = 2 <S> / mu#, positive on bands."""
        lam = np.asarray(lam, dtype=float)
        r = self.avg(lam)
        for e in self.complement:
            r = r / (lam - e)
        return np.sqrt(np.abs(r))


def reciprocal_curve(pot: Potential, avg: AveragePolynomial | None = None) -> ReciprocalCurve:
    avg = average_S(pot) if avg is None else avg
    E = pot.curve.E
    sup = np.array(pot.Omega.support, dtype=int) - 1
    mask = np.ones(len(E), dtype=bool)
    mask[sup] = False
    return ReciprocalCurve(avg, E[mask], E[~mask])


# ---------------------------------------------------------------------------
# moments


def _band_nodes(curve: Curve, n: int, nodes: int):
    a, b = band_edges(curve, n)
    c, d = 0.5 * (a + b), 0.5 * (b - a)
    t, w = quad.gauss_legendre(nodes)
    t = 0.5 * np.pi * (t + 1.0)
    w = 0.5 * np.pi * w
    return t, w, c - d * np.cos(t), c, d


def moments(
    pot: Potential, n: int, kmax: int, avg: AveragePolynomial | None = None, nodes: int = 200
) -> np.ndarray:
    """M_k = K_n^{-1/2} oint_{a_n} lambda^k <S> dlambda / mu#, k = 0..kmax.

    On the band this is K_n^{-1/2} int_band lambda^k sqrt(<S> / prod_{i not in I}
    (lambda - E_i)) dlambda with the positive root; with this normalisation
    W_n(0) = M_0.
    """
    _check_band(pot, n)
    avg = average_S(pot) if avg is None else avg
    rc = reciprocal_curve(pot, avg)
    a, b = band_edges(pot.curve, n)
    t, w, lam, c, d = _band_nodes(pot.curve, n, nodes)
    # the inverse square roots at the band edges are taken out analytically
    dens = avg(lam)
    jac = d * np.sin(t)
    for e in rc.complement:
        if e == a:
            jac = jac / (math.sqrt(2.0 * d) * np.sin(0.5 * t))
        elif e == b:
            jac = jac / (math.sqrt(2.0 * d) * np.cos(0.5 * t))
        else:
            dens = dens / (lam - e)
    f = np.sqrt(np.abs(dens)) * jac
    K = band_width_K(pot, n, avg)
    return np.array([np.sum(w * f * lam**k) for k in range(kmax + 1)]) / math.sqrt(K)



def reciprocal_basis_integrals(pot: Potential, n: int, avg: AveragePolynomial, nodes: int = 200) -> np.ndarray:
    """int_band lambda^j dlambda / mu# for j = 0..2g-1 (periods of dh# and dr#), mu# = 2 <S> / density."""
    g = pot.genus
    rc = reciprocal_curve(pot, avg)
    a, b = band_edges(pot.curve, n)
    t, w, lam, c, d = _band_nodes(pot.curve, n, nodes)
    dens = np.ones_like(lam)
    jac = d * np.sin(t)
    for e in rc.complement:
        if e == a:
            jac = jac / (math.sqrt(2.0 * d) * np.sin(0.5 * t))
        elif e == b:
            jac = jac / (math.sqrt(2.0 * d) * np.cos(0.5 * t))
        else:
            dens = dens / (lam - e)
    S = avg(lam)
    f = np.sqrt(np.abs(S * dens)) * jac / (2.0 * S)
    return np.array([np.sum(w * f * lam**j) for j in range(2 * g)])


def reduce_to_basis(poly: np.ndarray, R_coeffs: np.ndarray) -> np.ndarray:
    """Reduce q(lambda) dlambda / mu# modulo exact differentials d(lambda^m mu#).

    d(lambda^m mu#) = (m lambda^{m-1} R# + lambda^m R#' / 2) dlambda / mu#, degree m + 2g;
    returns the coefficients of the remainder of degree < 2g.
    """
    P = np.polynomial.polynomial
    q = np.array(poly, dtype=complex)
    top = len(R_coeffs) - 1  # 2g + 1
    dR = P.polyder(R_coeffs)
    while len(q) > top - 1:
        m = len(q) - top  # degree(q) = m + 2g
        exact = P.polyadd(P.polymul(P.polyder(np.r_[np.zeros(m), 1.0]), R_coeffs), 0.5 * P.polymul(np.r_[np.zeros(m), 1.0], dR))
        exact = np.pad(exact, (0, len(q) - len(exact)))
        q = (q - (q[-1] / exact[-1]) * exact)[:-1]
    return np.pad(q, (0, top - 1 - len(q)))


def moment_by_reduction(pot: Potential, n: int, k: int, avg: AveragePolynomial | None = None) -> complex:
    """M_k through the 2g reciprocal periods; both band edges are zeros of mu# so no boundary terms."""
    _check_band(pot, n)
    avg = average_S(pot) if avg is None else avg
    rc = reciprocal_curve(pot, avg)
    poly = np.polynomial.polynomial.polymul(np.r_[np.zeros(k), 1.0], avg.coefficients)
    rem = reduce_to_basis(2.0 * poly, rc.R_coefficients())
    basis = reciprocal_basis_integrals(pot, n, avg)
    return complex(rem @ basis) / math.sqrt(band_width_K(pot, n, avg))

# ---------------------------------------------------------------------------
# direct integration


@dataclass(frozen=True)
class BandBloch:
    """Bloch data at quadrature nodes on the upper bank of a band."""

    t: np.ndarray
    weights: np.ndarray  # quadrature weight times <S> / mu_+ dlambda/dt
    lam: np.ndarray
    v: np.ndarray  # (N, g) Abel images of the upper-bank points
    Ir: np.ndarray  # (N, g) int_{E_{2g+1}}^P dr
    norm: np.ndarray  # sqrt(S(0, lambda) / <S>(lambda))


def band_bloch_data(pot: Potential, n: int, avg: AveragePolynomial, nodes: int) -> BandBloch:
    curve = pot.curve
    t, w, lam, c, d = _band_nodes(curve, n, nodes)
    j = 2 * n - 2
    dk = avg(lam) / (2.0 * quad._segment_rest(curve.E, j, lam, 1))
    H = curve.holomorphic_numerators()
    v = abel_base(curve)[None, :] + cut_integrals_from_top(curve, H, lam).T
    Ir = cut_integrals_from_top(curve, curve.meromorphic_numerators(), lam).T
    S0 = np.polynomial.polynomial.polyval(lam, S_coefficients(pot, [0.0])[:, 0])
    norm = np.sqrt((S0 / avg(lam)).real + 0j)
    return BandBloch(t, w * dk, lam, v, Ir, norm)


def _psi_banks(pot: Potential, data: BandBloch, x, shift=None, phase=None):
    """psi(x, P+) and psi(x, P-) on the nodes; shape (Nx, N) each.

    ``shift`` replaces h(x) by h(x) - shift and ``phase`` (per bank) multiplies
    by exp(-phase); both are used by the translated functions.
    """
    ctx = pot.sigma_ctx
    g = pot.genus
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = pot.h(x) if shift is None else pot.h(x) - shift
    h0 = pot.h([0.0])
    c = -base_eta_vector(ctx)
    base = abel_base(pot.curve)
    out = []
    for sgn in (1, -1):
        v = data.v if sgn == 1 else 2.0 * base[None, :] - data.v
        J = sgn * data.Ir[:, -1]
        arg = (h[:, None, :] + v[None, :, :]).reshape(-1, g)
        ls = log_sigma(arg, ctx).reshape(len(x), -1) - log_sigma(h, ctx)[:, None]
        ls0 = log_sigma(h0 + v, ctx) - log_sigma(h0, ctx)[0]
        expo = ls - ls0[None, :] + 1j * x[:, None] * (J + c[-1])[None, :]
        if phase is not None:
            expo = expo - (sgn * data.Ir + c[None, :]) @ phase
        out.append(data.norm[None, :] * np.exp(expo))
    return out


@dataclass(frozen=True)
class WannierValues:
    x: np.ndarray
    W: np.ndarray
    max_imag: float


def _nodes_for(pot: Potential, K: float, x, nodes: int | None) -> int:
    if nodes is not None:
        return int(nodes)
    xmax = float(np.max(np.abs(x))) if np.size(x) else 0.0
    return int(96 + 2.0 * xmax * K)


def wannier_direct(
    pot: Potential,
    n: int,
    x,
    avg: AveragePolynomial | None = None,
    nodes: int | None = None,
    translation: int = 0,
) -> WannierValues:
    """W_n(x) by quadrature over both banks of band n.

    ``translation`` l evaluates W_n^{(l)}: Omega is moved by 2 l Omega' and the
    Bloch function picks up exp(-2 l Omega'^T (int dr + eta 1)); for periodic
    potentials this is W_n(x - l T).
    """
    _check_band(pot, n)
    avg = average_S(pot) if avg is None else avg
    x = np.atleast_1d(np.asarray(x, dtype=float))
    K = band_width_K(pot, n, avg)
    data = band_bloch_data(pot, n, avg, _nodes_for(pot, K, x - translation * pot.length_scale, nodes))
    shift = phase = None
    if translation:
        Op = translation_vector(pot)
        shift = 2.0 * translation * Op
        phase = 2.0 * translation * Op
    chunk = max(1, BATCH // len(data.lam))
    W = np.empty(len(x), dtype=complex)
    for i in range(0, len(x), chunk):
        plus, minus = _psi_banks(pot, data, x[i : i + chunk], shift, phase)
        W[i : i + chunk] = (plus + minus) @ data.weights / math.sqrt(K)
    return WannierValues(x, W.real, float(np.max(np.abs(W.imag))))


def translation_vector(pot: Potential) -> np.ndarray:
    """Omega' oriented so that 2 Omega' has positive imaginary g-component.

    For a periodic potential 2 Omega' = i T e_g, so a shift by 2 Omega' is a
    translation of x by one period.
    """
    Op = np.asarray(pot.Omega_p, dtype=complex)
    return Op if Op[-1].imag > 0 else -Op


def wannier_translated(pot: Potential, n: int, x, l: int, **kw) -> WannierValues:
    return wannier_direct(pot, n, x, translation=l, **kw)


# ---------------------------------------------------------------------------
# large-x asymptotics


def _bloch_factor(pot: Potential, x, p: SurfacePoint):
    """psi(x, P) / psi(0, P): the sigma quotient times exp(i x (J + c))."""
    from .spectral import bloch_data

    d = bloch_data(pot, p)
    ctx = pot.sigma_ctx
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = pot.h(x)
    h0 = pot.h([0.0])
    ls = log_sigma(h + d.v, ctx) - log_sigma(h, ctx)
    ls0 = log_sigma(h0 + d.v, ctx) - log_sigma(h0, ctx)
    return np.exp(ls - ls0 + 1j * x * (d.J + d.c))


@dataclass(frozen=True)
class Saddle:
    """Root lambda_0 of <S> in a gap next to the band, with its local data."""

    lam0: float
    side: int  # +1: gap to the right of the band, -1: gap to the left
    k0: complex  # quasi-momentum at lambda_0 (upper sheet)
    c: float  # k - k0 = i c (lambda - lambda_0)^2 / ... , see asymptotic_terms
    amplitude: complex  # lim sqrt(y) sqrt(S(0,.)/<S>)(lambda_0 + i y)

    @property
    def decay_rate(self) -> float:
        return float(self.k0.imag)


def _continued_norm(pot: Potential, avg: AveragePolynomial, n: int, target: complex, steps: int = 4000):
    """sqrt(S(0, lambda)/<S>(lambda)) continued from the band midpoint to ``target`` through the upper half-plane."""
    a, b = band_edges(pot.curve, n)
    m = 0.5 * (a + b)
    Y = max(1.0, abs(target.imag)) * (b - a)
    path = np.concatenate(
        [
            m + 1j * np.linspace(0.0, Y, steps),
            np.linspace(m, target.real, steps) + 1j * Y,
            target.real + 1j * np.linspace(Y, target.imag, steps),
        ]
    )
    co = S_coefficients(pot, [0.0])[:, 0]
    r = np.polynomial.polynomial.polyval(path, co) / avg(path)
    s = np.sqrt(r)
    # flip signs to keep the branch continuous along the path
    flips = np.abs(s[1:] - s[:-1]) > np.abs(s[1:] + s[:-1])
    sign = np.cumprod(np.concatenate([[1.0], np.where(flips, -1.0, 1.0)]))
    s = s * sign
    if s[0].real < 0:
        s = -s
    return s[-1]


def saddles(pot: Potential, n: int, avg: AveragePolynomial | None = None) -> list[Saddle]:
    """Roots of <S> in the gaps adjacent to band n (at most two)."""
    from .spectral import quasimomentum

    _check_band(pot, n)
    avg = average_S(pot) if avg is None else avg
    curve = pot.curve
    E = curve.E
    roots = avg.roots()
    out = []
    for side, (lo, hi) in ((1, (E[2 * n - 1], E[2 * n])), (-1, (E[2 * n - 3], E[2 * n - 2]) if n > 1 else (None, None))):
        if lo is None:
            continue
        inside = [r for r in roots if lo < r < hi]
        if not inside:
            continue
        lam0 = float(inside[0])
        mu0 = complex(curve.mu_boundary(lam0, 1))
        ds = np.polynomial.polynomial.polyval(lam0, np.polynomial.polynomial.polyder(avg.coefficients))
        c = 1j * ds / (2.0 * mu0)
        if abs(c.imag) > 1e-8 * abs(c) or c.real <= 0:
            raise NoSaddle(f"saddle at {lam0} has no descent direction (c = {c})")
        k0 = quasimomentum(avg, curve, SurfacePoint(complex(lam0), mu0))
        y = 1e-7 * (hi - lo)
        amp = _continued_norm(pot, avg, n, lam0 + 1j * y) * math.sqrt(y)
        out.append(Saddle(lam0, side, k0, float(c.real), complex(amp)))
    if not out:
        raise NoSaddle(f"<S> has no root in the gaps next to band {n}")
    return out


def wannier_asymptotic(pot: Potential, n: int, x, avg: AveragePolynomial | None = None) -> np.ndarray:
    """Leading large-x term of W_n from the branch points k(lambda_0) of the quasi-momentum.

    Near a root lambda_0 of <S> the quasi-momentum is stationary,
    k - k0 = -i c (lambda - lambda_0)^2 with c = i <S>'(lambda_0) / (2 mu(lambda_0)) > 0,
    and the normalisation sqrt(S(0,.)/<S>) has a square-root singularity.  The
    Hankel contour around the cut of lambda(k) gives, for x -> +infinity,

        W_n(x) ~ (2 / sqrt(K_n)) Re sum -side i A c^{1/4} Phi(x, lambda_0) Gamma(3/4) x^{-3/4},

    where A = lim sqrt(y) sqrt(S(0,.)/<S>)(lambda_0 + i y) and
    Phi = psi / psi(0) is the unnormalised Bloch factor at lambda_0.
    """
    avg = average_S(pot) if avg is None else avg
    x = np.atleast_1d(np.asarray(x, dtype=float))
    K = band_width_K(pot, n, avg)
    total = np.zeros(x.shape, dtype=complex)
    for sd in saddles(pot, n, avg):
        p = SurfacePoint(complex(sd.lam0), complex(pot.curve.mu_boundary(sd.lam0, 1)))
        phi = _bloch_factor(pot, x, p)
        total = total - sd.side * 1j * sd.amplitude * sd.c**0.25 * phi
    return 2.0 / math.sqrt(K) * (total * math.gamma(0.75) / x**0.75).real


# ---------------------------------------------------------------------------
# small-x series


def potential_taylor(pot: Potential, order: int) -> np.ndarray:
    """Taylor coefficients u_j of u(x) = sum E_i - 2 wp_gg(i x e_g - Omega) at x = 0, j = 0..order."""
    g = pot.genus
    d = wp_axis_derivatives(-pot.Omega.Omega, pot.sigma_ctx, g, order + 2)
    u = np.empty(order + 1, dtype=complex)
    for j in range(order + 1):
        u[j] = -2.0 * (1j) ** j * complex(np.ravel(d[j])[0]) / math.factorial(j)
    u[0] += float(np.sum(pot.curve.E))
    return u


def taylor_coefficient_polynomials(u: np.ndarray, order: int) -> list[np.ndarray]:
    """Even-part Taylor coefficients c_j(lambda) of psi(x, lambda) / psi(0, lambda).

    From -psi'' + u psi = lambda psi with c_0 = 1 and the odd start c_1 = 0
    (the i mu part of psi'(0) cancels between the banks):
    (j+2)(j+1) c_{j+2} = sum_i u_i c_{j-i} - lambda c_j.  Polynomials ascending in lambda.
    """
    P = np.polynomial.polynomial
    c = [np.array([1.0 + 0j]), np.array([0j])]
    for j in range(order - 1):
        acc = P.polymul([0.0, -1.0], c[j])
        for i in range(j + 1):
            acc = P.polyadd(acc, u[i] * c[j - i])
        c.append(np.asarray(acc) / ((j + 2) * (j + 1)))
    return c[: order + 1]


def q_from_taylor(c: list[np.ndarray], pmax: int) -> np.ndarray:
    """q[p, k] with W^{(2p)} = sum_k q[p, k] M_k, where W^{(2p)} = (-1)^p W^{(2p)}(0)."""
    q = np.zeros((pmax + 1, pmax + 1), dtype=complex)
    for p in range(pmax + 1):
        co = (-1) ** p * math.factorial(2 * p) * c[2 * p]
        q[p, : len(co)] = co[: pmax + 1]
    return q


def q_from_recurrence(u: np.ndarray, pmax: int) -> np.ndarray:
    """Experimental: x-derivative recurrence psi^{(m)} = A_m psi + B_m psi'.

    A_{m+1} = A_m' + B_m (u - lambda), B_{m+1} = A_m + B_m', evaluated on
    derivative jets at x = 0.
    """
    P = np.polynomial.polynomial
    M = 2 * pmax
    D = [u[j] * math.factorial(j) for j in range(len(u))] + [0j] * (M + 2)
    # jets[j] = j-th x-derivative at 0, each a polynomial in lambda
    A = [np.array([1.0 + 0j])] + [np.array([0j])] * M
    B = [np.array([0j])] * (M + 1)
    q = np.zeros((pmax + 1, pmax + 1), dtype=complex)
    q[0, 0] = 1.0
    for m in range(M):
        depth = M - m - 1
        A_new, B_new = [], []
        for j in range(depth + 1):
            a = A[j + 1]
            for i in range(j + 1):
                ul = np.array([D[j - i]]) if j - i > 0 else np.array([D[0], -1.0])
                a = P.polyadd(a, math.comb(j, i) * P.polymul(B[i], ul))
            A_new.append(np.asarray(a))
            B_new.append(np.asarray(P.polyadd(A[j], B[j + 1])))
        A, B = A_new, B_new
        if (m + 1) % 2 == 0:
            p = (m + 1) // 2
            co = (-1) ** p * A[0]
            q[p, : min(len(co), pmax + 1)] = co[: pmax + 1]
    return q


def display_values(pot: Potential) -> dict:
    """wp_gg(Omega) (with the trace constant folded in), wp_gggg(Omega), wp_gggggg(Omega)."""
    g = pot.genus
    d = wp_axis_derivatives(pot.Omega.Omega, pot.sigma_ctx, g, 6)
    sE = float(np.sum(pot.curve.E))
    return {
        "wp_gg": complex(np.ravel(d[0])[0]) - 0.5 * sE,
        "wp_gggg": complex(np.ravel(d[2])[0]),
        "wp_gggggg": complex(np.ravel(d[4])[0]),
    }


def q_from_display(P2: complex, P4: complex, P6: complex) -> np.ndarray:
    """Coefficients of the explicit W^{(0)}..W^{(6)} combinations of M_0..M_3."""
    q = np.zeros((4, 4), dtype=complex)
    q[0, 0] = 1.0
    q[1, :2] = [2 * P2, 1.0]
    q[2, :3] = [4 * P2**2 + 2 * P4, 4 * P2, 1.0]
    q[3, :4] = [2 * P6 + 28 * P4 * P2 + 8 * P2**3, 12 * P2**2 + 14 * P4, 6 * P2, 1.0]
    return q


def wp_gggg_from_kdv(curve: Curve, support) -> float:
    """wp_gggg(Omega) from the KdV relation restricted to the half-period.

    With wp_gg(Omega) = e_1 and wp_{g,g-1}(Omega) = -e_2 (elementary symmetric
    functions of the support): (6 e_1 + alpha_{2g}) e_1 - 4 e_2 + alpha_{2g-1} / 2.
    """
    g = curve.genus
    pts = np.array([curve.E[i - 1] for i in support], dtype=float)
    e1 = float(np.sum(pts))
    e2 = float(sum(pts[i] * pts[j] for i in range(len(pts)) for j in range(i + 1, len(pts))))
    alpha = curve.alpha
    return (6 * e1 + alpha[2 * g]) * e1 - 4 * e2 + 0.5 * alpha[2 * g - 1]


@dataclass(frozen=True)
class WannierSeries:
    band: int
    moments: np.ndarray  # M_0..M_pmax
    q: np.ndarray  # W^{(2p)} = sum_k q[p, k] M_k
    W_coeffs: np.ndarray  # W^{(0)}, W^{(2)}, ...
    order: int  # 2 pmax

    def terms(self, x) -> np.ndarray:
        """Terms (-1)^p W^{(2p)} x^{2p} / (2p)!, shape (pmax+1, Nx)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        p = np.arange(len(self.W_coeffs))
        fact = np.array([math.factorial(2 * k) for k in p], dtype=float)
        return ((-1.0) ** p * self.W_coeffs.real / fact)[:, None] * x[None, :] ** (2 * p[:, None])


def wannier_series(
    pot: Potential, n: int = 1, order: int = 6, avg: AveragePolynomial | None = None
) -> WannierSeries:
    """Moments and coefficients of the even Taylor series of W_n at x = 0."""
    _check_band(pot, n)
    if order < 0 or order % 2:
        raise ConfigError("series order must be a non-negative even integer")
    avg = average_S(pot) if avg is None else avg
    pmax = order // 2
    M = moments(pot, n, pmax, avg)
    u = potential_taylor(pot, max(order, 1))
    q = q_from_taylor(taylor_coefficient_polynomials(u, order), pmax)
    return WannierSeries(n, M, q, q @ M, order)


@dataclass(frozen=True)
class SeriesValues:
    x: np.ndarray
    W: np.ndarray
    tail: np.ndarray  # magnitude of the last included term


def evaluate_series(series: WannierSeries, x) -> SeriesValues:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = series.terms(x)
    return SeriesValues(x, np.sum(t, axis=0), np.abs(t[-1]))


def crossover_threshold(series: WannierSeries, xmax: float, tol: float = 0.1, samples: int = 2000) -> float:
    """Smallest x > 0 where the last series term exceeds ``tol`` of the partial sum."""
    x = np.linspace(0.0, xmax, samples)[1:]
    v = evaluate_series(series, x)
    bad = v.tail > tol * np.abs(v.W)
    if not np.any(bad):
        return float(xmax)
    return float(x[np.argmax(bad)])
