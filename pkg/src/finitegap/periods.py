"""Period matrices, Abel map, half-periods and the winding vector."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import quadrature as quad
from .curve import Curve, SurfacePoint
from .errors import QuadratureFailure, SingularHalfPeriod

PERIOD_TOL = 1e-11


@dataclass(frozen=True)
class PeriodData:
    """Half-period matrices; column k belongs to the cycle a_k / b_k."""

    omega: np.ndarray
    omega_p: np.ndarray
    eta: np.ndarray
    eta_p: np.ndarray

    @property
    def genus(self) -> int:
        return self.omega.shape[0]

    @cached_property
    def tau(self) -> np.ndarray:
        return np.linalg.solve(self.omega, self.omega_p)

    @cached_property
    def kappa(self) -> np.ndarray:
        return self.eta @ np.linalg.inv(2.0 * self.omega)

    @cached_property
    def legendre_matrix(self) -> np.ndarray:
        g = self.genus
        M = np.block([[self.omega, self.omega_p], [self.eta, self.eta_p]])
        J = np.block([[np.zeros((g, g)), -np.eye(g)], [np.eye(g), np.zeros((g, g))]])
        return M @ J @ M.T

    def legendre_residual(self) -> float:
        """Max entry of |M J M^T - c J| for the constant c this basis realizes.

        The a/b orientation that puts Im(tau) > 0 yields c = -i pi/2 (see "Conventions" in the
        README).
        """
        g = self.genus
        J = np.block([[np.zeros((g, g)), -np.eye(g)], [np.eye(g), np.zeros((g, g))]])
        return float(np.max(np.abs(self.legendre_matrix - LEGENDRE_CONSTANT * J)))

    @cached_property
    def lattice_matrix(self) -> np.ndarray:
        """Real 2g x 2g matrix mapping (n, n') to (Re, Im) of 2 omega n + 2 omega' n'."""
        L = np.hstack([2.0 * self.omega, 2.0 * self.omega_p])
        return np.vstack([L.real, L.imag])

    def lattice_vector(self, n, m) -> np.ndarray:
        return 2.0 * self.omega @ np.asarray(n, float) + 2.0 * self.omega_p @ np.asarray(m, float)

    def eta_vector(self, n, m) -> np.ndarray:
        return 2.0 * self.eta @ np.asarray(n, float) + 2.0 * self.eta_p @ np.asarray(m, float)

    def lattice_coordinates(self, v) -> tuple[np.ndarray, np.ndarray]:
        """Real (n, n') with v = 2 omega n + 2 omega' n'."""
        v = np.asarray(v, dtype=complex)
        x = np.linalg.solve(self.lattice_matrix, np.concatenate([v.real, v.imag]))
        g = self.genus
        return x[:g], x[g:]

    def reduce(self, v) -> np.ndarray:
        """Representative of v modulo the period lattice with coordinates in [-1/2, 1/2)."""
        n, m = self.lattice_coordinates(v)
        return np.asarray(v, complex) - self.lattice_vector(np.round(n), np.round(m))

    def to_dict(self) -> dict:
        def enc(A):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(A)]

        return {
            "omega": enc(self.omega),
            "omega_p": enc(self.omega_p),
            "eta": enc(self.eta),
            "eta_p": enc(self.eta_p),
            "tau": enc(self.tau),
            "kappa": enc(self.kappa),
            "legendre_residual": self.legendre_residual(),
        }


LEGENDRE_CONSTANT = -0.5j * np.pi


def _cycle_integrals(curve: Curve, nums, n: int):
    """a- and b-cycle integrals (g columns each) of the numerators ``nums``."""
    E = curve.E
    g = curve.genus
    seg = [quad.segment_integral(E, nums, j, 0.0, np.pi, side=1, n=n) for j in range(2 * g)]
    A = np.stack([-2.0 * seg[2 * k] for k in range(g)], axis=-1)
    # b_k runs above the axis on the upper sheet and below it on the lower
    # sheet, so intermediate cuts cancel and only gaps k..g contribute.
    gaps = [seg[2 * m + 1] for m in range(g)]
    B = np.stack([-2.0 * sum(gaps[k:]) for k in range(g)], axis=-1)
    return A, B


def compute_periods(curve: Curve, n: int = quad.DEFAULT_NODES, tol: float = PERIOD_TOL) -> PeriodData:
    H = curve.holomorphic_numerators()
    Rm = curve.meromorphic_numerators()
    nums = np.vstack([H, Rm])
    g = curve.genus
    while True:
        A1, B1 = _cycle_integrals(curve, nums, n)
        A2, B2 = _cycle_integrals(curve, nums, 2 * n)
        scale = max(np.max(np.abs(A2)), np.max(np.abs(B2)))
        err = max(np.max(np.abs(A1 - A2)), np.max(np.abs(B1 - B2))) / scale
        if err < tol:
            break
        n *= 2
        if n > 4096:
            raise QuadratureFailure(f"period quadrature stalled at relative error {err:.2e}")
    return PeriodData(
        omega=0.5 * A2[:g],
        omega_p=0.5 * B2[:g],
        eta=-0.5 * A2[g:],
        eta_p=-0.5 * B2[g:],
    )


# ---------------------------------------------------------------------------
# integrals from the top branch point E_{2g+1} to a surface point


def _upper_mu(curve):
    return curve.mu


def _real_axis_from_top(curve: Curve, nums, lam: float, side: int, n: int):
    """Integral from E_{2g+1} to real lam along the real axis on side ``side``."""
    E = curve.E
    top = E[-1]
    if lam >= top:
        return quad.ray_integral(nums, top, lam, lambda z: curve.mu_boundary(z.real, side), n)
    total = 0.0
    j = int(np.searchsorted(E, lam, side="right")) - 1  # segment containing lam
    last = len(E) - 2
    if j < 0:
        # left of E_1: the whole chain of segments, then the ray E_1 -> lam
        for m in range(last, -1, -1):
            total = total - quad.segment_integral(E, nums, m, 0.0, np.pi, side, n)
        return total + quad.ray_integral(nums, E[0], lam, lambda z: curve.mu_boundary(z.real, side), n)
    for m in range(last, j, -1):
        total = total - quad.segment_integral(E, nums, m, 0.0, np.pi, side, n)
    c = 0.5 * (E[j] + E[j + 1])
    d = 0.5 * (E[j + 1] - E[j])
    t = np.arccos(np.clip((c - lam) / d, -1.0, 1.0))
    return total - quad.segment_integral(E, nums, j, t, np.pi, side, n)


def _complex_from_top(curve: Curve, nums, lam: complex, n: int):
    """Integral from E_{2g+1} to non-real lam on the upper sheet, avoiding the cuts."""
    top = curve.E[-1]
    sgn = 1.0 if lam.imag > 0 else -1.0
    H = max(abs(lam.imag), 0.25 * curve.scale)
    p1 = top + 1j * sgn * H
    p2 = lam.real + 1j * sgn * H
    total = quad.ray_integral(nums, top, p1, curve.mu, n)
    total = total + quad.line_integral(nums, p1, p2, curve.mu, n)
    if abs(p2 - lam) > 0:
        total = total + quad.line_integral(nums, p2, lam, curve.mu, n, grade_end=True)
    return total


def sheet_sign(curve: Curve, p: SurfacePoint, side: int = 1) -> int:
    lam = complex(p.lam)
    ref = complex(curve.mu_boundary(lam.real, side)) if lam.imag == 0 else complex(curve.mu(lam))
    if abs(ref) == 0:
        return 1
    return 1 if abs(p.mu - ref) <= abs(p.mu + ref) else -1


def integrals_from_top(curve: Curve, nums, p: SurfacePoint, n: int = quad.DEFAULT_NODES):
    """int_{(E_{2g+1},0)}^{P} num/mu dlambda for each numerator row.

    Real lambda is reached along the upper side of the axis, others along a
    path in the half-plane containing P; lower-sheet points use the involution.
    """
    lam = complex(p.lam)
    if lam.imag == 0.0:
        s = sheet_sign(curve, p, side=1)
        return s * _real_axis_from_top(curve, nums, lam.real, 1, n)
    s = sheet_sign(curve, p)
    return s * _complex_from_top(curve, nums, lam, n)


def cut_integrals_from_top(curve: Curve, nums, lams, n: int = quad.DEFAULT_NODES):
    """Vectorized version of the upper-side real-axis integral for many real lams."""
    lams = np.asarray(lams, dtype=float)
    out = np.zeros((np.atleast_2d(nums).shape[0],) + lams.shape, dtype=complex)
    E = curve.E
    seg_idx = np.searchsorted(E, lams, side="right") - 1
    for j in np.unique(seg_idx):
        mask = seg_idx == j
        if j < 0 or j >= len(E) - 1:
            for i in np.nonzero(mask.ravel())[0]:
                idx = np.unravel_index(i, lams.shape)
                out[(slice(None),) + idx] = _real_axis_from_top(curve, nums, lams[idx], 1, n)
            continue
        total = 0.0
        for m in range(len(E) - 2, j, -1):
            total = total - quad.segment_integral(E, nums, m, 0.0, np.pi, 1, n)
        c = 0.5 * (E[j] + E[j + 1])
        d = 0.5 * (E[j + 1] - E[j])
        t = np.arccos(np.clip((c - lams[mask]) / d, -1.0, 1.0))
        part = quad.segment_integral(E, nums, j, t, np.pi * np.ones_like(t), 1, n)
        out[:, mask] = np.asarray(total)[..., None] - part
    return out


def abel_base(curve: Curve) -> np.ndarray:
    """Abel image of (E_{2g+1}, 0) with base point at infinity."""
    return -quad.tail_integral(curve.E, curve.holomorphic_numerators()[:, : curve.genus])


def abel_map(curve: Curve, per: PeriodData, p: SurfacePoint) -> np.ndarray:
    """v = int_infinity^P dh (not lattice reduced)."""
    return abel_base(curve) + integrals_from_top(curve, curve.holomorphic_numerators(), p)


def branch_point_images(curve: Curve) -> np.ndarray:
    """Abel images of (E_k, 0), k=1..2g+1, as rows."""
    H = curve.holomorphic_numerators()
    base = abel_base(curve)
    rows = [base + _real_axis_from_top(curve, H, e, 1, quad.DEFAULT_NODES) for e in curve.E]
    return np.array(rows)


# ---------------------------------------------------------------------------
# half-periods


@dataclass(frozen=True)
class HalfPeriod:
    support: tuple
    Omega: np.ndarray
    n2: np.ndarray  # doubled integer coordinates: Omega = omega n2 + omega' n2p
    n2p: np.ndarray
    Delta: np.ndarray

    @property
    def n(self):
        return self.n2 / 2.0

    @property
    def n_p(self):
        return self.n2p / 2.0


def half_period_from_support(curve: Curve, per: PeriodData, support, check=None) -> HalfPeriod:
    """Omega = sum of branch-point Abel images over the 1-based ``support``.

    ``check`` is an optional callable Omega -> |sigma(Omega)| used to reject
    singular half-periods.
    """
    support = tuple(sorted(int(i) for i in support))
    g = curve.genus
    if len(support) != g or not all(1 <= i <= 2 * g + 1 for i in support):
        raise ValueError(f"support must be {g} indices in 1..{2 * g + 1}")
    imgs = branch_point_images(curve)
    Omega = sum(imgs[i - 1] for i in support)
    n, m = per.lattice_coordinates(Omega)
    n2, m2 = np.round(2 * n), np.round(2 * m)
    resid = np.max(np.abs(per.lattice_vector(n2 / 2, m2 / 2) - Omega))
    if resid > 1e-8 * max(1.0, np.max(np.abs(Omega))):
        raise SingularHalfPeriod(f"Omega is not a half-period (residual {resid:.2e})")
    Omega = per.lattice_vector(n2 / 2, m2 / 2)
    Delta = per.eta_vector(n2 / 2, m2 / 2)
    hp = HalfPeriod(support, Omega, n2.astype(int), m2.astype(int), Delta)
    if check is not None and check(Omega) < 1e-10:
        raise SingularHalfPeriod(f"sigma vanishes at the half-period with support {support}")
    return hp


def half_period_parity(hp: HalfPeriod, characteristic=None) -> int:
    """+1 for even, -1 for odd.

    With ``characteristic`` = [a, b] of the sigma function, the parity is that
    of the combined characteristic [a + n'/2, b + n/2] (doubled coordinates
    n, n'), i.e. of u -> sigma(u + Omega) up to an exponential factor.
    """
    if characteristic is None:
        a2 = np.zeros_like(hp.n2)
        b2 = np.zeros_like(hp.n2)
    else:
        a2 = np.round(2 * np.asarray(characteristic[0])).astype(int)
        b2 = np.round(2 * np.asarray(characteristic[1])).astype(int)
    return 1 if int(np.dot(hp.n2p + a2, hp.n2 + b2)) % 2 == 0 else -1


# ---------------------------------------------------------------------------
# winding vector


@dataclass(frozen=True)
class WindingVector:
    U: np.ndarray
    periodic: bool
    n: np.ndarray | None = None
    U_scalar: complex | None = None

    @property
    def period(self) -> float | None:
        """Real x-period T of the potential when periodic (i T e_g = 2 omega' n)."""
        if not self.periodic:
            return None
        return float(abs(1.0 / self.U_scalar))


def winding_and_classification(per: PeriodData, tol: float = 1e-8, max_int: int = 64) -> WindingVector:
    g = per.genus
    e_g = np.zeros(g)
    e_g[-1] = 1.0
    U = np.linalg.solve(2.0 * per.omega_p, e_g)
    ref = int(np.argmax(np.abs(U)))
    ratios = (U / U[ref]).real
    best = None
    for q in range(1, max_int + 1):
        cand = np.round(ratios * q)
        if np.max(np.abs(cand)) > max_int:
            continue
        if np.max(np.abs(ratios * q - cand)) < tol * q:
            best = cand.astype(int)
            break
    if best is None:
        # continued fractions as a second chance for ratios with larger terms
        dens = [Fraction(float(r)).limit_denominator(max_int).denominator for r in ratios]
        q = int(np.lcm.reduce(dens))
        cand = np.round(ratios * q)
        if q <= max_int and np.max(np.abs(ratios * q - cand)) < tol * q:
            best = cand.astype(int)
    if best is None:
        return WindingVector(U, False)
    gcd = int(np.gcd.reduce(np.abs(best)))
    best = best // max(gcd, 1)
    if best[ref] < 0:
        best = -best
    Us = U[ref] / best[ref]
    if np.linalg.norm(U - best * Us) > tol * np.linalg.norm(U):
        return WindingVector(U, False)
    return WindingVector(U, True, best, complex(Us))
