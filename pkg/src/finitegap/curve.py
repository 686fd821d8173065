"""Hyperelliptic spectral curve mu^2 = 4 prod (lambda - E_k) with real branch points.

Sheet convention: cuts lie on [E_1, E_2], [E_3, E_4], ..., [E_{2g+1}, +inf).  The
upper-sheet branch of mu is the product of ``i*sqrt(E_k - lambda)`` factors, which
is analytic off the cuts and positive just above the real axis for
lambda > E_{2g+1}.  Points with mu equal to minus that branch sit on the lower
sheet.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BranchCollision, DegenerateCurve, PoleAtBranchPoint


@dataclass(frozen=True)
class Curve:
    """Curve fixed by its ordered branch points.

    ``alpha`` holds alpha_0 ... alpha_{2g+2} with alpha_{2g+1} = 4 and
    alpha_{2g+2} = 0, so that R(lambda) = sum alpha_i lambda^i.
    """

    branch_points: tuple
    genus: int = field(init=False)
    alpha: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        E = tuple(float(e) for e in self.branch_points)
        object.__setattr__(self, "branch_points", E)
        object.__setattr__(self, "genus", (len(E) - 1) // 2)
        # np.poly gives monic coefficients, highest power first
        coeffs = 4.0 * np.poly(np.array(E))[::-1]
        alpha = np.zeros(2 * self.genus + 3)
        alpha[: len(coeffs)] = coeffs
        alpha[2 * self.genus + 1] = 4.0
        object.__setattr__(self, "alpha", alpha)

    @property
    def E(self) -> np.ndarray:
        return np.asarray(self.branch_points)

    @property
    def scale(self) -> float:
        return float(self.E[-1] - self.E[0])

    @property
    def path_tolerance(self) -> float:
        return 1e-6 * self.scale

    def R(self, lam):
        lam = np.asarray(lam, dtype=complex)
        return 4.0 * np.prod(lam[..., None] - self.E, axis=-1)

    def mu(self, lam):
        """Upper-sheet branch of sqrt(R), analytic off the cuts."""
        lam = np.asarray(lam, dtype=complex)
        return 2.0 * np.prod(1j * np.sqrt(self.E - lam[..., None]), axis=-1)

    def mu_boundary(self, lam, side: int = 1):
        """Boundary value of the upper-sheet mu on the real axis.

        ``side=+1`` is the limit from above, ``side=-1`` from below.  In gaps
        both limits agree; on cuts they differ by sign.
        """
        lam = np.asarray(lam, dtype=float)
        d = self.E - lam[..., None]
        above = d > 0
        fac = np.where(above, 1j * np.sqrt(np.abs(d)), np.sqrt(np.abs(d)) + 0j)
        mu = 2.0 * np.prod(fac, axis=-1)
        if side < 0:
            n_below = np.sum(~above, axis=-1)
            mu = mu * np.where(n_below % 2 == 1, -1.0, 1.0)
        return mu

    def cut_index(self, lam: float) -> int | None:
        """1-based index of the cut containing real ``lam`` (g+1 for the last), else None."""
        E = self.E
        for i in range(self.genus):
            if E[2 * i] <= lam <= E[2 * i + 1]:
                return i + 1
        if lam >= E[-1]:
            return self.genus + 1
        return None

    def holomorphic_numerators(self) -> np.ndarray:
        """Rows j=1..g: coefficients (ascending) of lambda^{j-1}."""
        g = self.genus
        out = np.zeros((g, 2 * g + 2))
        for j in range(g):
            out[j, j] = 1.0
        return out

    def meromorphic_numerators(self) -> np.ndarray:
        """Rows j=1..g: ascending coefficients of the numerator of dr_j * mu / dlambda."""
        g = self.genus
        a = self.alpha
        out = np.zeros((g, 2 * g + 2))
        for j in range(1, g + 1):
            for k in range(j, 2 * g + 2 - j):
                out[j - 1, k] = (k + 1 - j) * a[k + 1 + j] / 4.0
        return out

    def to_json(self) -> str:
        return json.dumps({"branch_points": list(self.branch_points)})

    @classmethod
    def from_json(cls, text: str) -> "Curve":
        data = json.loads(text)
        return curve_from_branch_points(data["branch_points"])


@dataclass(frozen=True)
class SurfacePoint:
    lam: complex
    mu: complex

    def involution(self) -> "SurfacePoint":
        return SurfacePoint(self.lam, -self.mu)

    def residual(self, curve: Curve) -> float:
        R = complex(curve.R(self.lam))
        return abs(self.mu**2 - R) / (1.0 + abs(R))


def curve_from_branch_points(E: Sequence[float]) -> Curve:
    E = sorted(float(e) for e in E)
    if len(E) < 3 or len(E) % 2 == 0:
        raise DegenerateCurve(f"need an odd number >= 3 of branch points, got {len(E)}")
    if np.any(np.diff(E) <= 0):
        raise DegenerateCurve("branch points must be distinct")
    return Curve(tuple(E))


def point(curve: Curve, lam, sheet: int = 1, side: int = 1) -> SurfacePoint:
    """Surface point over ``lam``; real ``lam`` uses the boundary value from ``side``."""
    lam = complex(lam)
    if lam.imag == 0.0:
        m = complex(curve.mu_boundary(lam.real, side))
    else:
        m = complex(curve.mu(lam))
    return SurfacePoint(lam, sheet * m)


def mu_along_path(curve: Curve, path, mu_start: complex) -> SurfacePoint:
    """Continue mu = sqrt(R) analytically along a sampled path.

    ``path`` is a sequence of complex lambda values, fine enough that mu
    changes by much less than its magnitude between samples.
    """
    path = np.asarray(path, dtype=complex)
    tol = curve.path_tolerance
    dist = np.min(np.abs(path[:, None] - curve.E[None, :]))
    if dist < tol:
        raise BranchCollision(f"path passes within {dist:.3g} of a branch point")
    R0 = complex(curve.R(path[0]))
    if abs(mu_start**2 - R0) > 1e-8 * (1 + abs(R0)):
        raise ValueError("mu_start is not on the curve over the path start")
    m = complex(mu_start)
    roots = np.sqrt(curve.R(path))
    for r in roots[1:]:
        m = r if abs(r - m) <= abs(r + m) else -r
    return SurfacePoint(complex(path[-1]), m)


def holomorphic_integrand(curve: Curve, j: int, p: SurfacePoint) -> complex:
    if p.mu == 0:
        raise PoleAtBranchPoint("holomorphic integrand at a branch point")
    return p.lam ** (j - 1) / p.mu


def meromorphic_integrand(curve: Curve, j: int, p: SurfacePoint) -> complex:
    if p.mu == 0:
        raise PoleAtBranchPoint("meromorphic integrand at a branch point")
    num = curve.meromorphic_numerators()[j - 1]
    return np.polynomial.polynomial.polyval(p.lam, num) / p.mu
