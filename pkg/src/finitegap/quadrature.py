"""Quadrature of abelian integrals  int num(lambda)/mu dlambda  on the curve.

All routines take ``nums``, a (m, d) array of ascending polynomial coefficients,
and return the m integrals at once.  Inverse-square-root endpoint behaviour at
branch points is removed by substitution (cosine on segments between two
branch points, quadratic on rays leaving one branch point) so plain
Gauss-Legendre converges spectrally.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

DEFAULT_NODES = 96


@lru_cache(maxsize=32)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _nodes(a, b, n):
    """Gauss-Legendre nodes/weights mapped to [a, b] (a, b may be arrays)."""
    x, w = gauss_legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def polyval_rows(nums, lam):
    """Evaluate each row polynomial at ``lam``; result shape (m,) + lam.shape."""
    nums = np.atleast_2d(nums)
    return np.stack([P.polyval(lam, row) for row in nums])


def _segment_rest(E, j, lam, side):
    """mu_side(lam) / (2 sqrt((lam - E_j)(E_{j+1} - lam))) for lam inside segment j."""
    out = 1j * side * np.ones_like(lam, dtype=complex)
    for k, e in enumerate(E):
        if k in (j, j + 1):
            continue
        d = e - lam
        out = out * np.where(d > 0, 1j * np.sqrt(np.abs(d)), side * np.sqrt(np.abs(d)))
    return out


def segment_integral(E, nums, j, t0, t1, side=1, n=DEFAULT_NODES):
    """Integral from lambda(t0) to lambda(t1) inside segment [E_j, E_{j+1}] (0-based j).

    lambda(t) = c - d cos t, so t=0 is E_j and t=pi is E_{j+1}; the boundary
    value of mu is taken from ``side``.  ``t0``/``t1`` may be arrays of equal shape.
    """
    E = np.asarray(E, dtype=float)
    c = 0.5 * (E[j] + E[j + 1])
    d = 0.5 * (E[j + 1] - E[j])
    t, w = _nodes(t0, t1, n)
    lam = c - d * np.cos(t)
    f = polyval_rows(nums, lam) / (2.0 * _segment_rest(E, j, lam, side))
    return np.sum(f * w, axis=-1)


def ray_integral(nums, e0, lam, mu_fn, n=DEFAULT_NODES):
    """Integral from the branch point e0 to lam along the straight segment.

    Uses lambda = e0 + (lam - e0) s^2, which cancels the sqrt singularity at e0.
    ``mu_fn`` evaluates mu on the path (analytic branch or a boundary value).
    """
    x, w = gauss_legendre(n)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    delta = complex(lam) - e0
    if delta == 0:
        return np.zeros(np.atleast_2d(nums).shape[0], dtype=complex)
    pts = e0 + delta * s * s
    jac = 2.0 * delta * s
    f = polyval_rows(nums, pts) * jac / mu_fn(pts)
    return np.sum(f * w, axis=-1)


def line_integral(nums, a, b, mu_fn, n=DEFAULT_NODES, grade_end=False):
    """Integral along the straight segment a -> b, away from branch points.

    With ``grade_end`` the segment is split geometrically toward ``b`` so a
    nearby (but not coincident) branch point at the end is resolved.
    """
    a, b = complex(a), complex(b)
    if grade_end:
        fr = np.concatenate([[0.0], 1.0 - 0.25 ** np.arange(1, 12), [1.0]])
    else:
        fr = np.array([0.0, 1.0])
    x, w = gauss_legendre(n)
    total = 0.0
    for f0, f1 in zip(fr[:-1], fr[1:]):
        za = a + (b - a) * f0
        zb = a + (b - a) * f1
        h = 0.5 * (zb - za)
        pts = za + h * (x + 1.0)
        total = total + np.sum(polyval_rows(nums, pts) / mu_fn(pts) * (h * w), axis=-1)
    return total


def tail_integral(E, nums, n=DEFAULT_NODES):
    """Integral from E_{2g+1} to +infinity along the upper side of the last cut.

    Valid when every numerator has degree <= g-1.  Substitution
    lambda = E_{2g+1} + tan^2(theta) makes the integrand smooth on [0, pi/2].
    """
    E = np.asarray(E, dtype=float)
    g = (len(E) - 1) // 2
    top = E[-1]
    th, w = _nodes(0.0, 0.5 * np.pi, n)
    c2, s2 = np.cos(th) ** 2, np.sin(th) ** 2
    lam = top + s2 / c2
    # mu = 2 tan(theta) * root and dlam = 2 tan(theta) sec^2(theta) dtheta
    root = np.sqrt(np.prod(lam - E[:-1, None], axis=0))
    nums = np.atleast_2d(nums)
    out = []
    for row in nums:
        deg = np.max(np.nonzero(row)[0]) if np.any(row) else 0
        if deg > g - 1:
            raise ValueError("tail integral diverges for numerator degree >= g")
        val = P.polyval(lam, row[: deg + 1]) / c2 / root
        out.append(np.sum(val * w))
    return np.array(out)


def far_integral(E, nums, lam0, n=DEFAULT_NODES):
    """Integral from real lam0 > max(E_{2g+1}, 0) to +infinity, upper side (mu > 0).

    lambda = lam0 / t^2 turns the algebraic decay at infinity into a smooth
    integrand on (0, 1]; numerator degree must be <= g-1.
    """
    E = np.asarray(E, dtype=float)
    g = (len(E) - 1) // 2
    if lam0 <= max(E[-1], 0.0):
        raise ValueError("lam0 must exceed the last branch point and zero")
    t, w = _nodes(0.0, 1.0, n)
    root = np.sqrt(np.prod(1.0 - E[:, None] * (t * t) / lam0, axis=0))
    out = []
    for row in np.atleast_2d(nums):
        deg = np.max(np.nonzero(row)[0]) if np.any(row) else 0
        if deg > g - 1:
            raise ValueError("integral diverges for numerator degree >= g")
        # lam^k t^(2g-2) = lam0^k t^(2g-2-2k)
        val = sum(c * lam0**k * t ** (2 * g - 2 - 2 * k) for k, c in enumerate(row[: deg + 1]))
        out.append(lam0 ** (0.5 - g) * np.sum(val / root * w))
    return np.array(out)
