"""Riemann theta function with half-integer characteristics and its derivatives.

theta[a,b](z) = sum_m exp(i pi (m+a)^T tau (m+a) + 2 pi i (m+a)^T (z+b)).

The lattice sum is taken over an ellipsoid centred at the dominant term for
each argument, so large imaginary parts never overflow: values are returned
as ``(log_scale, mantissa)`` pairs internally.  Logarithmic derivatives are
computed from moments of the (complex) term weights about the dominant
lattice point, which keeps high-order cumulants free of cancellation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NonConvergent


@dataclass(frozen=True)
class ThetaContext:
    tau: np.ndarray
    target_tol: float = 1e-16
    max_order: int = 8
    truncation_radius: float = field(init=False)
    _points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=complex)
        object.__setattr__(self, "tau", tau)
        Y = 0.5 * (tau.imag + tau.imag.T)
        ev = np.linalg.eigvalsh(Y)
        if ev[0] <= 0:
            raise NonConvergent("Im tau is not positive definite")
        g = tau.shape[0]
        # Gaussian tail: exp(-pi r^2) < tol, widened for derivative weights and
        # for the half-cell offset between the centre and its nearest lattice point
        r = math.sqrt(math.log(1.0 / self.target_tol) / math.pi)
        r += 0.5 * math.sqrt(g * ev[-1]) + 0.15 * self.max_order
        object.__setattr__(self, "truncation_radius", r)
        bound = int(math.ceil(r / math.sqrt(ev[0]))) + 1
        rng = range(-bound, bound + 1)
        pts = np.array(list(itertools.product(rng, repeat=g)), dtype=float)
        q = np.einsum("ni,ij,nj->n", pts, Y, pts)
        object.__setattr__(self, "_points", pts[q <= r * r])

    @property
    def genus(self) -> int:
        return self.tau.shape[0]

    @property
    def Y(self) -> np.ndarray:
        return self.tau.imag

    @property
    def n_terms(self) -> int:
        return len(self._points)


def _char(ctx, char):
    g = ctx.genus
    if char is None:
        return np.zeros(g), np.zeros(g)
    a, b = char
    return np.asarray(a, float).reshape(g), np.asarray(b, float).reshape(g)


def lattice_weights(ctx: ThetaContext, z, char=None):
    """Terms of the lattice sum for a batch of arguments.

    Returns ``(shift, w, kc, pts)``: ``w[n, k] = exp(term - shift[n])`` for
    lattice points ``kc[n] + pts[k]``, where ``kc`` is the dominant point.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    a, b = _char(ctx, char)
    tau = ctx.tau
    centre = -np.linalg.solve(ctx.Y, z.imag.T).T - a
    kc = np.round(centre)
    ka = kc[:, None, :] + ctx._points[None, :, :] + a
    expo = 1j * np.pi * np.einsum("nki,ij,nkj->nk", ka, tau, ka)
    expo = expo + 2j * np.pi * np.einsum("nki,ni->nk", ka, z + b)
    shift = np.max(expo.real, axis=1)
    w = np.exp(expo - shift[:, None])
    return shift, w, kc, ctx._points


def log_theta(z, ctx: ThetaContext, char=None):
    """log theta (principal branch of the mantissa) for z of shape (g,) or (N, g)."""
    z = np.asarray(z, dtype=complex)
    shift, w, _, _ = lattice_weights(ctx, z, char)
    out = shift + np.log(np.sum(w, axis=1))
    return out[0] if z.ndim == 1 else out


def theta(z, ctx: ThetaContext, char=None):
    """Riemann theta function; exact lattice sum for moderate arguments."""
    z = np.asarray(z, dtype=complex)
    shift, w, _, _ = lattice_weights(ctx, z, char)
    out = np.exp(shift) * np.sum(w, axis=1)
    return out[0] if z.ndim == 1 else out


def theta_derivative(z, ctx: ThetaContext, multi_index, char=None):
    """Partial derivative d^k theta / dz_{i1} ... dz_{ik} (0-based indices)."""
    if len(multi_index) > 4 * ctx.genus:
        raise ValueError("derivative order above 4g is not supported")
    z = np.asarray(z, dtype=complex)
    a, _ = _char(ctx, char)
    shift, w, kc, pts = lattice_weights(ctx, z, char)
    ka = kc[:, None, :] + pts[None, :, :] + a
    f = np.ones_like(w)
    for i in multi_index:
        f = f * (2j * np.pi * ka[:, :, i])
    out = np.exp(shift) * np.sum(w * f, axis=1)
    return out[0] if z.ndim == 1 else out


# ---------------------------------------------------------------------------
# set-partition helpers shared with the sigma module


@lru_cache(maxsize=None)
def set_partitions(n: int):
    """All set partitions of range(n) as tuples of tuples."""
    if n == 0:
        return ((),)
    out = []
    for part in set_partitions(n - 1):
        out.append(part + ((n - 1,),))
        for i in range(len(part)):
            out.append(part[:i] + (part[i] + (n - 1,),) + part[i + 1 :])
    return tuple(out)


def cumulants_from_moments(moment, multi):
    """Joint cumulant for ``multi`` given ``moment(sub_multi_index)``."""
    total = 0.0
    for part in set_partitions(len(multi)):
        k = len(part)
        coef = (-1) ** (k - 1) * math.factorial(k - 1)
        term = coef
        for block in part:
            term = term * moment(tuple(multi[i] for i in block))
        total = total + term
    return total


def moments_from_cumulants(cumulant, multi):
    total = 0.0
    for part in set_partitions(len(multi)):
        term = 1.0
        for block in part:
            term = term * cumulant(tuple(multi[i] for i in block))
        total = total + term
    return total


class ThetaJet:
    """Theta value and derivatives with respect to u, where z = A u.

    Built once per batch of arguments; ``log_derivative`` returns joint
    cumulants (derivatives of log theta), ``derivative`` raw derivatives
    divided by ``exp(shift)``.
    """

    def __init__(self, ctx: ThetaContext, z, A, char=None):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        a, _ = _char(ctx, char)
        self.shift, self.w, kc, pts = lattice_weights(ctx, z, char)
        self.S = np.sum(self.w, axis=1)
        self.abs_sum = np.sum(np.abs(self.w), axis=1)
        A = np.asarray(A)
        # derivative factors relative to the dominant point, and the offset
        self.q = 2j * np.pi * np.einsum("ki,ij->kj", pts + a, A)  # (K, g)
        self.q0 = 2j * np.pi * kc @ A  # (N, g)
        self._mom = {}

    @property
    def log_value(self):
        return self.shift + np.log(self.S)

    @property
    def relative_size(self):
        """|sum| / sum |terms|: small values signal proximity to the theta divisor."""
        return np.abs(self.S) / self.abs_sum

    def _centred_sum(self, multi):
        key = tuple(sorted(multi))
        if key not in self._mom:
            f = np.ones(self.q.shape[0], dtype=complex)
            for i in key:
                f = f * self.q[:, i]
            self._mom[key] = self.w @ f
        return self._mom[key]

    def log_derivative(self, multi):
        multi = tuple(multi)
        if not multi:
            return self.log_value
        val = cumulants_from_moments(lambda m: self._centred_sum(m) / self.S if m else 1.0, multi)
        if len(multi) == 1:
            val = val + self.q0[:, multi[0]]
        return val

    def derivative(self, multi):
        """Raw derivative of theta divided by exp(shift)."""
        multi = tuple(multi)
        # binomial expansion of prod (q0 + q) over the multi-index positions
        total = 0.0
        n = len(multi)
        for r in range(n + 1):
            for sub in itertools.combinations(range(n), r):
                rest = [multi[i] for i in range(n) if i not in sub]
                c = np.ones(self.q0.shape[0], dtype=complex)
                for i in rest:
                    c = c * self.q0[:, i]
                total = total + c * self._centred_sum(tuple(multi[i] for i in sub))
        return total

    def axis_log_derivatives(self, i: int, nmax: int):
        """[d^k log theta / du_i^k for k = 1..nmax] via the univariate moment-cumulant recursion."""
        m = [np.ones_like(self.S)] + [self._centred_sum((i,) * k) / self.S for k in range(1, nmax + 1)]
        kap = [None]
        for n in range(1, nmax + 1):
            val = m[n]
            for k in range(1, n):
                val = val - math.comb(n - 1, k - 1) * kap[k] * m[n - k]
            kap.append(val)
        kap[1] = kap[1] + self.q0[:, i]
        return kap[1:]
