"""Identity suite shared by the ``verify`` command and the tests.

Every check returns a residual; ``run_suite`` collects the worst residual per
identity and compares it with its threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import Curve
from .periods import abel_map, compute_periods, half_period_from_support, half_period_parity
from .sigma import (
    _random_point,
    divadd_residual,
    jacobi_inversion,
    jacobian_relations_check,
    quasi_periodicity_residual,
    rel22_residual,
    sigma_context,
    zeta_addition_check,
)
from .spectral import default_support

THRESHOLDS = {
    "legendre": 1e-9,
    "divadd": 1e-6,
    "rel22": 1e-6,
    "zeta_formula": 1e-6,
    "product3": 1e-6,
    "kdv": 1e-6,
    "quasi_periodicity": 1e-6,
    "jacobi_round_trip": 1e-7,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual < self.threshold)


def random_argument(g: int, rng, scale: float = 0.3) -> np.ndarray:
    return scale * (rng.normal(size=g) + 1j * rng.normal(size=g))


def divisor_distance(a, b) -> float:
    """Matching distance between two lists of surface points (g small, brute force)."""
    import itertools

    best = np.inf
    for perm in itertools.permutations(range(len(b))):
        d = max(abs(a[i].lam - b[j].lam) + abs(a[i].mu - b[j].mu) for i, j in enumerate(perm))
        best = min(best, d)
    return float(best)


def jacobi_round_trip(curve: Curve, ctx, rng) -> float:
    """Random divisor -> Abel sum -> inversion; relative distance of the recovered divisor."""
    g = curve.genus
    pts = [_random_point(curve, rng) for _ in range(g)]
    u = sum(abel_map(curve, ctx.per, p) for p in pts)
    rec = jacobi_inversion(u, ctx)
    scale = max(1.0, max(abs(p.mu) + abs(p.lam) for p in pts))
    return divisor_distance(pts, rec) / scale


def run_suite(curve: Curve, n_args: int = 20, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    per = compute_periods(curve)
    ctx = sigma_context(curve, per)
    g = curve.genus
    hp = half_period_from_support(curve, per, default_support(g))
    if half_period_parity(hp, ctx.characteristic) != 1:
        hp = None
    worst = {k: 0.0 for k in THRESHOLDS}
    worst["legendre"] = per.legendre_residual()
    for _ in range(n_args):
        u = random_argument(g, rng)
        p = _random_point(curve, rng)
        worst["divadd"] = max(worst["divadd"], divadd_residual(u, p, ctx))
        worst["zeta_formula"] = max(worst["zeta_formula"], zeta_addition_check(u, p, ctx))
        if hp is not None:
            worst["rel22"] = max(worst["rel22"], rel22_residual(p, ctx, hp))
        jr = jacobian_relations_check(u, ctx)
        worst["product3"] = max(worst["product3"], float(np.max(jr["product3"])))
        worst["kdv"] = max(worst["kdv"], float(np.max(jr["kdv"])))
        n = rng.integers(-2, 3, g)
        m = rng.integers(-2, 3, g)
        worst["quasi_periodicity"] = max(worst["quasi_periodicity"], quasi_periodicity_residual(u, ctx, n, m))
        worst["jacobi_round_trip"] = max(worst["jacobi_round_trip"], jacobi_round_trip(curve, ctx, rng))
    return [CheckResult(k, float(v), THRESHOLDS[k]) for k, v in worst.items()]
