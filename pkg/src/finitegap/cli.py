"""Command-line front end.

    finitegap periods --curve c.json
    finitegap verify --curve c.json
    finitegap potential --curve c.json --x0 0 --x1 10 --n 200
    finitegap bands --curve c.json --xi0 -2 --xi1 3 --n 200
    finitegap averages --curve c.json [--window L]
    finitegap bloch --curve c.json --lambda -0.5 [--band 1]
    finitegap wannier --curve c.json --band 1 --x0 0 --x1 20 --n 200 [--method auto]
    finitegap wannier-moments --curve c.json --band 1 --kmax 3

The curve file is {"branch_points": [...]}.  Tables go to --out (or stdout)
as CSV with 17 significant digits, or as JSON with metadata.
"""
from __future__ import annotations

import os

_threads = os.environ.get("FINITEGAP_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import hashlib
import io
import json
import math
import sys

import numpy as np

from .curve import Curve, point
from .errors import ConfigError, FiniteGapError
from .periods import compute_periods
from .sigma import sigma_context
from .spectral import (
    average_S,
    bloch_psi,
    density_of_states,
    ergodic_window_estimate,
    make_potential,
    quasimomentum,
    weyl_w,
)

FMT = "%.16e"


# ---------------------------------------------------------------------------
# plumbing


def load_curve(path: str) -> Curve:
    try:
        with open(path, encoding="utf-8") as fh:
            return Curve.from_json(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read curve file {path!r}: {exc}") from exc


def parse_support(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(s) for s in text.replace(" ", "").split(",") if s)
    except ValueError as exc:
        raise ConfigError(f"malformed --omega-support {text!r}") from exc


def grid(x0: float, x1: float, n: int) -> np.ndarray:
    if n < 2 or not x0 < x1:
        raise ConfigError("grids need n >= 2 and x0 < x1")
    return np.linspace(x0, x1, n)


def curve_hash(curve: Curve) -> str:
    return hashlib.sha256(curve.to_json().encode()).hexdigest()[:16]


def _num(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return _num(obj)


def fmt_cell(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FMT % float(v)


def emit_table(args, columns: list[str], rows, meta: dict) -> None:
    out = io.StringIO()
    if args.format == "json":
        body = dict(meta)
        body["columns"] = columns
        body["rows"] = [[v if isinstance(v, str) else to_jsonable(v) for v in r] for r in rows]
        json.dump(to_jsonable(body), out, indent=1)
        out.write("\n")
    else:
        out.write(",".join(columns) + "\n")
        for r in rows:
            out.write(",".join(fmt_cell(v) for v in r) + "\n")
    write_out(args, out.getvalue())


def emit_json(args, payload: dict) -> None:
    write_out(args, json.dumps(to_jsonable(payload), indent=1) + "\n")


def write_out(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def base_meta(args, curve: Curve, pot=None) -> dict:
    meta = {"command": args.command, "curve_hash": curve_hash(curve), "branch_points": list(curve.E), "tol": args.tol}
    if pot is not None:
        meta["omega_support"] = list(pot.Omega.support)
        meta["classification"] = "periodic" if pot.winding.periodic else "quasi-periodic"
        if pot.winding.periodic:
            meta["period"] = pot.period
    return meta


def build_potential(args, curve: Curve, support=None):
    per = compute_periods(curve)
    sctx = sigma_context(curve, per, target_tol=args.tol)
    return make_potential(curve, support, per=per, sigma_ctx=sctx)


# ---------------------------------------------------------------------------
# commands


def cmd_periods(args) -> int:
    curve = load_curve(args.curve)
    per = compute_periods(curve)
    mats = {
        "omega": per.omega,
        "omega_p": per.omega_p,
        "eta": per.eta,
        "eta_p": per.eta_p,
        "tau": per.tau,
        "kappa": per.kappa,
    }
    res = per.legendre_residual()
    rows = []
    for name, m in mats.items():
        for (i, j), v in np.ndenumerate(m):
            rows.append([name, i + 1, j + 1, v.real, v.imag])
    meta = base_meta(args, curve)
    meta["legendre_residual"] = res
    emit_table(args, ["name", "i", "j", "re", "im"], rows, meta)
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suite

    curve = load_curve(args.curve)
    results = run_suite(curve, n_args=args.n_args, seed=args.seed)
    rows = [[r.name, r.residual, r.threshold, "PASS" if r.passed else "FAIL"] for r in results]
    meta = base_meta(args, curve)
    meta["n_args"] = args.n_args
    meta["seed"] = args.seed
    emit_table(args, ["identity", "residual", "threshold", "status"], rows, meta)
    return 0 if all(r.passed for r in results) else 1


def cmd_potential(args) -> int:
    curve = load_curve(args.curve)
    pot = build_potential(args, curve, parse_support(args.omega_support))
    x = grid(args.x0, args.x1, args.n)
    trace = pot.jet(x).wp(pot.genus, pot.genus)
    u = float(np.sum(curve.E)) - 2.0 * trace
    rows = [[xi, ui.real, abs(ui.imag)] for xi, ui in zip(x, u)]
    emit_table(args, ["x", "u", "error_estimate"], rows, base_meta(args, curve, pot))
    return 0


def cmd_bands(args) -> int:
    curve = load_curve(args.curve)
    pot = build_potential(args, curve, parse_support(args.omega_support))
    avg = average_S(pot)
    pad = 0.25 * curve.scale
    xi0 = curve.E[0] - pad if args.xi0 is None else args.xi0
    xi1 = curve.E[-1] + pad if args.xi1 is None else args.xi1
    xi = grid(xi0, xi1, args.n)
    dos = density_of_states(avg, curve, xi)
    rows = [[a, math.pi * b, b] for a, b in zip(xi, dos)]
    meta = base_meta(args, curve, pot)
    meta["bands"] = [[float(curve.E[2 * k]), float(curve.E[2 * k + 1])] for k in range(curve.genus)]
    emit_table(args, ["xi", "k", "n"], rows, meta)
    return 0


def cmd_averages(args) -> int:
    curve = load_curve(args.curve)
    pot = build_potential(args, curve, parse_support(args.omega_support))
    avg = average_S(pot)
    payload = base_meta(args, curve, pot)
    payload["s"] = avg.s
    payload["mode"] = avg.mode
    payload["roots"] = avg.roots()
    if args.window is not None:
        est = ergodic_window_estimate(pot, L0=args.window, levels=args.levels)
        payload["window"] = {
            "lengths": est.windows,
            "estimate": est.estimate.real,
            "error_bar": est.error_bar,
            "discrepancy": np.abs(est.estimate.real - avg.s),
        }
    emit_json(args, payload)
    return 0


def cmd_bloch(args) -> int:
    curve = load_curve(args.curve)
    pot = build_potential(args, curve, parse_support(args.omega_support))
    lam = float(args.lam)
    if args.band is not None:
        if not 1 <= args.band <= curve.genus + 1:
            raise ConfigError(f"band index {args.band} outside 1..{curve.genus + 1}")
        lo = curve.E[2 * args.band - 2]
        hi = curve.E[2 * args.band - 1] if args.band <= curve.genus else math.inf
        if not lo <= lam <= hi:
            raise ConfigError(f"lambda = {lam} is not in band {args.band}")
    avg = average_S(pot)
    p = point(curve, lam)
    x = grid(args.x0, args.x1, args.n)
    psi = bloch_psi(pot, avg, x, p)
    # consistency of the two Weyl-function routes as the error estimate
    wz = weyl_w(pot, x, p, "zeta")
    ws = weyl_w(pot, x, p, "S")
    err = np.abs(wz - ws) / (1.0 + np.abs(ws))
    meta = base_meta(args, curve, pot)
    meta["lambda"] = lam
    meta["quasimomentum"] = quasimomentum(avg, curve, p)
    rows = [[a, b.real, b.imag, e] for a, b, e in zip(x, psi, err)]
    emit_table(args, ["x", "re_psi", "im_psi", "residual"], rows, meta)
    return 0


def _wannier_potential(args, curve: Curve):
    from .wannier import wannier_support

    if not 1 <= args.band <= curve.genus:
        raise ConfigError(f"band index {args.band} outside 1..{curve.genus}")
    support = parse_support(args.omega_support)
    if support is None:
        support = wannier_support(curve.genus, args.band)
    return build_potential(args, curve, support)


def cmd_wannier(args) -> int:
    from .wannier import crossover_threshold, evaluate_series, wannier_asymptotic, wannier_direct, wannier_series

    curve = load_curve(args.curve)
    pot = _wannier_potential(args, curve)
    avg = average_S(pot)
    n = args.band
    x = grid(args.x0, args.x1, args.n)
    L = pot.length_scale
    series = wannier_series(pot, n, args.order, avg)
    x_cross = crossover_threshold(series, 2.0 * L)
    x_far = 10.0 * L
    if args.method == "auto":
        methods = np.where(np.abs(x) < x_cross, "series", np.where(np.abs(x) > x_far, "asymptotic", "direct"))
    else:
        methods = np.full(len(x), args.method)
    W = np.empty(len(x))
    err = np.full(len(x), np.nan)
    for m in ("direct", "series", "asymptotic"):
        sel = methods == m
        if not np.any(sel):
            continue
        if m == "direct":
            res = wannier_direct(pot, n, x[sel], avg)
            W[sel] = res.W
            err[sel] = res.max_imag
        elif m == "series":
            res = evaluate_series(series, x[sel])
            W[sel] = res.W
            err[sel] = res.tail
        else:
            # W is even in x: the potential is symmetric about x = 0
            ax = np.abs(x[sel])
            W[sel] = wannier_asymptotic(pot, n, ax, avg)
            # the leading term is off by O(1/x); calibrate the constant on one length scale
            x_ref = max(x_far, float(np.min(ax)))
            ref = np.linspace(x_ref, x_ref + L, 81)
            d = wannier_direct(pot, n, ref, avg).W
            a = wannier_asymptotic(pot, n, ref, avg)
            rel = np.max(np.abs(d - a)) / np.max(np.abs(a))
            # pointwise errors near nodes follow the local envelope, not |W|
            t = np.linspace(-0.5 * L, 0.5 * L, 33)
            probe = np.abs(ax[:, None] + t[None, :]).ravel()
            env = np.max(np.abs(wannier_asymptotic(pot, n, probe, avg)).reshape(len(ax), -1), axis=1)
            err[sel] = env * rel * x_ref / ax
    meta = base_meta(args, curve, pot)
    meta.update(
        band=n,
        series_order=args.order,
        crossover=x_cross,
        asymptotic_from=x_far,
        saddle_derivative="d<S>/dlambda of the x-independent average",
    )
    rows = [[a, b, m, e] for a, b, m, e in zip(x, W, methods, err)]
    emit_table(args, ["x", "W", "method", "error_estimate"], rows, meta)
    return 0


def cmd_wannier_moments(args) -> int:
    from .wannier import display_values, moments, q_from_display, wannier_series

    curve = load_curve(args.curve)
    pot = _wannier_potential(args, curve)
    if args.kmax < 0:
        raise ConfigError("--kmax must be non-negative")
    avg = average_S(pot)
    series = wannier_series(pot, args.band, 2 * args.kmax, avg)
    payload = base_meta(args, curve, pot)
    payload.update(
        band=args.band,
        moments=moments(pot, args.band, args.kmax, avg),
        W_coefficients=series.W_coeffs.real,
        q=series.q.real,
    )
    if args.kmax >= 3:
        dv = display_values(pot)
        qd = q_from_display(dv["wp_gg"], dv["wp_gggg"], dv["wp_gggggg"])
        payload["display_mismatch"] = float(np.max(np.abs(qd - series.q[:4, :4])))
    emit_json(args, payload)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", required=True, help="JSON file with branch_points")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, default=1e-16, help="theta truncation tolerance")
    common.add_argument("--omega-support", default=None, help='half-period support, e.g. "2,4"')

    grid_args = argparse.ArgumentParser(add_help=False)
    grid_args.add_argument("--x0", type=float, default=0.0)
    grid_args.add_argument("--x1", type=float, default=10.0)
    grid_args.add_argument("--n", type=int, default=101)

    p = argparse.ArgumentParser(prog="finitegap", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("periods", parents=[common], help="period matrices and Legendre residual")
    v = sub.add_parser("verify", parents=[common], help="identity suite; nonzero exit on failure")
    v.add_argument("--n-args", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    sub.add_parser("potential", parents=[common, grid_args], help="potential u(x)")
    b = sub.add_parser("bands", parents=[common], help="quasi-momentum and density of states")
    b.add_argument("--xi0", type=float, default=None)
    b.add_argument("--xi1", type=float, default=None)
    b.add_argument("--n", type=int, default=201)
    a = sub.add_parser("averages", parents=[common], help="<S> coefficients, optionally with windowed estimate")
    a.add_argument("--window", type=float, default=None, help="smallest averaging window")
    a.add_argument("--levels", type=int, default=4)
    bl = sub.add_parser("bloch", parents=[common, grid_args], help="normalised Bloch function")
    bl.add_argument("--lambda", dest="lam", type=float, required=True)
    bl.add_argument("--band", type=int, default=None)
    w = sub.add_parser("wannier", parents=[common, grid_args], help="Wannier function of a band")
    w.add_argument("--band", type=int, default=1)
    w.add_argument("--method", choices=("direct", "series", "asymptotic", "auto"), default="auto")
    w.add_argument("--order", type=int, default=6, help="series order (even)")
    wm = sub.add_parser("wannier-moments", parents=[common], help="moments M_k and series coefficients")
    wm.add_argument("--band", type=int, default=1)
    wm.add_argument("--kmax", type=int, default=3)
    return p


COMMANDS = {
    "periods": cmd_periods,
    "verify": cmd_verify,
    "potential": cmd_potential,
    "bands": cmd_bands,
    "averages": cmd_averages,
    "bloch": cmd_bloch,
    "wannier": cmd_wannier,
    "wannier-moments": cmd_wannier_moments,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return 2
    except FiniteGapError as exc:
        print(f"ComputeError ({args.command}): {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
