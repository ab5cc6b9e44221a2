"""Command-line front end: ``qwalk <subcommand> --walk W.json [options]``.

Subcommands
-----------
validate  check a walk file and print its drift
analyze   periods, group of the walk and (``--cgf``) the gluing function
absorb    absorption probabilities h_k, ht_k, h00, total and bounds
tails     tail constants and the empirical tail ratios
green     leading-order Green function (interior or axis), optionally vs DP
oracle    truncated-lattice (``--mode dp``) or Monte Carlo (``--mode mc``)
compare   analytic vs oracle discrepancy table; exit 0 iff every gate passes

Exit codes: 0 success, 1 failed gate or computational error, 2 input error.
Output is JSON (sorted keys, floats in shortest round-trip form) written to
``--out`` (default ``-``, standard output); ``compare`` and ``tails`` also
accept ``--format csv``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from math import atan, pi

import numpy as np

from . import constants
from .curve import Curve
from .elliptic import EllipticData
from .errors import InputError, QWalkError
from .walk_model import load_walk

GATE_TOL = 1e-4          # analytic vs DP, per entry
MC_SIGMAS = 3.0          # analytic vs MC, in standard errors
AXIS_LOW, AXIS_HIGH = 0.05, 20.0

REGIME_LABEL = {"Even2N": "omega-ratio-2N", "Odd2N1": "omega-ratio-2N+1",
                "Irrational": "omega-ratio-not-integer"}


# --- serialization -----------------------------------------------------------

def _plain(obj):
    """Recursively convert numpy / complex / non-finite values to JSON-safe ones."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        if z.imag == 0:
            return _plain(z.real)
        return {"re": _plain(z.real), "im": _plain(z.imag)}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, Python's shortest round-trip float repr."""
    return json.dumps(_plain(obj), sort_keys=True, indent=1) + "\n"


def _emit(text: str, out: str):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([repr(float(r[c])) if isinstance(r[c], (float, np.floating)) else r[c]
                     for c in columns])
    return buf.getvalue()


# --- helpers --------------------------------------------------------------------

def _walk(args, skip_drift_check: bool = False):
    w = load_walk(args.walk, skip_drift_check=skip_drift_check)
    if args.start is not None:
        w = w.with_start(*args.start)
    return w


def _meta(**extra):
    out = {"tolerances": {"sum": constants.SUM_TOL, "quad": constants.QUAD_TOL,
                          "ratio": constants.RATIO_TOL, "ratio_max_den": constants.RATIO_MAX_DEN,
                          "newton": constants.NEWTON_TOL}}
    out.update(extra)
    return out


def _agf(w, kmax: int = 256):
    from .genfun import absorption_gf
    return absorption_gf(w, kmax=max(kmax, 64))


# --- subcommands -------------------------------------------------------------------

def cmd_validate(args) -> tuple[dict, int]:
    w = _walk(args)
    return {"valid": True, "drift": list(w.drift), "start": [w.n0, w.m0],
            "diagonal": w.is_diagonal}, 0


def cmd_analyze(args) -> tuple[dict, int]:
    # zero-drift walks are accepted here: periods and the group are still defined
    w = _walk(args, skip_drift_check=True)
    curve = Curve(w)
    ed = EllipticData(curve)
    g = ed.group
    out = {"omega": [ed.omega1.imag, ed.omega2, ed.omega3],
           "omega1_is_imaginary": True,
           "group": g.as_dict(), "delta": ed.delta,
           "branch_points_x": list(curve.bx.as_tuple()),
           "branch_points_y": list(curve.by.as_tuple()),
           "drift": list(w.drift), "diagonal": w.is_diagonal,
           "period_check": max(ed.period_checks()),
           "meta": _meta(regime_assumed=g.regime)}
    if args.cgf:
        if curve.cp.zero_drift:
            out["cgf"] = None
        else:
            from .gluing import Gluing
            gl = Gluing(ed)
            out["cgf"] = gl.as_dict()
            out["cgf"]["gluing_defect"] = gl.gluing_defect()
    return out, 0


def cmd_absorb(args) -> tuple[dict, int]:
    from .genfun import absorbed_bounds
    w = _walk(args)
    agf = _agf(w, args.kmax)
    h, ht = agf.coefficients(args.kmax)
    lo, hi = absorbed_bounds(w)
    out = {"h00": agf.h00, "h": h, "htilde": ht, "total": agf.total,
           "bounds": [lo, hi], "regime": REGIME_LABEL[agf.gl.regime],
           "meta": _meta(regime_assumed=agf.gl.regime, h00_spread=agf.h00_spread,
                         coefficient_radius=agf.hx.radius,
                         group=agf.ed.group.as_dict())}
    return out, 0


def cmd_tails(args) -> tuple[dict, int]:
    from .asymptotics import tail_asymptotics
    w = _walk(args)
    agf = _agf(w, args.kmax)
    ta = tail_asymptotics(agf)
    kmax = min(args.kmax, agf.hx.achievable_kmax)
    h = agf.hx.coefficients(kmax)
    rows = []
    for k in range(1, kmax + 1):
        if w.is_diagonal and (k + w.n0 - w.m0) % 2:
            continue  # unreachable parity
        pred = float(ta.predict(k))
        rows.append({"k": k, "h": float(h[k - 1]), "predicted": pred,
                     "ratio": float(h[k - 1]) / pred})
    out = {"asymptotics": ta.as_dict(), "table": rows,
           "meta": _meta(regime_assumed=ta.regime, kmax_used=kmax)}
    if args.format == "csv":
        return {"_csv": _csv(rows, ["k", "h", "predicted", "ratio"])}, 0
    return out, 0


def _green_value(agf, i, j, direction):
    """(method, value) choosing the axis formula near either axis."""
    from .asymptotics import green_axis, green_interior
    ratio = j / i
    if direction is not None and direction == 0:
        return "axis", green_axis(agf, i, j)
    if direction is not None and abs(direction - pi / 2) < 1e-15:
        return "axis-vertical", green_axis(_agf(agf.walk.transposed()), j, i)
    if ratio < AXIS_LOW:
        return "axis", green_axis(agf, i, j)
    if ratio > AXIS_HIGH:
        return "axis-vertical", green_axis(_agf(agf.walk.transposed()), j, i)
    return "interior", green_interior(agf, i, j)


def cmd_green(args) -> tuple[dict, int]:
    from .asymptotics import green_axis, green_interior
    w = _walk(args)
    agf = _agf(w)
    i, j = args.i, args.j
    if i < 1 or j < 1:
        raise InputError("i and j must be positive")
    method, val = _green_value(agf, i, j, args.direction)
    out = {"i": i, "j": j, "gamma": atan(j / i), "method": method, "value": val,
           "meta": _meta(axis_band=[AXIS_LOW, AXIS_HIGH])}
    r = j / i
    if method != "interior" and AXIS_LOW / 2 <= r <= 2 * AXIS_LOW:
        out["interior_value"] = green_interior(agf, i, j)
        out["note"] = "near the axis threshold: both formulas reported"
    elif method == "interior" and r <= 2 * AXIS_LOW:
        out["axis_value"] = green_axis(agf, i, j)
        out["note"] = "near the axis threshold: both formulas reported"
    if args.oracle:
        from .oracle import dp_green
        N = args.N or max(200, 4 * max(i, j))
        g = dp_green(w, N)
        out["oracle"] = {"N": N, "value": float(g[i - 1, j - 1]),
                         "ratio": val / float(g[i - 1, j - 1]) if g[i - 1, j - 1] else None}
    return out, 0


def cmd_oracle(args) -> tuple[dict, int]:
    w = _walk(args)
    if args.mode == "dp":
        from .oracle import dp_absorption
        res = dp_absorption(w, args.N)
        out = res.as_dict(args.kmax)
        out["mode"] = "dp"
        return out, 0
    from .oracle import mc_absorption
    res = mc_absorption(w, args.paths, seed=args.seed, threads=args.threads)
    out = res.as_dict(args.kmax)
    out["mode"] = "mc"
    return out, 0


def cmd_compare(args) -> tuple[dict, int]:
    from .oracle import dp_absorption, mc_absorption
    w = _walk(args)
    agf = _agf(w, args.kmax)
    h, ht = agf.coefficients(args.kmax)
    dp = dp_absorption(w, args.N)
    rows = []

    def add(q, a, o, tol, kind):
        d = abs(a - o)
        rows.append({"quantity": q, "analytic": float(a), "oracle": float(o), "oracle_kind": kind,
                     "abs_diff": float(d), "tolerance": float(tol), "pass": bool(d <= tol)})
    for k in range(1, args.kmax + 1):
        add(f"h_{k}", h[k - 1], dp.h[k - 1], GATE_TOL, "dp")
    for k in range(1, args.kmax + 1):
        add(f"htilde_{k}", ht[k - 1], dp.ht[k - 1], GATE_TOL, "dp")
    add("h00", agf.h00, dp.h00, GATE_TOL, "dp")
    add("total", agf.total, dp.total, GATE_TOL, "dp")
    if args.paths:
        mc = mc_absorption(w, args.paths, seed=args.seed, threads=args.threads)
        for name, val in (("h00", agf.h00), ("total", agf.total), ("h", agf.h1),
                          ("htilde", agf.ht1)):
            if name in ("h", "htilde"):
                est = sum(mc.estimate(name, k)[0] for k in (mc.h if name == "h" else mc.ht))
                se = math.sqrt(max(est * (1 - est), 0.0) / mc.n_paths)
            else:
                est, se = mc.estimate(name)
            add(f"{name}(1)" if name in ("h", "htilde") else name, val, est,
                MC_SIGMAS * max(se, 1.0 / mc.n_paths), "mc")
    ok = all(r["pass"] for r in rows)
    if args.format == "csv":
        return {"_csv": _csv(rows, ["quantity", "analytic", "oracle", "oracle_kind", "abs_diff",
                                    "tolerance", "pass"])}, 0 if ok else 1
    out = {"rows": rows, "all_pass": ok, "N": args.N, "kmax": args.kmax,
           "meta": _meta(regime_assumed=agf.gl.regime, dp_error_bound=dp.error_bound)}
    return out, 0 if ok else 1


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qwalk", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=False):
        sp.add_argument("--walk", required=True, help="walk JSON file")
        sp.add_argument("--start", type=int, nargs=2, metavar=("N0", "M0"),
                        help="override the start point")
        sp.add_argument("--out", default="-", help="output path, '-' for standard output")
        if fmt:
            sp.add_argument("--format", choices=("json", "csv"), default="json")
        return sp

    common(sub.add_parser("validate", help="check a walk file"))
    sp = common(sub.add_parser("analyze", help="periods and group"))
    sp.add_argument("--cgf", action="store_true", help="also report the gluing function")
    sp = common(sub.add_parser("absorb", help="absorption probabilities"))
    sp.add_argument("--kmax", type=int, default=50)
    sp = common(sub.add_parser("tails", help="tail asymptotics"), fmt=True)
    sp.add_argument("--kmax", type=int, default=64)
    sp = common(sub.add_parser("green", help="Green function asymptotics"))
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--direction", type=float, default=None,
                    help="force the axis formula with 0 (or pi/2)")
    sp.add_argument("--oracle", action="store_true", help="compare with the DP Green function")
    sp.add_argument("--N", type=int, default=None)
    sp = common(sub.add_parser("oracle", help="numerical oracles"))
    sp.add_argument("--mode", choices=("dp", "mc"), default="dp")
    sp.add_argument("--N", type=int, default=600)
    sp.add_argument("--paths", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--kmax", type=int, default=50)
    sp.add_argument("--threads", type=int, default=None)
    sp = common(sub.add_parser("compare", help="analytic vs oracle gates"), fmt=True)
    sp.add_argument("--kmax", type=int, default=20)
    sp.add_argument("--N", type=int, default=600)
    sp.add_argument("--paths", type=int, default=0, help="also run Monte Carlo with this many paths")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--threads", type=int, default=None)
    return p


COMMANDS = {"validate": cmd_validate, "analyze": cmd_analyze, "absorb": cmd_absorb,
            "tails": cmd_tails, "green": cmd_green, "oracle": cmd_oracle, "compare": cmd_compare}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse exits 2 on bad flags, 0 on --help
        return int(e.code or 0)
    try:
        out, code = COMMANDS[args.command](args)
    except (InputError, OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        print(f"qwalk: input error: {e}", file=sys.stderr)
        return 2
    except (QWalkError, ValueError, ArithmeticError) as e:
        print(f"qwalk: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    text = out["_csv"] if "_csv" in out else dumps(out)
    _emit(text, args.out)
    if code:
        print("qwalk: one or more gates failed", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
