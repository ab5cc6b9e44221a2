"""Absorption probabilities of a walk three ways: integral representation,
truncated-lattice solve and Monte Carlo.

    python3 demos/absorption_three_ways.py [demos/walks/W3.json] [--paths 200000]
"""
import argparse
from pathlib import Path

from qwalk.genfun import absorbed_bounds, absorption_gf
from qwalk.oracle import dp_absorption, mc_absorption
from qwalk.walk_model import load_walk


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("walk", nargs="?", default=str(Path(__file__).parent / "walks" / "W3.json"))
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--N", type=int, default=400)
    args = ap.parse_args()

    w = load_walk(args.walk)
    agf = absorption_gf(w)
    dp = dp_absorption(w, args.N)
    mc = mc_absorption(w, args.paths, seed=1)
    h, ht = agf.coefficients(8)
    print(f"walk {args.walk}, start ({w.n0}, {w.m0})")
    print(f"{'k':>3} {'h_k analytic':>16} {'h_k DP':>16} {'h_k MC':>10} {'+-':>8}")
    for k in range(1, 9):
        est, se = mc.estimate("h", k)
        print(f"{k:>3} {h[k - 1]:16.12f} {dp.h[k - 1]:16.12f} {est:10.6f} {se:8.1e}")
    lo, hi = absorbed_bounds(w)
    est, se = mc.estimate("total")
    print(f"total: analytic {agf.total:.12f}, DP {dp.total:.12f} "
          f"(N vs N/2 bound {dp.error_bound:.1e}), MC {est:.5f} +- {se:.1e}")
    print(f"a-priori bracket [{lo:.6f}, {hi:.6f}]")


if __name__ == "__main__":
    main()
