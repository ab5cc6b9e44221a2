"""Tail asymptotics of h_k and Green-function asymptotics against the exact values.

    python3 demos/tails_and_green.py [demos/walks/W1.json]
"""
import sys
from pathlib import Path

from qwalk.asymptotics import green_axis, green_interior, tail_asymptotics
from qwalk.genfun import absorption_gf
from qwalk.oracle import dp_green
from qwalk.walk_model import load_walk


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).parent / "walks" / "W1.json")
    agf = absorption_gf(load_walk(path))
    ta = tail_asymptotics(agf)
    print(f"regime {ta.regime}, rate x3 = {ta.rate:.12f}, constant {ta.constant:.12f}")
    h = agf.hx.coefficients(192)
    print(f"{'k':>4} {'h_k':>12} {'h_k / asymptotic':>18} {'(ratio - 1) k':>14}")
    for k in (12, 24, 48, 96, 192):
        r = h[k - 1] / ta.predict(k)
        print(f"{k:>4} {h[k - 1]:12.4e} {r:18.6f} {(r - 1) * k:14.4f}")

    G = dp_green(agf.walk, 300)
    print("\nGreen function: asymptotic / exact (box N = 300)")
    for i in (7, 14, 28, 56):
        print(f"  diagonal i = j = {i:>2}: {green_interior(agf, i, i) / G[i - 1, i - 1]:.4f}")
    for i in (10, 20, 40, 80):
        print(f"  axis i = {i:>2}, j = 2:   {green_axis(agf, i, 2) / G[i - 1, 1]:.4f}")


if __name__ == "__main__":
    main()
