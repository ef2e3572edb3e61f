"""Torsion benchmark across resolutions and orders: error of the discrete operator on the profile."""

import argparse

from singlab.experiments import torsion_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="*", default=[64, 128, 256, 512, 1024])
    ap.add_argument("--s", type=float, nargs="*", default=[0.25, 0.5, 0.75])
    args = ap.parse_args()
    print(f"{'s':>5} {'N':>6} {'max rel err':>12} {'quad check':>11} {'seconds':>8}")
    for s in args.s:
        for N in args.N:
            r = torsion_benchmark(N, s)
            print(f"{s:5.2f} {N:6d} {r['max_rel_error']:12.3e} {r['quadrature_max_rel_error']:11.1e} {r['seconds']:8.3f}")


if __name__ == "__main__":
    main()
