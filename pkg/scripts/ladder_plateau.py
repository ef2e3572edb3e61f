"""Relative gap between consecutive ladder rungs in three dimensions, for several γ.

Shows how the rung-to-rung difference decays with k for bounded data.
"""

import argparse

from singlab.experiments import run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=16)
    ap.add_argument("--gammas", type=float, nargs="*", default=[0.5, 2.0])
    ap.add_argument("--ladder", type=float, nargs="*", default=[32, 64, 128, 256, 512, 1024])
    args = ap.parse_args()
    rep = run_scenario("aronson_serrin", {"N": args.N, "gammas": args.gammas, "ladder": args.ladder, "outside": {}})
    print(f"{'gamma':>6} {'k':>6} {'sup u':>10} {'rel gap':>9}")
    for row in rep.tables["plateau"]:
        gap = row["rel_gap_to_previous"]
        print(f"{row['gamma']:6g} {row['k']:6g} {row['sup']:10.6f} {gap if gap == '' else format(gap, '9.4%'):>9}")


if __name__ == "__main__":
    main()
