"""Spatial and temporal convergence orders against a manufactured solution, for several s."""

import argparse

from singlab.experiments import run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", type=float, nargs="*", default=[0.25, 0.5, 0.75])
    ap.add_argument("--gamma", type=float, default=0.5)
    args = ap.parse_args()
    for s in args.s:
        rep = run_scenario("manufactured_convergence", {"s": s, "gamma": args.gamma})
        print(f"s = {s:g}")
        for row in rep.tables["space_convergence"]:
            print("  space ", ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
        for v in rep.verdicts:
            print(f"  {v.name}: {v.measured:.4g}")


if __name__ == "__main__":
    main()
