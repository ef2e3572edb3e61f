"""Run every configuration in configs/ through the CLI and print a summary.

    python3 scripts/run_all.py [--out runs] [--skip aronson_serrin ...]
"""

import argparse
import sys
import time
from pathlib import Path

from singlab.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--skip", nargs="*", default=[])
    args = ap.parse_args(argv)
    results = []
    for cfg in sorted((ROOT / "configs").glob("*.cfg")):
        if cfg.stem in args.skip:
            continue
        t0 = time.perf_counter()
        code = cli(["run", "--config", str(cfg), "--out", str(Path(args.out) / cfg.stem)])
        results.append((cfg.stem, code, time.perf_counter() - t0))
    print()
    for name, code, secs in results:
        print(f"{name:<26} exit {code}  {secs:7.1f} s")
    return max((code for _, code, _ in results), default=0)


if __name__ == "__main__":
    sys.exit(run())
