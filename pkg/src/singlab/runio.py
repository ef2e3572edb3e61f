"""Run-directory persistence: snapshots, CSV tables, manifest, SVG plots.

Snapshots are raw little-endian float64 arrays (``.f64``) in C order with a
JSON sidecar of the same stem describing shape and provenance, so they can
be read without this package:

    numpy.fromfile("m00010.f64", dtype="<f8").reshape(meta["shape"])
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

__all__ = [
    "ManifestError",
    "snapshot_levels",
    "write_snapshot",
    "read_snapshot",
    "write_snapshot_set",
    "write_diagnostics",
    "write_table",
    "csv_row_count",
    "write_manifest",
    "read_manifest",
    "verify_manifest",
    "plot_norms",
    "plot_increments",
    "plot_convergence",
]

MANIFEST = "manifest.json"


class ManifestError(RuntimeError):
    pass


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def snapshot_levels(M: int, count: int = 11) -> list[int]:
    """Up to ``count`` evenly spaced time levels including 0 and M."""
    return sorted({int(round(x)) for x in np.linspace(0, M, min(M + 1, count))})


def write_snapshot(path: Path, u: np.ndarray, meta: dict) -> Path:
    path = Path(path)
    data = np.ascontiguousarray(u, dtype="<f8")
    path.with_suffix(".f64").write_bytes(data.tobytes(order="C"))
    side = {**meta, "shape": list(data.shape), "dtype": "<f8", "layout": "row-major"}
    path.with_suffix(".json").write_text(json.dumps(side, indent=2, sort_keys=True))
    return path.with_suffix(".f64")


def read_snapshot(path: Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    data = np.frombuffer(path.with_suffix(".f64").read_bytes(), dtype="<f8")
    return data.reshape(meta["shape"]), meta


def write_snapshot_set(directory: Path, traj, grid, s: float, count: int = 11) -> list[Path]:
    """Selected time levels of one trajectory, one file pair per level."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tau = float(traj.times[1] - traj.times[0]) if len(traj.times) > 1 else 0.0
    out = []
    for m in snapshot_levels(traj.fields.shape[0] - 1, count):
        meta = {
            "k": float(traj.k),
            "m": m,
            "t": float(traj.times[m]),
            "N": grid.N,
            "n": grid.n,
            "s": s,
            "tau": tau,
        }
        out.append(write_snapshot(directory / f"m{m:05d}", traj.fields[m], meta))
    return out


def write_table(path: Path, rows: list[dict]) -> int:
    """CSV with the header taken from the first row; returns the data row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if not rows:
            return 0
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) for k, v in row.items()})
    return len(rows)


def write_diagnostics(path: Path, traj) -> int:
    d = traj.diagnostics()
    rows = [
        {
            "step": int(d["step"][m]),
            "min": float(d["min"][m]),
            "max": float(d["max"][m]),
            "l2": float(d["l2"][m]),
            "iters": int(d["iters"][m]) if d["iters"] is not None else 0,
            "fp_iters": int(d["fp_iters"][m]) if d["fp_iters"] is not None else 0,
        }
        for m in range(len(d["step"]))
    ]
    return write_table(path, rows)


def csv_row_count(path: Path) -> int:
    with open(path, newline="") as fh:
        n = sum(1 for _ in csv.reader(fh))
    return max(n - 1, 0)


def write_manifest(run_dir: Path, manifest: dict) -> Path:
    path = Path(run_dir) / MANIFEST
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def read_manifest(run_dir: Path) -> dict:
    run_dir = Path(run_dir)
    path = run_dir / MANIFEST
    if not run_dir.is_dir():
        raise ManifestError(f"{run_dir} is not a directory")
    if not path.is_file():
        raise ManifestError(f"no {MANIFEST} in {run_dir}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: corrupt manifest ({exc})") from None
    for key in ("scenario", "verdicts", "files", "config"):
        if key not in data:
            raise ManifestError(f"{path}: missing field {key!r}")
    return data


def verify_manifest(run_dir: Path, manifest: dict) -> list[str]:
    """Integrity warnings: missing files and CSV row-count mismatches."""
    warnings = []
    for rel, info in sorted(manifest["files"].items()):
        p = Path(run_dir) / rel
        if not p.is_file():
            warnings.append(f"missing file {rel}")
            continue
        if "rows" in info:
            rows = csv_row_count(p)
            if rows != info["rows"]:
                warnings.append(f"row-count mismatch in {rel}: manifest {info['rows']}, found {rows}")
    return warnings


# plots ------------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "singlab"
    return plt


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    fig.clf()
    return Path(path)


def plot_norms(path: Path, curves: dict[str, tuple[np.ndarray, np.ndarray]], ylabel: str = "L2 norm") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, (t, y) in curves.items():
        ax.plot(t, y, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=7)
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_increments(path: Path, ks: list[float], increments: list[float]) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(ks, np.maximum(increments, 1e-300), "o-")
    ax.set_xlabel("k (upper rung)")
    ax.set_ylabel("max |u_k' - u_k|")
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_convergence(path: Path, series: dict[str, tuple[list[float], list[float]]], xlabel: str) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, (x, y) in series.items():
        ax.loglog(x, y, "o-", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("max error")
    ax.legend(fontsize=7)
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out
