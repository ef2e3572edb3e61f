"""Data of the singular problem: truncation, the regularized source, γ fields.

Sources f, initial data u₀ and exponent fields γ are accepted as named
analytic presets, as callables, or as gridded CSV tables with columns
``node,step,value``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Union

import numpy as np

from singlab.grid import Grid, StripMask

__all__ = [
    "truncate",
    "regularized_rhs",
    "GammaField",
    "SourceData",
    "GammaReport",
    "validate_gamma_profile",
    "PRESETS",
    "GAMMA_PRESETS",
    "make_preset",
    "make_gamma",
    "load_gridded_csv",
    "write_gridded_csv",
]

FieldLike = Union[float, np.ndarray, Callable]


def truncate(sigma, k: float):
    """T_k(σ) = max(-k, min(k, σ))."""
    if k <= 0:
        raise ValueError("truncation level must be positive")
    return np.clip(sigma, -k, k) if isinstance(sigma, np.ndarray) else max(-k, min(k, sigma))


def regularized_rhs(f, u: np.ndarray, gamma, k: float) -> np.ndarray:
    """T_k(f) / (u + 1/k)^γ, pointwise.

    A negative entry in ``u`` means positivity was lost upstream and is
    treated as a contract violation.
    """
    u = np.asarray(u, dtype=float)
    if k < 1:
        raise ValueError(f"ladder level must be >= 1, got {k}")
    if np.any(u < 0):
        i = int(np.argmin(u))
        raise ValueError(f"negative state u[{i}] = {u[i]:.3e} passed to the singular source")
    fk = truncate(np.asarray(f, dtype=float), k)
    return fk * (u + 1.0 / k) ** (-np.asarray(gamma, dtype=float))


@dataclass(frozen=True, eq=False)
class GammaField:
    """Exponent γ(x, t) sampled at nodes and time levels.

    ``values`` is a float for a constant field, an (I,) array for a field
    constant in time, or an (M+1, I) array.
    """

    values: float | np.ndarray
    kind: str = "constant"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0 or np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("γ must be finite and strictly positive everywhere")

    @classmethod
    def constant(cls, value: float) -> GammaField:
        return cls(float(value), "constant")

    @classmethod
    def from_function(cls, fn: Callable, grid: Grid, times: np.ndarray) -> GammaField:
        vals = np.stack([np.broadcast_to(fn(grid.node_coords, t), (grid.interior_count,)) for t in times])
        return cls(np.ascontiguousarray(vals, dtype=float), "varying")

    @property
    def is_constant(self) -> bool:
        return np.ndim(self.values) == 0

    @property
    def gamma_star_lower(self) -> float:
        return float(np.min(self.values))

    @property
    def gamma_star_upper(self) -> float:
        return float(np.max(self.values))

    def at(self, m: int):
        v = self.values
        if np.ndim(v) == 0:
            return float(v)
        if np.ndim(v) == 1:
            return v
        return v[m]

    def sampled(self, steps: int, size: int) -> np.ndarray:
        """Full (steps + 1, size) table."""
        return np.stack([np.broadcast_to(self.at(m), (size,)) for m in range(steps + 1)])


def _evaluate(data: FieldLike, grid: Grid, t: float, m: int) -> np.ndarray:
    if callable(data):
        vals = data(grid.node_coords, t)
    else:
        arr = np.asarray(data, dtype=float)
        vals = arr[m] if arr.ndim == 2 else arr
    return np.array(np.broadcast_to(vals, (grid.interior_count,)), dtype=float)


@dataclass(frozen=True, eq=False)
class SourceData:
    """Nonnegative source f(x, t) and initial datum u₀(x).

    ``declared_class`` records the integrability class the user asserts for
    f (e.g. ``"L^inf"``, ``"L^r(0,T;L^q)"``); it is metadata only.
    ``signed=True`` admits a sign-changing f; only manufactured-solution
    verification uses it.
    """

    f: FieldLike
    u0: FieldLike = 0.0
    declared_class: str = "unspecified"
    description: dict = field(default_factory=dict)
    signed: bool = False

    def f_at(self, grid: Grid, t: float, m: int) -> np.ndarray:
        vals = _evaluate(self.f, grid, t, m)
        if not self.signed and np.any(vals < 0):
            raise ValueError("source f must be nonnegative")
        return vals

    def u0_on(self, grid: Grid) -> np.ndarray:
        vals = _evaluate(self.u0, grid, 0.0, 0)
        if np.any(vals < 0):
            raise ValueError("initial datum u0 must be nonnegative")
        return vals

    def scaled(self, factor: float) -> SourceData:
        f = self.f
        if callable(f):
            g = lambda x, t, f=f: factor * np.asarray(f(x, t))  # noqa: E731
        else:
            g = factor * np.asarray(f, dtype=float)
        return replace(self, f=g, description={**self.description, "f_scale": factor})

    def shifted(self, offset: float) -> SourceData:
        """Raise u₀ by ``offset`` on the interior nodes."""
        u0 = self.u0
        if callable(u0):
            v = lambda x, t, u0=u0: np.asarray(u0(x, t)) + offset  # noqa: E731
        else:
            v = np.asarray(u0, dtype=float) + offset
        return replace(self, u0=v, description={**self.description, "u0_offset": offset})


# presets ------------------------------------------------------------------


def _dist(x: np.ndarray) -> np.ndarray:
    return np.minimum(x, 1.0 - x).min(axis=1)


def _constant(value: float = 1.0):
    return lambda x, t: np.full(x.shape[0], float(value))


def _bump(amplitude: float = 1.0):
    return lambda x, t: amplitude * np.prod(np.sin(np.pi * x), axis=1)


def _boundary_singular(b: float = 0.5, amplitude: float = 1.0):
    # nodes sit at distance >= h from ∂Ω, which is the grid-scale truncation
    return lambda x, t: amplitude * _dist(x) ** (-b)


def _space_time_singular(a: float = 0.4, b: float = 0.5, amplitude: float = 1.0, t_floor: float = 1e-6):
    return lambda x, t: amplitude * max(t, t_floor) ** (-a) * _dist(x) ** (-b)


# name -> (factory, declared class as a function of the parameters)
PRESETS: dict[str, tuple[Callable, Callable[..., str]]] = {
    "zero": (lambda: _constant(0.0), lambda **p: "L^inf"),
    "constant": (_constant, lambda **p: "L^inf"),
    "bump": (_bump, lambda **p: "L^inf"),
    # dist^-b is in L^q(Ω) exactly for q < 1/b
    "boundary_singular": (
        _boundary_singular,
        lambda b=0.5, **p: f"L^m(Omega_T) for m < {1.0 / b:.6g}",
    ),
    # t^-a in L^r(0,T) for r < 1/a, dist^-b in L^q(Ω) for q < 1/b
    "space_time_singular": (
        _space_time_singular,
        lambda a=0.4, b=0.5, **p: f"L^r(0,T;L^q) for r < {1.0 / a:.6g}, q < {1.0 / b:.6g}",
    ),
}


def make_preset(name: str, **params) -> tuple[Callable, str]:
    """Analytic preset ``name`` and the class it belongs to."""
    try:
        factory, cls = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
    return factory(**params), cls(**params)


def _gamma_boundary_ramp(base: float = 0.5, slope: float = 1.0):
    """γ = base + slope·dist(x, ∂Ω)."""
    return lambda x, t: base + slope * _dist(x)


def _gamma_parabolic_ramp(base: float = 0.5, slope: float = 1.0):
    """γ = base + slope·min(dist(x, ∂Ω), t): grows with distance to the parabolic boundary."""
    return lambda x, t: base + slope * np.minimum(_dist(x), t)


GAMMA_PRESETS: dict[str, Callable] = {
    "boundary_ramp": _gamma_boundary_ramp,
    "parabolic_ramp": _gamma_parabolic_ramp,
}


def make_gamma(spec, grid: Grid | None = None, times: np.ndarray | None = None, **params) -> GammaField:
    """γ from a number, a preset name, or a CSV path (``csv:<path>``)."""
    if isinstance(spec, (int, float)):
        return GammaField.constant(float(spec))
    if isinstance(spec, str) and spec.startswith("csv:"):
        vals = load_gridded_csv(spec[4:], grid, len(times) - 1)
        return GammaField(vals, "varying")
    if spec not in GAMMA_PRESETS:
        raise ValueError(f"unknown γ preset {spec!r}; available: {sorted(GAMMA_PRESETS)}")
    return GammaField.from_function(GAMMA_PRESETS[spec](**params), grid, times)


@dataclass
class GammaReport:
    mode: str
    passed: bool
    sup_on_strip: float
    threshold: float
    worst_node: int | None
    worst_step: int | None
    worst_point: tuple[float, ...] | None


VALIDATION_MODES = ("strip-at-most-one", "strip-below-threshold")


def validate_gamma_profile(
    gamma: GammaField,
    strip: StripMask,
    mode: str,
    threshold: float | None = None,
    grid: Grid | None = None,
) -> GammaReport:
    """Check the strip hypotheses on γ near the parabolic boundary.

    ``strip-at-most-one``: γ <= 1 on the strip.
    ``strip-below-threshold``: sup of γ on the strip < ``threshold``.
    """
    if mode not in VALIDATION_MODES:
        raise ValueError(f"mode must be one of {VALIDATION_MODES}")
    steps, size = strip.flags.shape
    table = gamma.sampled(steps - 1, size)
    masked = np.where(strip.flags, table, -np.inf)
    if not strip.flags.any():
        sup, node, step = -np.inf, None, None
    else:
        flat = int(np.argmax(masked))
        step, node = divmod(flat, size)
        sup = float(masked.flat[flat])
    if mode == "strip-at-most-one":
        limit = 1.0
        passed = sup <= 1.0
    else:
        if threshold is None:
            raise ValueError("strip-below-threshold needs a threshold γ*")
        limit = float(threshold)
        passed = sup < limit
    point = tuple(grid.node_coords[node]) if (grid is not None and node is not None) else None
    return GammaReport(mode, bool(passed), sup, limit, node, step, point)


# gridded CSV ----------------------------------------------------------------


def load_gridded_csv(path: str | Path, grid: Grid, steps: int) -> np.ndarray:
    """Read ``node,step,value`` rows.

    Rows for step 0 only give a time-independent (I,) array; otherwise every
    (node, step) pair with step 0..steps must be present.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"node", "step", "value"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header node,step,value")
        for r in reader:
            rows.append((int(r["node"]), int(r["step"]), float(r["value"])))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    size = grid.interior_count
    nodes = np.array([r[0] for r in rows])
    stps = np.array([r[1] for r in rows])
    vals = np.array([r[2] for r in rows])
    if nodes.min() < 0 or nodes.max() >= size:
        raise ValueError(f"{path}: node index outside 0..{size - 1}")
    if stps.max() == 0:
        out = np.full(size, np.nan)
        out[nodes] = vals
    else:
        out = np.full((steps + 1, size), np.nan)
        if stps.max() > steps or stps.min() < 0:
            raise ValueError(f"{path}: step index outside 0..{steps}")
        out[stps, nodes] = vals
    if np.isnan(out).any():
        raise ValueError(f"{path}: missing (node, step) entries")
    return out


def write_gridded_csv(path: str | Path, values: np.ndarray) -> None:
    values = np.atleast_2d(values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "step", "value"])
        for m, row in enumerate(values):
            for i, v in enumerate(row):
                w.writerow([i, m, repr(float(v))])
