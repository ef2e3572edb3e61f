"""Backward-Euler integration of the k-regularized problems and the k-ladder.

Each step solves

    (I + τA) u^m = u^{m-1} + τ T_k(f^m) / (u^* + 1/k)^γ

with A = -Δ_h + (-Δ)^s_h and u^* = u^{m-1} (``imex-lagged``) or u^* = u^m
(``imex-fixed-point``). The implicit variant is solved by the linearized
fixed-point iteration

    (I + τA + τD(x)) x_new = u^{m-1} + τ (g(x) + D(x) x),   D = -g'(x) >= 0,

whose matrix is an M-matrix and whose right side stays nonnegative, so every
iterate is nonnegative. Because g is convex and decreasing the iteration is
Newton's method for a concave M-function: after one step the iterates are
subsolutions and increase monotonically to the root.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from singlab.grid import Grid
from singlab.linalg import ShiftedSystem
from singlab.operators import OperatorMatrix, assemble_combined
from singlab.source import GammaField, SourceData, regularized_rhs, truncate

__all__ = [
    "SCHEMES",
    "ORDER_TOL",
    "PositivityLost",
    "FixedPointDivergence",
    "ProblemSpec",
    "Trajectory",
    "LadderResult",
    "ComparisonReport",
    "step",
    "solve_parabolic",
    "solve_ladder",
    "compare_solutions",
    "solve_linear_majorant",
    "energy_balance",
    "energy_identity_defect",
    "time_monotonicity_defect",
    "lagged_step_limit",
]

SCHEMES = ("imex-lagged", "imex-fixed-point")
ORDER_TOL = 1e-10


class PositivityLost(RuntimeError):
    pass


class FixedPointDivergence(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    grid: Grid
    s: float
    gamma: GammaField
    source: SourceData
    T: float
    tau: float | None = None
    k_ladder: tuple[float, ...] = (1, 2, 4, 8, 16, 32, 64, 128)
    scheme: str = "imex-fixed-point"
    fixed_point_tol: float = 1e-10
    fixed_point_max_iters: int = 50
    linear_solver: str = "auto"
    linear_rtol: float = 1e-11
    threads: int = 1
    operator_override: OperatorMatrix | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.tau is None:
            object.__setattr__(self, "tau", 1e-3 * self.T)
        if not (self.T > 0 and self.tau > 0):
            raise ValueError("T and τ must be positive")
        ratio = self.T / self.tau
        if abs(ratio - round(ratio)) > 1e-12 * max(1.0, ratio):
            raise ValueError(f"T/τ = {ratio!r} is not an integer")
        ladder = tuple(float(k) for k in self.k_ladder)
        if not ladder or any(k < 1 for k in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError(f"ladder must be strictly increasing with levels >= 1: {ladder}")
        object.__setattr__(self, "k_ladder", ladder)
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.tau))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.tau

    @cached_property
    def operator(self) -> OperatorMatrix:
        if self.operator_override is not None:
            return self.operator_override
        return assemble_combined(self.grid, self.s)

    def system(self) -> ShiftedSystem:
        return ShiftedSystem(self.operator, self.tau, self.linear_solver, self.linear_rtol)

    def with_source(self, source: SourceData) -> ProblemSpec:
        return _replace(self, source=source)


def _replace(spec: ProblemSpec, **changes) -> ProblemSpec:
    from dataclasses import replace

    new = replace(spec, **changes)
    if "operator" in spec.__dict__ and new.grid is spec.grid and new.s == spec.s:
        new.__dict__["operator"] = spec.__dict__["operator"]
    return new


@dataclass(eq=False)
class Trajectory:
    """Interior fields at every time level and per-step diagnostics."""

    k: float
    times: np.ndarray
    fields: np.ndarray  # (M+1, I)
    cell_volume: float
    linear_iterations: np.ndarray = field(default=None)
    fixed_point_iterations: np.ndarray = field(default=None)

    @property
    def fields_per_step(self) -> np.ndarray:
        return self.fields

    @property
    def steps(self) -> int:
        return self.fields.shape[0] - 1

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]

    def diagnostics(self) -> dict[str, np.ndarray]:
        u = self.fields
        return {
            "step": np.arange(u.shape[0]),
            "min": u.min(axis=1),
            "max": u.max(axis=1),
            "l2": np.sqrt(self.cell_volume * np.einsum("mi,mi->m", u, u)),
            "iters": self.linear_iterations,
            "fp_iters": self.fixed_point_iterations,
        }


def _enforce_positivity(x: np.ndarray) -> np.ndarray:
    # the exact solution is nonnegative; only solver round-off may dip below 0
    lo = float(x.min())
    if lo < 0:
        scale = max(1.0, float(np.abs(x).max()))
        if lo < -1e-12 * scale:
            raise PositivityLost(f"linear solve returned min {lo:.3e}")
        x = np.maximum(x, 0.0)
    return x


def _implicit_step(u_prev, fk, gam, k, tau, system, tol, max_iters, stats):
    x = u_prev.copy()
    a = 1.0 / k
    lin = 0
    prev_diff = np.inf
    for it in range(1, max_iters + 1):
        v = x + a
        g = fk * v ** (-gam)
        d = gam * g / v
        rhs = u_prev + tau * (g + d * x)
        x_new, li = system.solve(rhs, shift=tau * d, x0=x)
        lin += li
        x_new = _enforce_positivity(x_new)
        diff = float(np.max(np.abs(x_new - x))) if x.size else 0.0
        x = x_new
        if diff <= tol:
            stats["fp_iters"] = it
            stats["lin_iters"] = lin
            return x
        prev_diff = diff
    raise FixedPointDivergence(
        f"singular-term iteration did not reach {tol:g} in {max_iters} sweeps "
        f"(last change {prev_diff:.3e}); try a smaller time step"
    )


def step(
    u_prev: np.ndarray,
    spec: ProblemSpec,
    k: float,
    m: int,
    system: ShiftedSystem | None = None,
    stats: dict | None = None,
    t_offset: float = 0.0,
) -> np.ndarray:
    """Advance from time level m-1 to m at ladder level k."""
    if np.any(u_prev < 0):
        raise ValueError("step needs a nonnegative previous state")
    system = system or spec.system()
    stats = {} if stats is None else stats
    t = t_offset + m * spec.tau
    f = spec.source.f_at(spec.grid, t, m)
    gam = spec.gamma.at(m)
    if spec.scheme == "imex-lagged":
        g = regularized_rhs(f, u_prev, gam, k)
        x, li = system.solve(u_prev + spec.tau * g)
        stats["lin_iters"] = li
        stats["fp_iters"] = 0
        return _enforce_positivity(x)
    fk = truncate(f, k)
    return _implicit_step(
        u_prev, fk, np.asarray(gam, dtype=float), k, spec.tau, system,
        spec.fixed_point_tol, spec.fixed_point_max_iters, stats,
    )


def lagged_step_limit(spec: ProblemSpec, k: float) -> float:
    """Largest τ keeping u -> u + τ·g(u) nondecreasing for the lagged scheme.

    g(u) = T_k(f)(u + 1/k)^(-γ) has |g'| <= γ sup T_k(f) k^(γ+1), attained at u = 0.
    """
    g = spec.grid
    worst = 0.0
    for m in range(1, spec.steps + 1):
        f = truncate(spec.source.f_at(g, m * spec.tau, m), k)
        gam = np.asarray(spec.gamma.at(m), dtype=float)
        worst = max(worst, float(np.max(gam * f * k ** (gam + 1.0), initial=0.0)))
    return math.inf if worst == 0.0 else 1.0 / worst


def solve_parabolic(
    spec: ProblemSpec,
    k: float,
    u_init: np.ndarray | None = None,
    t_offset: float = 0.0,
) -> Trajectory:
    """Trajectory of the level-k problem from T_k(u₀) (or ``u_init``)."""
    if k < 1:
        raise ValueError("ladder level must be >= 1")
    if spec.scheme == "imex-lagged":
        limit = lagged_step_limit(spec, k)
        if spec.tau > limit:
            warnings.warn(
                f"τ = {spec.tau:g} exceeds the lagged-scheme limit {limit:.3g} at k = {k:g}; "
                "ordering in k and comparison may fail",
                stacklevel=2,
            )
    system = spec.system()
    M = spec.steps
    size = spec.grid.interior_count
    fields = np.empty((M + 1, size))
    u = truncate(spec.source.u0_on(spec.grid), k) if u_init is None else np.asarray(u_init, float).copy()
    fields[0] = u
    lin = np.zeros(M + 1, dtype=int)
    fp = np.zeros(M + 1, dtype=int)
    for m in range(1, M + 1):
        stats: dict = {}
        u = step(u, spec, k, m, system=system, stats=stats, t_offset=t_offset)
        fields[m] = u
        lin[m] = stats.get("lin_iters", 0)
        fp[m] = stats.get("fp_iters", 0)
    return Trajectory(
        k=float(k),
        times=t_offset + spec.times,
        fields=fields,
        cell_volume=spec.grid.cell_volume,
        linear_iterations=lin,
        fixed_point_iterations=fp,
    )


@dataclass
class PairCheck:
    k_low: float
    k_high: float
    max_violation: float          # max(u_low - u_high)
    location: tuple[int, int]     # (step, node)
    max_increment: float          # max(u_high - u_low)
    cauchy_bound: float | None    # 1/k_low - 1/k_high when applicable
    monotone_ok: bool
    cauchy_ok: bool | None


@dataclass
class LadderResult:
    trajectories: dict[float, Trajectory]
    pairs: list[PairCheck]
    increments: list[float]   # ||u_{k'} - u_k||_inf for consecutive rungs
    tolerance: float = ORDER_TOL

    @property
    def limit(self) -> Trajectory:
        return self.trajectories[max(self.trajectories)]

    @property
    def monotone(self) -> bool:
        return all(p.monotone_ok for p in self.pairs)

    @property
    def cauchy(self) -> bool | None:
        flags = [p.cauchy_ok for p in self.pairs if p.cauchy_ok is not None]
        return all(flags) if flags else None

    def failures(self) -> list[str]:
        out = []
        for p in self.pairs:
            if not p.monotone_ok:
                m, i = p.location
                out.append(
                    f"ladder order broken between k={p.k_low:g} and k={p.k_high:g} at node {i}, "
                    f"step {m}: u_low - u_high = {p.max_violation:.3e}"
                )
            if p.cauchy_ok is False:
                out.append(
                    f"increment bound broken between k={p.k_low:g} and k={p.k_high:g}: "
                    f"{p.max_increment:.3e} > {p.cauchy_bound:.3e}"
                )
        return out


def _data_bound(spec: ProblemSpec) -> float:
    g = spec.grid
    sup_f = max(float(spec.source.f_at(g, t, m).max(initial=0.0)) for m, t in enumerate(spec.times) if m > 0)
    sup_u0 = float(spec.source.u0_on(g).max(initial=0.0))
    return max(sup_f, sup_u0)


def solve_ladder(spec: ProblemSpec, tolerance: float = ORDER_TOL) -> LadderResult:
    """Run every rung and verify ordering in k and the increment bound.

    The bound 0 <= u_{k'} - u_k <= 1/k - 1/k' is checked for pairs whose
    lower level already dominates the data (so T_k leaves f and u₀ intact).
    """
    ladder = spec.k_ladder
    # operator assembled once and shared by the rungs
    spec.operator
    if spec.threads > 1 and len(ladder) > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            trajs = list(pool.map(lambda k: solve_parabolic(spec, k), ladder))
    else:
        trajs = [solve_parabolic(spec, k) for k in ladder]
    by_k = dict(zip(ladder, trajs))
    bound = _data_bound(spec)
    pairs = []
    for kl, kh in itertools.combinations(ladder, 2):
        diff = by_k[kl].fields - by_k[kh].fields
        flat = int(np.argmax(diff))
        loc = divmod(flat, diff.shape[1])
        viol = float(diff.flat[flat])
        inc = float((-diff).max())
        applicable = kl >= bound
        cb = (1.0 / kl - 1.0 / kh) if applicable else None
        pairs.append(
            PairCheck(
                k_low=kl,
                k_high=kh,
                max_violation=viol,
                location=(int(loc[0]), int(loc[1])),
                max_increment=inc,
                cauchy_bound=cb,
                monotone_ok=viol <= tolerance,
                cauchy_ok=(inc <= cb + tolerance) if applicable else None,
            )
        )
    increments = [
        float(np.max(np.abs(by_k[b].fields - by_k[a].fields))) for a, b in zip(ladder, ladder[1:])
    ]
    return LadderResult(by_k, pairs, increments, tolerance)


@dataclass
class ComparisonReport:
    k: float
    max_violation: float  # max(v1 - v2)
    location: tuple[int, int]
    passed: bool
    lower: Trajectory
    upper: Trajectory


def compare_solutions(
    spec: ProblemSpec,
    v1_source: SourceData,
    v2_source: SourceData,
    k: float | None = None,
    tolerance: float = ORDER_TOL,
) -> ComparisonReport:
    """Run ordered data pairs and verify v1 <= v2 at every node and step."""
    k = spec.k_ladder[-1] if k is None else k
    lo = solve_parabolic(spec.with_source(v1_source), k)
    hi = solve_parabolic(spec.with_source(v2_source), k)
    diff = lo.fields - hi.fields
    flat = int(np.argmax(diff))
    loc = divmod(flat, diff.shape[1])
    viol = float(diff.flat[flat])
    return ComparisonReport(k, viol, (int(loc[0]), int(loc[1])), viol <= tolerance, lo, hi)


def solve_linear_majorant(spec: ProblemSpec, k: float) -> Trajectory:
    """Linear problem with source max(1, k^γ*) T_k(f): an upper barrier for level k."""
    factor = max(1.0, k ** spec.gamma.gamma_star_upper)
    system = spec.system()
    M = spec.steps
    fields = np.empty((M + 1, spec.grid.interior_count))
    v = truncate(spec.source.u0_on(spec.grid), k)
    fields[0] = v
    for m in range(1, M + 1):
        F = factor * truncate(spec.source.f_at(spec.grid, m * spec.tau, m), k)
        v, _ = system.solve(v + spec.tau * F)
        fields[m] = v
    return Trajectory(k, spec.times, fields, spec.grid.cell_volume)


def energy_balance(traj: Trajectory, spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Left and right sides of the discrete energy estimate, per time level.

    left_m  = ½||u^m||² + Σ_{j<=m} τ (u^j)ᵀ A u^j
    right_m = Σ_{j<=m} τ Σ_i f^j_i (u^j_i)^{1-γ} + ½||u^0||²

    (all sums carry the cell volume). Meaningful for γ <= 1.
    """
    vol = spec.grid.cell_volume
    A = spec.operator
    u = traj.fields
    M = u.shape[0] - 1
    dissip = np.zeros(M + 1)
    work = np.zeros(M + 1)
    t0 = traj.times[0] - 0.0
    for j in range(1, M + 1):
        uj = u[j]
        dissip[j] = spec.tau * vol * float(uj @ A.matvec(uj))
        f = spec.source.f_at(spec.grid, t0 + j * spec.tau, j)
        gam = spec.gamma.at(j)
        work[j] = spec.tau * vol * float(np.sum(f * uj ** (1.0 - np.asarray(gam))))
    half = 0.5 * vol * np.einsum("mi,mi->m", u, u)
    left = half + np.cumsum(dissip)
    right = np.cumsum(work) + half[0]
    return left, right


def energy_identity_defect(traj: Trajectory, spec: ProblemSpec) -> float:
    """Relative closure error of the exact discrete energy identity.

    Testing the implicit step with u^m gives, summed over steps,

        left_m + ½ Σ_{j<=m} ||u^j - u^{j-1}||² + Σ_{j<=m} τ Σ_i T_k(f) gap_i = right_m

    with gap = u^{1-γ} - u/(u + 1/k)^γ >= 0. Only meaningful for the
    implicit scheme.
    """
    left, right = energy_balance(traj, spec)
    vol = spec.grid.cell_volume
    u = traj.fields
    t0 = traj.times[0]
    jumps = 0.5 * vol * np.sum(np.diff(u, axis=0) ** 2, axis=1)
    gap = np.zeros(u.shape[0])
    for j in range(1, u.shape[0]):
        f = truncate(spec.source.f_at(spec.grid, t0 + j * spec.tau, j), traj.k)
        gam = np.asarray(spec.gamma.at(j))
        uj = u[j]
        gap[j] = spec.tau * vol * float(np.sum(f * (uj ** (1.0 - gam) - uj * (uj + 1.0 / traj.k) ** (-gam))))
    closed = left + np.concatenate([[0.0], np.cumsum(jumps)]) + np.cumsum(gap)
    scale = np.maximum(np.abs(right), np.finfo(float).tiny)
    return float(np.max(np.abs(closed - right)[1:] / scale[1:])) if u.shape[0] > 1 else 0.0


def time_monotonicity_defect(traj: Trajectory) -> float:
    """max over steps and nodes of u^m - u^{m+1} (<= 0 means nondecreasing)."""
    if traj.fields.shape[0] < 2:
        return -math.inf
    return float(np.max(traj.fields[:-1] - traj.fields[1:]))
