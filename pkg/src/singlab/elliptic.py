"""Steady states of the k-regularized problems.

For each rung k we solve A w = T_k(f) / (w + 1/k)^γ. The map
F(w) = A w - g(w) with g(w) = T_k(f)(w + 1/k)^(-γ) is concave with an
M-matrix Jacobian A + diag(-g'(w)), so the linearized iteration

    (A + D(x)) (x_new - x) = g(x) - A x,   D = -g'(x) >= 0,

produces a subsolution after one sweep from any nonnegative start and then
increases monotonically to the unique root. Rungs are started from the
previous rung, which is a subsolution of the next one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from singlab.grid import Grid
from singlab.linalg import ShiftedSystem
from singlab.operators import OperatorMatrix, assemble_combined
from singlab.source import regularized_rhs, truncate

__all__ = ["SteadyState", "EllipticDivergence", "solve_elliptic", "steady_residual"]

INITS = ("zero", "linear")


class EllipticDivergence(RuntimeError):
    pass


@dataclass(eq=False)
class SteadyState:
    w: np.ndarray
    k_used: float
    residual: float
    levels: dict[float, np.ndarray] = field(default_factory=dict, repr=False)
    sweeps: dict[float, int] = field(default_factory=dict)


def steady_residual(A: OperatorMatrix, w: np.ndarray, f: np.ndarray, gamma: float, k: float) -> float:
    """‖A w - T_k(f)/(w + 1/k)^γ‖_∞."""
    r = A.matvec(w) - regularized_rhs(f, np.maximum(w, 0.0), gamma, k)
    return float(np.max(np.abs(r))) if r.size else 0.0


def _residual(A, x, fk, gamma, a) -> float:
    r = A.matvec(x) - fk * (x + a) ** (-gamma)
    return float(np.max(np.abs(r))) if r.size else 0.0


def _solve_level(A, system, fk, gamma, k, x, tol, max_sweeps, res_target):
    a = 1.0 / k
    growth = 0
    prev = np.inf
    for sweep in range(1, max_sweeps + 1):
        v = x + a
        g = fk * v ** (-gamma)
        d = gamma * g / v
        # correction form: an iterative solver's relative tolerance then
        # tracks the shrinking residual instead of the size of x
        delta, _ = system.solve(g - A.matvec(x), shift=d)
        x_new = np.maximum(x + delta, 0.0)
        diff = float(np.max(np.abs(x_new - x))) if x.size else 0.0
        x = x_new
        # small increments alone are not enough where the Jacobian is large
        if diff <= tol and _residual(A, x, fk, gamma, a) <= res_target:
            return x, sweep
        growth = growth + 1 if diff > prev else 0
        if growth >= 10:
            raise EllipticDivergence(
                f"increments grew for 10 consecutive sweeps at k={k:g} (last {diff:.3e})"
            )
        prev = diff
    raise EllipticDivergence(f"no convergence at k={k:g} after {max_sweeps} sweeps (last change {prev:.3e})")


def solve_elliptic(
    grid: Grid,
    s: float,
    gamma: float,
    f,
    k_ladder=(1, 2, 4, 8, 16, 32, 64, 128),
    init: str = "zero",
    tol: float = 1e-11,
    max_sweeps: int = 200,
    operator: OperatorMatrix | None = None,
    linear_solver: str = "auto",
) -> SteadyState:
    """Climb the ladder and return the top rung.

    ``init='zero'`` starts the first rung from w = 0; ``'linear'`` starts it
    from the solution of A w = max(1, k^γ) T_k(f), an upper barrier.
    Later rungs start from the previous rung either way.
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError("γ must be positive")
    if init not in INITS:
        raise ValueError(f"init must be one of {INITS}")
    f = np.array(np.broadcast_to(np.asarray(f, dtype=float), (grid.interior_count,)))
    if np.any(f < 0):
        raise ValueError("source f must be nonnegative")
    ladder = tuple(float(k) for k in k_ladder)
    if not ladder or any(k < 1 for k in ladder) or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError(f"ladder must be strictly increasing with levels >= 1: {ladder}")
    A = operator if operator is not None else assemble_combined(grid, s)
    system = ShiftedSystem(A, 1.0, linear_solver, identity=0.0)
    scale = max(1.0, float(np.max(f, initial=0.0)))

    if init == "zero":
        x = np.zeros(grid.interior_count)
    else:
        k0 = ladder[0]
        x, _ = system.solve(max(1.0, k0**gamma) * truncate(f, k0))
        x = np.maximum(x, 0.0)
    levels: dict[float, np.ndarray] = {}
    sweeps: dict[float, int] = {}
    for k in ladder:
        fk = truncate(f, k)
        x, n = _solve_level(A, system, fk, gamma, k, x, tol, max_sweeps, 0.1 * 1e-9 * scale)
        levels[k] = x
        sweeps[k] = n
    k = ladder[-1]
    res = steady_residual(A, x, f, gamma, k)
    if res > 1e-9 * scale:
        raise EllipticDivergence(f"residual {res:.3e} above 1e-9·max(1, ‖f‖∞) at k={k:g}")
    return SteadyState(x, k, res, levels, sweeps)
