"""Linear solves with (shifted) operator matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg as sla

__all__ = ["SolverStagnation", "CGResult", "conjugate_gradient", "ShiftedSystem"]


class SolverStagnation(RuntimeError):
    """The iterative solver failed to reach its residual target."""


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float


def conjugate_gradient(
    matvec: Callable[[np.ndarray], np.ndarray],
    b: np.ndarray,
    precond: np.ndarray | None = None,
    x0: np.ndarray | None = None,
    rtol: float = 1e-11,
    maxiter: int | None = None,
) -> CGResult:
    """Jacobi-preconditioned CG for a symmetric positive definite operator.

    ``precond`` holds the inverse diagonal. Stops once ||b - Ax|| <= rtol ||b||.
    """
    n = b.shape[0]
    maxiter = maxiter or 10 * n
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0)
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - matvec(x) if x0 is not None else b.copy()
    z = r * precond if precond is not None else r
    p = z.copy()
    rz = float(r @ z)
    target = rtol * bnorm
    res = float(np.linalg.norm(r))
    for it in range(1, maxiter + 1):
        if res <= target:
            return CGResult(x, it - 1, res / bnorm)
        Ap = matvec(p)
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = float(np.linalg.norm(r))
        z = r * precond if precond is not None else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    if res <= target:
        return CGResult(x, maxiter, res / bnorm)
    raise SolverStagnation(f"CG stalled at relative residual {res / bnorm:.3e} after {maxiter} iterations")


class ShiftedSystem:
    """Solves (σI + τA + diag(d)) x = b for a fixed operator A.

    σ = 1 gives the backward-Euler resolvent, σ = 0 with τ = 1 the steady
    operator.

    ``method='direct'`` factors the dense matrix with Cholesky (refactoring
    only when the diagonal shift changes); ``'cg'`` runs Jacobi-preconditioned
    CG against ``A.matvec``. ``'auto'`` picks direct for dense operators of
    moderate size.
    """

    DIRECT_LIMIT = 1500

    def __init__(
        self, A, tau: float, method: str = "auto", rtol: float = 1e-11, identity: float = 1.0
    ):
        if method == "auto":
            method = "direct" if (not A.is_matrix_free and A.size <= self.DIRECT_LIMIT) else "cg"
        if method not in ("direct", "cg"):
            raise ValueError(f"unknown linear solver {method!r}")
        self.A = A
        self.tau = tau
        self.method = method
        self.rtol = rtol
        self.identity = identity
        self._base_diag = identity + tau * A.diagonal()
        self._dense = None
        self._factor_key = None
        self._factor = None

    def _matrix(self) -> np.ndarray:
        if self._dense is None:
            M = self.tau * self.A.to_dense()
            M = M + self.identity * np.eye(self.A.size)
            self._dense = M
        return self._dense

    def solve(self, b: np.ndarray, shift: np.ndarray | None = None, x0=None) -> tuple[np.ndarray, int]:
        """Return the solution and the number of iterations (0 for direct)."""
        if self.method == "direct":
            key = None if shift is None else shift.tobytes()
            if self._factor is None or key != self._factor_key:
                M = self._matrix()
                if shift is not None:
                    M = M + np.diag(shift)
                self._factor = sla.cho_factor(M, lower=False, check_finite=False)
                self._factor_key = key
            return sla.cho_solve(self._factor, b, check_finite=False), 0
        diag = self._base_diag if shift is None else self._base_diag + shift
        if shift is None:
            mv = lambda v: self.identity * v + self.tau * self.A.matvec(v)  # noqa: E731
        else:
            mv = lambda v: self.identity * v + self.tau * self.A.matvec(v) + shift * v  # noqa: E731
        res = conjugate_gradient(mv, b, precond=1.0 / diag, x0=x0, rtol=self.rtol)
        return res.x, res.iterations
