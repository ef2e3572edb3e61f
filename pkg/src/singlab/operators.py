"""Discrete -Δ, the integral fractional Laplacian, and their sum.

The fractional operator acts on u extended by zero outside the union of the
interior cells. Row i reads

    c_{n,s} [ Σ_j w_ij (u_i - u_j) + κ_i u_i + (μ/2) (-Δ_h u)_i ]

with w_ij the kernel integral over the cell of node j, κ_i the kernel
integral over everything outside the cells, and μ the lattice second-moment
defect of the cellwise-constant quadrature (see ``lattice_moment``). The
last term makes the rule exact for quadratics on the infinite lattice; it
is a multiple of the local Laplacian. μ is negative for s < 1/2, and it is
floored where it would turn an axis-neighbour coupling positive, so the
fractional matrix stays a symmetric M-matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import signal, sparse

from singlab.grid import Grid
from singlab.kernels import exterior_weights, lattice_moment, pair_weight_table

__all__ = [
    "DENSE_LIMIT",
    "OperatorMatrix",
    "normalization_constant",
    "assemble_local_laplacian",
    "assemble_fractional_laplacian",
    "assemble_combined",
    "apply_operator",
    "pair_weight_matrix",
    "correction_moment",
    "dump_operator",
    "load_operator",
]

DENSE_LIMIT = 4096


def normalization_constant(n: int, s: float) -> float:
    """c_{n,s} = 4^s s Γ(n/2 + s) / (π^{n/2} Γ(1 - s))."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {s}")
    return (
        4.0**s
        * s
        * math.gamma(n / 2.0 + s)
        / (math.pi ** (n / 2.0) * math.gamma(1.0 - s))
    )


def correction_moment(n: int, beta: float) -> float:
    """Lattice moment, floored at -2 × the axis-neighbour weight."""
    axis = pair_weight_table(n, 1, beta)[(1,) + (0,) * (n - 1)]
    # the margin keeps the clamped coupling strictly negative after round-off
    return max(lattice_moment(n, beta), -2.0 * (1.0 - 1e-9) * float(axis))


def _laplacian_1d(m: int, h: float) -> sparse.csr_matrix:
    return sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m), format="csr") / h**2


@lru_cache(maxsize=16)
def _local_matrix(g: Grid) -> sparse.csr_matrix:
    m = g.N - 1
    T = _laplacian_1d(m, g.h)
    eye = sparse.identity(m, format="csr")
    L = sparse.csr_matrix((m**g.n, m**g.n))
    for axis in range(g.n):
        factors = [T if a == axis else eye for a in range(g.n)]
        term = factors[0]
        for f in factors[1:]:
            term = sparse.kron(term, f, format="csr")
        L = L + term
    return L.tocsr()


def _lattice_offsets(m: int) -> np.ndarray:
    i = np.arange(m)
    return np.abs(i[:, None] - i[None, :])


def pair_weight_matrix(g: Grid, beta: float) -> np.ndarray:
    """Dense w_ij = ∫_{cell_j} |x_i - y|^(-n-β) dy with zero diagonal."""
    m = g.N - 1
    table = pair_weight_table(g.n, m - 1, beta)
    D = _lattice_offsets(m)
    if g.n == 1:
        W = table[D]
    elif g.n == 2:
        W = table[D[:, None, :, None], D[None, :, None, :]]
    else:
        W = table[
            D[:, None, None, :, None, None],
            D[None, :, None, None, :, None],
            D[None, None, :, None, None, :],
        ]
    size = m**g.n
    return np.ascontiguousarray(W.reshape(size, size)) * g.h ** (-beta)


def _convolution_kernel(g: Grid, beta: float) -> np.ndarray:
    m = g.N - 1
    table = pair_weight_table(g.n, m - 1, beta)
    idx = np.abs(np.arange(-(m - 1), m))
    full = table[np.ix_(*([idx] * g.n))]
    return full * g.h ** (-beta)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A discrete operator on the interior nodes of a grid.

    Exactly one of ``dense``/``banded`` is set, or neither when the
    fractional block is applied matrix-free through an FFT convolution
    (grids above ``DENSE_LIMIT`` unknowns).
    """

    grid: Grid = field(repr=False)
    kind: str
    s: float | None
    dense: np.ndarray | None = field(default=None, repr=False)
    banded: sparse.csr_matrix | None = field(default=None, repr=False)
    # matrix-free pieces: A u = diag ⊙ u - coupling * (K ⋆ u) + local_coef * L u
    diag_part: np.ndarray | None = field(default=None, repr=False)
    conv_kernel: np.ndarray | None = field(default=None, repr=False)
    coupling: float = 0.0
    local_coef: float = 0.0

    @property
    def size(self) -> int:
        return self.grid.interior_count

    @property
    def is_matrix_free(self) -> bool:
        return self.dense is None and self.banded is None

    def matvec(self, u: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense @ u
        if self.banded is not None:
            return self.banded @ u
        g = self.grid
        conv = signal.fftconvolve(g.to_array(u), self.conv_kernel, mode="same").ravel()
        out = self.diag_part * u - self.coupling * conv
        if self.local_coef:
            out = out + self.local_coef * (_local_matrix(g) @ u)
        return out

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        if self.banded is not None:
            return self.banded.toarray()
        eye = np.eye(self.size)
        return np.column_stack([self.matvec(e) for e in eye])

    def diagonal(self) -> np.ndarray:
        if self.dense is not None:
            return np.diag(self.dense).copy()
        if self.banded is not None:
            return self.banded.diagonal()
        centre = self.conv_kernel[(self.grid.N - 2,) * self.grid.n]
        d = self.diag_part - self.coupling * centre
        if self.local_coef:
            d = d + self.local_coef * 2.0 * self.grid.n / self.grid.h**2
        return d

    def row_sums(self) -> np.ndarray:
        return self.matvec(np.ones(self.size))

    def diagnostics(self) -> dict:
        """Symmetry defect, off-diagonal sign summary and row sums."""
        A = self.to_dense()
        scale = float(np.max(np.abs(A))) if A.size else 0.0
        off = A[~np.eye(A.shape[0], dtype=bool)]
        rows = A.sum(axis=1)
        return {
            "asymmetry": float(np.max(np.abs(A - A.T))) / scale if scale else 0.0,
            "max_offdiag": float(off.max()) if off.size else -np.inf,
            "min_diag": float(np.diag(A).min()),
            "min_row_sum": float(rows.min()),
            "max_abs": scale,
        }

    def __add__(self, other: OperatorMatrix) -> OperatorMatrix:
        if other.grid is not self.grid:
            raise ValueError("operators live on different grids")
        s = self.s if self.s is not None else other.s
        if self.dense is not None or other.dense is not None:
            return OperatorMatrix(self.grid, "combined", s, dense=_as_dense(self) + _as_dense(other))
        if self.banded is not None and other.banded is not None:
            return OperatorMatrix(self.grid, "combined", s, banded=(self.banded + other.banded).tocsr())
        # matrix-free fractional plus banded local: fold the local part in
        free, loc = (self, other) if self.is_matrix_free else (other, self)
        if loc.kind != "local":
            raise ValueError("matrix-free operators only combine with the local Laplacian")
        extra = 1.0
        return OperatorMatrix(
            self.grid,
            "combined",
            s,
            diag_part=free.diag_part,
            conv_kernel=free.conv_kernel,
            coupling=free.coupling,
            local_coef=free.local_coef + extra,
        )


def _as_dense(A: OperatorMatrix) -> np.ndarray:
    if A.dense is not None:
        return A.dense
    if A.banded is not None:
        return A.banded.toarray()
    return A.to_dense()


def assemble_local_laplacian(g: Grid) -> OperatorMatrix:
    """Standard (2n+1)-point -Δ_h with homogeneous Dirichlet data."""
    return OperatorMatrix(g, "local", None, banded=_local_matrix(g))


def assemble_fractional_laplacian(
    g: Grid, s: float, storage: str = "auto"
) -> OperatorMatrix:
    """Integral fractional Laplacian with zero exterior extension."""
    c = normalization_constant(g.n, s)
    beta = 2.0 * s
    if storage not in ("auto", "dense", "matrix-free"):
        raise ValueError(f"unknown storage {storage!r}")
    if storage == "auto":
        storage = "dense" if g.interior_count <= DENSE_LIMIT else "matrix-free"
    kappa = exterior_weights(g.n, g.N, beta)
    mu = g.h ** (2.0 - beta) * correction_moment(g.n, beta)
    local_coef = c * mu / 2.0
    if storage == "dense":
        W = pair_weight_matrix(g, beta)
        # per-row accumulation in fixed order keeps assembly deterministic
        A = -c * W
        A[np.diag_indices_from(A)] = c * (W.sum(axis=1) + kappa)
        A += local_coef * _local_matrix(g).toarray()
        return OperatorMatrix(g, "fractional", s, dense=A)
    K = _convolution_kernel(g, beta)
    ones = np.ones(g.shape)
    rows = signal.fftconvolve(ones, K, mode="same").ravel()
    return OperatorMatrix(
        g,
        "fractional",
        s,
        diag_part=c * (rows + kappa),
        conv_kernel=K,
        coupling=c,
        local_coef=local_coef,
    )


def assemble_combined(g: Grid, s: float, storage: str = "auto") -> OperatorMatrix:
    """-Δ_h + (-Δ)^s_h as one operator."""
    return assemble_local_laplacian(g) + assemble_fractional_laplacian(g, s, storage)


def apply_operator(A: OperatorMatrix, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (A.size,):
        raise ValueError(f"field has shape {u.shape}, operator expects ({A.size},)")
    return A.matvec(u)


def dump_operator(A: OperatorMatrix, path: str | Path) -> tuple[Path, Path]:
    """Write the dense matrix as little-endian float64, row-major, plus a sidecar."""
    path = Path(path)
    data = np.ascontiguousarray(A.to_dense(), dtype="<f8")
    bin_path = path.with_suffix(".f64")
    bin_path.write_bytes(data.tobytes(order="C"))
    meta = {
        "n": A.grid.n,
        "N": A.grid.N,
        "s": A.s,
        "kind": A.kind,
        "layout": "row-major",
        "dtype": "<f8",
        "shape": [A.size, A.size],
    }
    json_path = path.with_suffix(".json")
    json_path.write_text(json.dumps(meta, indent=2))
    return bin_path, json_path


def load_operator(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    data = np.frombuffer(path.with_suffix(".f64").read_bytes(), dtype="<f8")
    return data.reshape(meta["shape"]), meta
