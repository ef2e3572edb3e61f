"""Uniform Cartesian grids on the unit box and parabolic boundary strips."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "StripMask", "build_grid", "strip_mask"]


@dataclass(frozen=True, eq=False)
class Grid:
    """Interior nodes of a uniform grid on Ω = (0, 1)^n.

    Nodes sit at multi-indices (i_1, ..., i_n) with 1 <= i_d <= N - 1, ordered
    C-style (last axis fastest). Node ``p`` owns the cell of side ``h``
    centred on it, so the union of interior cells is [h/2, 1 - h/2]^n.
    """

    n: int
    N: int
    h: float
    lattice: np.ndarray = field(repr=False)
    node_coords: np.ndarray = field(repr=False)
    exterior_halo_extent: float

    @property
    def cells_per_axis(self) -> int:
        return self.N

    @property
    def interior_count(self) -> int:
        return self.lattice.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N - 1,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    def index_of(self, multi_index) -> int:
        """Linear index of the interior node with lattice index ``multi_index``."""
        idx = tuple(int(i) - 1 for i in multi_index)
        if len(idx) != self.n or any(i < 0 or i >= self.N - 1 for i in idx):
            raise IndexError(f"{multi_index} is not an interior lattice point")
        return int(np.ravel_multi_index(idx, self.shape))

    def to_array(self, u: np.ndarray) -> np.ndarray:
        """Reshape a flat interior field to the (N-1)^n lattice."""
        return np.asarray(u).reshape(self.shape)

    def boundary_distance(self) -> np.ndarray:
        """Distance of each interior node to ∂Ω (nearest face of the box)."""
        x = self.node_coords
        return np.minimum(x, 1.0 - x).min(axis=1)

    def reflect(self, u: np.ndarray) -> np.ndarray:
        """Field reflected through the centre of the box along every axis."""
        arr = self.to_array(u)
        return arr[(slice(None, None, -1),) * self.n].ravel()

    def central_box(self, fraction: float = 0.5) -> np.ndarray:
        """Mask of nodes in the centred sub-box of relative side ``fraction``."""
        lo, hi = 0.5 - fraction / 2, 0.5 + fraction / 2
        x = self.node_coords
        return np.all((x >= lo - 1e-12) & (x <= hi + 1e-12), axis=1)


def build_grid(n: int, N: int) -> Grid:
    if n not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {n}")
    if int(N) != N or N < 4:
        raise ValueError(f"need at least 4 cells per axis, got {N}")
    N = int(N)
    h = 1.0 / N
    axes = [np.arange(1, N)] * n
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    coords = lattice * h
    return Grid(
        n=n,
        N=N,
        h=h,
        lattice=lattice,
        node_coords=coords,
        exterior_halo_extent=10.0 * math.sqrt(n),
    )


@dataclass(frozen=True, eq=False)
class StripMask:
    """Membership of every (step, node) pair in the parabolic strip (Ω_T)_δ.

    ``flags`` has shape (time_steps + 1, interior_count): row ``m`` is the
    time level t = m·τ.
    """

    delta: float
    time_steps: int
    tau: float
    flags: np.ndarray = field(repr=False)

    def complement(self) -> np.ndarray:
        return ~self.flags


def strip_mask(g: Grid, delta: float, M: int, tau: float) -> StripMask:
    """Nodes/steps with min(t, dist(x, ∂Ω)) < δ."""
    if delta < 0:
        raise ValueError("strip width must be nonnegative")
    if M < 1:
        raise ValueError("need at least one time step")
    if delta >= 0.5:
        warnings.warn(f"strip width {delta} >= 1/2 covers all of Ω", stacklevel=2)
    t = np.arange(M + 1) * tau
    near_boundary = g.boundary_distance() < delta
    early = t < delta
    flags = early[:, None] | near_boundary[None, :]
    return StripMask(delta=float(delta), time_steps=M, tau=float(tau), flags=flags)
