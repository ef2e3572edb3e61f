"""Exact and quadrature integrals of the kernel |z|^(-n-β) over grid cells.

All tables are computed on the reference lattice (h = 1) and rescaled by
homogeneity: an integral of |z|^(-n-β) over an n-dimensional region scales
like h^(-β), over an (n-1)-dimensional face like h^(-1-β).

Exterior integrals use the divergence identity

    ∇·(|y-x|^(-n-β) (y-x)) = -β |y-x|^(-n-β),

which turns the integral over the complement of a box into a sum of face
integrals  (1/β) Σ_f d_f ∫_f |y-x|^(-n-β) dA,  d_f the distance to face f.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "pair_weight_table",
    "exterior_weights",
    "self_cell_moment",
    "lattice_moment",
    "half_line_integral",
]


def _gauss(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor_rule(n: int, m: int, sub: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite tensor rule on [-1/2, 1/2]^n with ``sub`` panels per axis."""
    x, w = _gauss(m)
    edges = np.linspace(-0.5, 0.5, sub + 1)
    px = (edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * x[None, :]).ravel()
    pw = ((edges[1:] - edges[:-1])[:, None] * w[None, :]).ravel()
    grids = np.meshgrid(*([px] * n), indexing="ij")
    wgrids = np.meshgrid(*([pw] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return pts, wts


def _cell_integrals(offsets: np.ndarray, n: int, beta: float, m: int, sub: int) -> np.ndarray:
    pts, wts = _tensor_rule(n, m, sub)
    out = np.empty(offsets.shape[0])
    chunk = max(1, 2_000_000 // pts.shape[0])
    for a in range(0, offsets.shape[0], chunk):
        z = offsets[a : a + chunk, None, :] + pts[None, :, :]
        r2 = np.einsum("kpi,kpi->kp", z, z)
        out[a : a + chunk] = (r2 ** (-(n + beta) / 2.0)) @ wts
    return out


@lru_cache(maxsize=64)
def _pair_weight_table(n: int, extent: int, beta: float) -> np.ndarray:
    if n == 1:
        d = np.arange(extent + 1, dtype=float)
        table = np.zeros(extent + 1)
        dd = d[1:]
        table[1:] = ((dd - 0.5) ** (-beta) - (dd + 0.5) ** (-beta)) / beta
        return table
    axes = [np.arange(extent + 1)] * n
    offs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    # permutation symmetry: integrate only sorted offsets
    key = np.sort(offs, axis=1)
    uniq, inverse = np.unique(key, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    linf = uniq.max(axis=1)
    vals = np.zeros(uniq.shape[0])
    near = (linf >= 1) & (linf <= 2)
    far = linf >= 3
    u = uniq.astype(float)
    if near.any():
        vals[near] = _cell_integrals(u[near], n, beta, m=12, sub=4)
    if far.any():
        vals[far] = _cell_integrals(u[far], n, beta, m=8, sub=1)
    return vals[inverse].reshape((extent + 1,) * n)


def pair_weight_table(n: int, extent: int, beta: float) -> np.ndarray:
    """∫ over the unit cell centred at integer offset d of |z|^(-n-β).

    Indexed by |d| componentwise, shape (extent + 1,)^n; the entry at d = 0
    is 0 (the self cell is handled separately).
    """
    if beta <= 0:
        raise ValueError("kernel exponent β must be positive")
    table = _pair_weight_table(int(n), int(extent), float(beta))
    table.setflags(write=False)
    return table


def half_line_integral(e: np.ndarray, Y: np.ndarray, p: float) -> np.ndarray:
    """∫_0^Y (e² + v²)^(-p) dv for e > 0, Y >= 0, p > 1/2 (closed form)."""
    e = np.asarray(e, dtype=float)
    Y = np.asarray(Y, dtype=float)
    a, b = 0.5, p - 0.5
    x = Y**2 / (e**2 + Y**2)
    return 0.5 * e ** (1.0 - 2.0 * p) * special.beta(a, b) * special.betainc(a, b, x)


def _quarter_plane(d: np.ndarray, X: np.ndarray, Y: np.ndarray, p: float) -> np.ndarray:
    """∫_0^X ∫_0^Y (d² + u² + v²)^(-p) dv du, vectorised, X, Y > 0.

    The inner integral is closed form; the outer one uses Gauss-Legendre on
    panels graded geometrically away from u = 0 at the scale d.
    """
    x, w = _gauss(14)
    ratio = float(np.max(X / d))
    J = int(np.ceil(np.log2(ratio + 1.0))) + 1
    k = np.arange(J + 1)
    bounds = np.minimum(X[None, :], d[None, :] * (2.0**k[:, None] - 1.0))
    bounds[-1] = X
    lo, hi = bounds[:-1], bounds[1:]
    width = hi - lo
    u = lo[:, :, None] + width[:, :, None] * x[None, None, :]
    e = np.sqrt(d[None, :, None] ** 2 + u**2)
    inner = half_line_integral(e, np.broadcast_to(Y[None, :, None], e.shape), p)
    return np.einsum("jbq,q,jb->b", inner, w, width)


@lru_cache(maxsize=64)
def _face_table(n: int, N: int, beta: float) -> np.ndarray:
    """Reference face integrals for the box [1/2, N - 1/2]^n (lattice units).

    Entry [jd-1, j...] is ∫ over a face at distance jd - 1/2 whose foot
    point splits the face into half-extents (j - 1/2) along each face axis,
    i.e. one quadrant of the face.
    """
    p = (n + beta) / 2.0
    j = np.arange(1, N) - 0.5
    if n == 1:
        return j ** (-2.0 * p)
    if n == 2:
        D, Y = np.meshgrid(j, j, indexing="ij")
        return half_line_integral(D, Y, p)
    D, X, Y = np.meshgrid(j, j, j, indexing="ij")
    vals = _quarter_plane(D.ravel(), X.ravel(), Y.ravel(), p)
    return vals.reshape(D.shape)


def exterior_weights(n: int, N: int, beta: float) -> np.ndarray:
    """κ_i = ∫ outside [h/2, 1-h/2]^n of |x_i - y|^(-n-β) dy, per interior node.

    Returned in C-order over the (N-1)^n lattice, already scaled by h^(-β).
    """
    if beta <= 0:
        raise ValueError("kernel exponent β must be positive")
    h = 1.0 / N
    table = _face_table(int(n), int(N), float(beta))
    idx = np.arange(1, N)
    lat = np.stack(np.meshgrid(*([idx] * n), indexing="ij"), axis=-1).reshape(-1, n)
    lo = lat - 1            # (i - 1/2) - 1/2, i.e. index into j = i - 1/2
    hi = N - lat - 1        # (N - i - 1/2) - 1/2
    kappa = np.zeros(lat.shape[0])
    for a in range(n):
        others = [b for b in range(n) if b != a]
        for dist_idx in (lo[:, a], hi[:, a]):
            dist = dist_idx + 0.5
            if n == 1:
                face = table[dist_idx]
            elif n == 2:
                b = others[0]
                face = table[dist_idx, lo[:, b]] + table[dist_idx, hi[:, b]]
            else:
                b, c = others
                face = (
                    table[dist_idx, lo[:, b], lo[:, c]]
                    + table[dist_idx, lo[:, b], hi[:, c]]
                    + table[dist_idx, hi[:, b], lo[:, c]]
                    + table[dist_idx, hi[:, b], hi[:, c]]
                )
            kappa += dist * face
    return kappa / beta * h ** (-beta)


@lru_cache(maxsize=64)
def self_cell_moment(n: int, q: float, beta: float) -> float:
    """∫ over [-1/2, 1/2]^n of |z_1|^q |z|^(-n-β) dz, for q > β.

    Uses the homogeneity of the integrand (degree q - n - β) to reduce to
    face integrals, where the integrand is bounded.
    """
    if q <= beta:
        raise ValueError("self-cell moment diverges unless q > β")
    lam = q - beta
    if n == 1:
        return 2.0 * 0.5**lam / lam
    # Gauss-Jacobi absorbs the |z_1|^q factor; z ∈ [0, 1/2] on each half axis
    xj, wj = special.roots_jacobi(40, 0.0, q)
    zj = (1.0 + xj) / 4.0
    wj = wj * 0.25**q / 4.0  # dz = dx/4 and (1+x)^q = (4z)^q
    xg, wg = _gauss(40)
    zg, wg = 0.5 * xg, 0.5 * wg
    p = (n + beta) / 2.0
    if n == 2:
        # faces normal to z_1: |z_1|^q = 2^-q, free coordinate z_2
        normal = 2.0 * (0.5**q) * np.sum(wg * (0.25 + zg**2) ** (-p))
        # faces normal to z_2: free coordinate z_1
        tangent = 2.0 * np.sum(wj * (0.25 + zj**2) ** (-p))
        faces = 2.0 * normal + 2.0 * tangent
    else:
        A, B = np.meshgrid(zg, zg, indexing="ij")
        WA, WB = np.meshgrid(wg, wg, indexing="ij")
        normal = 4.0 * (0.5**q) * np.sum(WA * WB * (0.25 + A**2 + B**2) ** (-p))
        A, B = np.meshgrid(zj, zg, indexing="ij")
        WA, WB = np.meshgrid(wj, wg, indexing="ij")
        tangent = 4.0 * np.sum(WA * WB * (0.25 + A**2 + B**2) ** (-p))
        faces = 2.0 * normal + 4.0 * tangent
    # z·ν = 1/2 on every face
    return float(0.5 * faces / lam)


@lru_cache(maxsize=64)
def lattice_moment(n: int, beta: float) -> float:
    """Second-moment defect of the cellwise-constant quadrature on Z^n.

    M = Σ_j ∫_{cell j} (z_1² - j_1²) |z|^(-n-β) dz, the j = 0 term being the
    self-cell moment. For a smooth u the cellwise-constant sum misses
    (M/2) Δu · h^(2-β) of the singular integral, so adding (M/2)(-Δ_h u)
    restores second-order consistency away from the boundary.

    Summing each slab {|z_1 - j_1| < 1/2} over the transverse directions
    gives M(n) = π^((n-1)/2) Γ((1+β)/2) / Γ((n+β)/2) · M(1), and in one
    dimension the cell terms expand in odd powers of 1/(2j), so
    M(1) = 2^(β-1)/(1-β/2) + 4 Σ_{k odd >= 3} c_k 2^-k ζ(k+β-2) with
    c_k = C(2-β, k)/(2-β) + C(-β, k)/β.
    """
    if not 0.0 < beta < 2.0:
        raise ValueError("β must lie in (0, 2)")
    idx = np.arange(121, dtype=float)

    def binom(p):
        # generalized binomial coefficients C(p, 1..121) by the product rule
        return np.cumprod((p - idx) / (idx + 1.0))

    k = idx[2::2] + 1.0
    c = binom(2.0 - beta)[2::2] / (2.0 - beta) + binom(-beta)[2::2] / beta
    series = np.sum(c * 0.5**k * special.zeta(k + beta - 2.0))
    m1 = 2.0 * 0.5 ** (2.0 - beta) / (2.0 - beta) + 4.0 * series
    slab = np.pi ** ((n - 1) / 2.0) * special.gamma((1.0 + beta) / 2.0) / special.gamma((n + beta) / 2.0)
    return float(slab * m1)
