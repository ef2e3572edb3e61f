"""Independent reference values for the discrete operators.

Nothing here touches the cell-weight machinery: the one-dimensional
fractional Laplacian is evaluated by adaptive quadrature of the singular
integral itself, and the torsion constant comes from its closed form.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import integrate

from singlab.operators import normalization_constant

__all__ = [
    "torsion_constant",
    "torsion_profile",
    "fractional_laplacian_1d",
    "discrete_sine_eigenvalue",
]


def torsion_constant(n: int, s: float, radius: float = 1.0) -> float:
    """(-Δ)^s of the profile (1 - |x/R|²)_+^s, which is constant on the ball.

    On the unit ball the constant is 4^s Γ(1+s) Γ(n/2+s) / Γ(n/2); dilation
    to radius R multiplies it by R^{-2s}.
    """
    base = 4.0**s * math.gamma(1.0 + s) * math.gamma(n / 2.0 + s) / math.gamma(n / 2.0)
    return base * radius ** (-2.0 * s)


def torsion_profile(x: np.ndarray, s: float) -> np.ndarray:
    """(1 - |2x - 1|²)_+^s on (0, 1)^n: the unit-ball profile on a ball of radius 1/2."""
    x = np.atleast_2d(x)
    r2 = np.sum((2.0 * x - 1.0) ** 2, axis=1)
    return np.clip(1.0 - r2, 0.0, None) ** s


def fractional_laplacian_1d(
    u: Callable[[float], float],
    x: float,
    s: float,
    support: tuple[float, float] = (0.0, 1.0),
    breakpoints: tuple[float, ...] = (),
) -> float:
    """c_{1,s} P.V.∫ (u(x) - u(y)) |x - y|^(-1-2s) dy for u supported on ``support``.

    The principal value is taken in symmetric form on |z| < δ, where
    δ = distance from x to the nearest end of the support; u must be smooth
    near x (the innermost 1e-3 uses a second-difference Taylor term).
    """
    a, b = support
    ux = u(x)
    delta = min(x - a, b - x)

    def sym(z: float) -> float:
        return (2.0 * ux - u(x + z) - u(x - z)) / z ** (1.0 + 2.0 * s)

    # on [0, z0] the second difference is replaced by its quadratic Taylor
    # term, which avoids the cancellation in 2u(x) - u(x+z) - u(x-z)
    z0 = min(1e-3, 0.5 * delta)
    d2 = -(2.0 * ux - u(x + z0) - u(x - z0)) / z0**2
    near = -d2 * z0 ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    pts = sorted({abs(p - x) for p in breakpoints if z0 < abs(p - x) < delta})
    near += integrate.quad(sym, z0, delta, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-11)[0]

    def one_sided(y: float) -> float:
        return (ux - u(y)) / abs(x - y) ** (1.0 + 2.0 * s)

    if x - a > b - x:
        lo, hi = a, x - delta
    else:
        lo, hi = x + delta, b
    far = 0.0
    if hi > lo:
        pts = [p for p in breakpoints if lo < p < hi]
        far = integrate.quad(one_sided, lo, hi, points=pts or None, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
    # u = 0 outside the support: ∫ u(x)|x-y|^{-1-2s} over the exterior
    tail = ux * ((x - a) ** (-2.0 * s) + (b - x) ** (-2.0 * s)) / (2.0 * s)
    return normalization_constant(1, s) * (near + far + tail)


def discrete_sine_eigenvalue(N: int, mode: int = 1) -> float:
    """Eigenvalue (2/h²)(1 - cos(mode·π·h)) of the 1D three-point Laplacian."""
    h = 1.0 / N
    return 2.0 / h**2 * (1.0 - math.cos(mode * math.pi * h))
