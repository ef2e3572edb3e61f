"""Discrete norms, exponent formulas and the elementary inequalities.

Space-time sums use the rectangle rule over the time levels 1..M with
weight τ and the cell volume h^n per interior node, so a trajectory on
[0, T] is integrated over (0, T].
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Real

import numpy as np

from singlab.grid import Grid
from singlab.kernels import exterior_weights, pair_weight_table, self_cell_moment
from singlab.operators import correction_moment

__all__ = [
    "lp_norm",
    "lp_space_time",
    "bochner_norm",
    "gagliardo_seminorm",
    "h1_seminorm",
    "gradient_magnitude",
    "ExponentReport",
    "exponents",
    "InequalityCheck",
    "algebraic_inequality_oracle",
    "calibrate_c_alpha",
    "write_norm_table",
]


def _check_exponent(p, name="p"):
    if not (p == math.inf or p >= 1):
        raise ValueError(f"{name} must be >= 1 or inf, got {p}")


def lp_norm(u: np.ndarray, cell_volume: float, p: float) -> float:
    """(Σ |u_i|^p h^n)^(1/p); max |u| for p = inf."""
    _check_exponent(p)
    a = np.abs(np.asarray(u, dtype=float))
    if a.size == 0:
        return 0.0
    if p == math.inf:
        return float(a.max())
    return float((cell_volume * np.sum(a**p)) ** (1.0 / p))


def _levels(traj):
    u = np.asarray(traj.fields, dtype=float)
    tau = float(traj.times[1] - traj.times[0]) if len(traj.times) > 1 else 1.0
    return u[1:], tau


def lp_space_time(traj, p: float) -> float:
    """L^p(Ω_T) norm of a trajectory."""
    _check_exponent(p)
    u, tau = _levels(traj)
    if p == math.inf:
        return float(np.abs(u).max(initial=0.0))
    return float((tau * traj.cell_volume * np.sum(np.abs(u) ** p)) ** (1.0 / p))


def bochner_norm(traj, r: float, q: float) -> float:
    """L^r(0, T; L^q(Ω)): time ℓ^r of the per-level spatial L^q norms."""
    _check_exponent(r, "r")
    _check_exponent(q, "q")
    u, tau = _levels(traj)
    per_level = np.array([lp_norm(row, traj.cell_volume, q) for row in u])
    if per_level.size == 0:
        return 0.0
    if r == math.inf:
        return float(per_level.max())
    return float((tau * np.sum(per_level**r)) ** (1.0 / r))


# fractional seminorm -------------------------------------------------------


def _edge_differences(u: np.ndarray, g: Grid) -> list[np.ndarray]:
    """Forward differences along each axis, boundary zeros included."""
    arr = g.to_array(u)
    pad = np.pad(arr, 1)
    out = []
    for axis in range(g.n):
        d = np.diff(pad, axis=axis)
        # keep the full padded extent only along the differenced axis
        sl = tuple(slice(None) if a == axis else slice(1, -1) for a in range(g.n))
        out.append(d[sl] / g.h)
    return out


def gagliardo_seminorm(u: np.ndarray, g: Grid, s: float, q: float = 2.0, self_term: bool = True) -> float:
    """Fractional seminorm of the zero extension of u.

    [u]^q = h^n ( Σ_{i≠j} |u_i - u_j|^q w_ij + 2 Σ_i |u_i|^q κ_i + E ),

    with w, κ the cell and exterior integrals of |x - y|^(-n-qs). The
    within-cell part E = h^(q-qs) μ_q Σ_edges |D u|^q uses the moment the
    operator uses when q = 2 (so [u]² = 2 h^n uᵀ A_frac u / c_{n,s}) and the
    self-cell moment ∫|z_1|^q |z|^(-n-qs) otherwise. ``self_term=False``
    drops E.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    if q < 1:
        raise ValueError("q must be >= 1")
    u = np.asarray(u, dtype=float)
    if u.shape != (g.interior_count,):
        raise ValueError(f"field has shape {u.shape}, grid expects ({g.interior_count},)")
    beta = q * s
    m = g.N - 1
    table = pair_weight_table(g.n, m - 1, beta) * g.h ** (-beta)
    arr = g.to_array(u)
    pairs = 0.0
    # ordered pairs: twice the sum over offsets whose first nonzero entry is positive
    for off in itertools.product(range(-(m - 1), m), repeat=g.n):
        nz = next((o for o in off if o != 0), 0)
        if nz <= 0:
            continue
        a = tuple(slice(max(0, -o), m - max(0, o)) for o in off)
        b = tuple(slice(max(0, o), m - max(0, -o)) for o in off)
        w = table[tuple(abs(o) for o in off)]
        pairs += w * float(np.sum(np.abs(arr[a] - arr[b]) ** q))
    total = 2.0 * pairs
    kappa = exterior_weights(g.n, g.N, beta)
    total += 2.0 * float(np.sum(kappa * np.abs(u) ** q))
    if self_term:
        moment = correction_moment(g.n, beta) if q == 2 else self_cell_moment(g.n, q, beta)
        edges = sum(float(np.sum(np.abs(d) ** q)) for d in _edge_differences(u, g))
        total += g.h ** (q - beta) * moment * edges
    return float((g.cell_volume * total) ** (1.0 / q))


def gradient_magnitude(u: np.ndarray, g: Grid) -> np.ndarray:
    """|∇u| on the N^n dual points from forward differences with zero boundary values."""
    arr = np.pad(g.to_array(np.asarray(u, dtype=float)), 1)
    comps = []
    for axis in range(g.n):
        d = np.diff(arr, axis=axis)
        sl = tuple(slice(None) if a == axis else slice(0, g.N) for a in range(g.n))
        comps.append(d[sl] / g.h)
    return np.sqrt(sum(c**2 for c in comps))


def h1_seminorm(u: np.ndarray, g: Grid, q: float = 2.0) -> float:
    """(Σ h^n |∇u|^q)^(1/q) with the forward-difference gradient."""
    _check_exponent(q, "q")
    return lp_norm(gradient_magnitude(u, g), g.cell_volume, q)


# exponents ------------------------------------------------------------------


def _frac(x) -> Fraction | None:
    if x is None:
        return None
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Real):
        if math.isinf(x):
            return None
        return Fraction(str(float(x)))
    return Fraction(x)


def _as_float(x):
    return None if x is None else float(x)


@dataclass
class ExponentReport:
    n: int
    gamma: Fraction
    m: Fraction | None
    r: Fraction | None  # None stands for ∞
    q: Fraction | None
    m_bar: Fraction
    q_bar: Fraction | None
    sigma_L: Fraction | None
    energy_sigma: Fraction
    energy_sigma_gamma_ge_1: bool
    aronson_serrin: bool | None
    as_value: Fraction | None  # 1/r + n/(2q)
    outside_zone: bool | None
    outside_zone_branch: str | None
    outside_zone_sigma: Fraction | None
    side_condition: str | None
    side_condition_holds: bool | None
    region: str | None
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        for key, v in d.items():
            if isinstance(v, Fraction):
                d[key] = {"value": float(v), "exact": str(v)}
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value", "exact"])
        for key, v in asdict(self).items():
            if key == "notes":
                continue
            if isinstance(v, Fraction):
                w.writerow([key, repr(float(v)), str(v)])
            else:
                w.writerow([key, "" if v is None else v, ""])
        return buf.getvalue()


def exponents(n: int, gamma, m=None, r=None, q=None) -> ExponentReport:
    """Evaluate the summability exponents for data f ∈ L^m or L^r(L^q).

    r or q equal to ``math.inf`` (or None) mean the unbounded exponent.
    Fractions are kept exact whenever the inputs are rational.
    """
    if n <= 2:
        raise ValueError("the exponent formulas involve 2* = 2n/(n-2) and need n > 2")
    g = _frac(gamma)
    if g is None or g <= 0:
        raise ValueError("γ must be positive and finite")
    mm = _frac(m)
    rr = _frac(r)
    qq = _frac(q)
    notes: list[str] = []
    m_bar = Fraction(2 * (n + 2)) / (2 * (n + 2) - n * (1 - g))
    q_bar = sigma_L = None
    region = None
    if mm is not None:
        if mm < 1:
            raise ValueError("m must be >= 1")
        den = n + 2 - mm * (1 - g)
        if den > 0:
            q_bar = mm * (g + 1) * (n + 2) / den
        else:
            notes.append("q_bar: formula out of range (n + 2 - m(1-γ) <= 0)")
        den = n - 2 * (mm - 1)
        if den > 0:
            sigma_L = mm * (g + 1) * (n + 2) / den
        else:
            notes.append("sigma_L: formula out of range (n - 2(m-1) <= 0)")
        region = "m >= m_bar" if mm >= m_bar else "m < m_bar"
    energy_sigma = Fraction(n) * (1 + g) / (n - 2)
    if g >= 1:
        notes.append("energy_sigma: γ >= 1, the companion clause σ >= 2 applies")

    aronson = outside = branch = sig = side = side_ok = None
    as_value = None
    if r is not None or q is not None:
        inv_r = Fraction(0) if rr is None else 1 / rr
        inv_q = Fraction(0) if qq is None else 1 / qq
        if (rr is not None and rr < 1) or (qq is not None and qq < 1):
            raise ValueError("r and q must be >= 1")
        as_value = inv_r + Fraction(n, 2) * inv_q
        aronson = as_value < 1
        outside = as_value > 1
        if outside:
            line = Fraction(n, n - 2) * inv_q - Fraction(2, n - 2)
            if inv_r < line:
                branch = "i"
                den = 2 * (n - 2 * qq)
                if den > 0:
                    sig = qq * (n - 2) * (g + 1) / den
                else:
                    notes.append("outside_zone_sigma: formula out of range (n - 2q <= 0)")
                if g < 1:
                    threshold = Fraction(2 * n) / (2 * n - (1 - g) * (n - 2))
                    side = f"q > {threshold}"
                    side_ok = qq > threshold
            else:
                branch = "ii"
                if rr is None:
                    notes.append("outside_zone_sigma: branch ii needs a finite r")
                else:
                    den = 2 * (n * rr + 2 * qq - 2 * qq * rr)
                    if den > 0:
                        sig = qq * rr * n * (g + 1) / den
                    else:
                        notes.append("outside_zone_sigma: formula out of range (nr + 2q - 2qr <= 0)")
                if g < 1:
                    threshold = 2 / (1 + g)
                    side = f"r > {threshold}"
                    side_ok = rr is None or rr > threshold
    return ExponentReport(
        n=n, gamma=g, m=mm, r=rr, q=qq,
        m_bar=m_bar, q_bar=q_bar, sigma_L=sigma_L,
        energy_sigma=energy_sigma, energy_sigma_gamma_ge_1=bool(g >= 1),
        aronson_serrin=aronson, as_value=as_value, outside_zone=outside,
        outside_zone_branch=branch, outside_zone_sigma=sig,
        side_condition=side, side_condition_holds=side_ok,
        region=region, notes=notes,
    )


# elementary inequalities ------------------------------------------------------


@dataclass(frozen=True)
class InequalityCheck:
    holds: bool
    slack: float  # larger side minus smaller side; >= 0 when the inequality holds
    lhs: float
    rhs: float


def _ratio_iii(t: np.ndarray, alpha: float) -> np.ndarray:
    # |x+y|^{α-1}|x-y| / |x^α-y^α| at x = 1, y = t in [0, 1)
    return (1.0 + t) ** (alpha - 1.0) * (1.0 - t) / (1.0 - t**alpha)


@lru_cache(maxsize=None)
def calibrate_c_alpha(alpha: float, probes: int = 4000) -> float:
    """Smallest constant C with |x+y|^{α-1}|x-y| <= C|x^α - y^α|, up to a 1e-9 margin.

    The ratio is homogeneous of degree 0, so it is maximized over y/x = t in
    [0, 1) on a grid log-spaced towards both ends, together with the limits
    t = 0 (value 1) and t → 1 (value 2^{α-1}/α).
    """
    if alpha < 1:
        raise ValueError("the third inequality needs α >= 1")
    if alpha == 1:
        return 1.0 + 1e-9
    near0 = np.logspace(-12, math.log10(0.5), probes)
    near1 = 1.0 - np.logspace(-8, math.log10(0.5), probes)
    t = np.concatenate([near0, near1])
    vals = _ratio_iii(t, alpha)
    best = max(float(np.max(vals)), 1.0, 2.0 ** (alpha - 1.0) / alpha)
    return best * (1.0 + 1e-9)


def _holds(small: float, large: float, rtol: float) -> bool:
    return small <= large + rtol * max(abs(small), abs(large))


def algebraic_inequality_oracle(
    x: float, y: float, alpha: float, which: str, rtol: float = 1e-12
) -> InequalityCheck:
    """Evaluate one of the three elementary inequalities for x, y >= 0.

    ``holds`` allows a round-off margin of ``rtol`` times the larger side;
    inequality i is an identity at α = 1.

    i:   (x-y)(x^α-y^α) >= 4α/(α+1)² (x^{(α+1)/2} - y^{(α+1)/2})²,  α > 0
    ii:  (x-y)/(x^α-y^α) <= (1/α)(x^{1-α} + y^{1-α}),  0 < α <= 1, x ≠ y
    iii: |x+y|^{α-1}|x-y| <= C_α |x^α - y^α|,  α >= 1
    """
    if x < 0 or y < 0:
        raise ValueError("x and y must be nonnegative")
    if which == "i":
        if alpha <= 0:
            raise ValueError("α must be positive")
        lhs = (x - y) * (x**alpha - y**alpha)
        rhs = 4.0 * alpha / (alpha + 1.0) ** 2 * (x ** ((alpha + 1) / 2) - y ** ((alpha + 1) / 2)) ** 2
        return InequalityCheck(_holds(rhs, lhs, rtol), lhs - rhs, lhs, rhs)
    if which == "ii":
        if not 0 < alpha <= 1:
            raise ValueError("the second inequality needs 0 < α <= 1")
        if x == y:
            raise ValueError("the second inequality needs x ≠ y")
        lhs = (x - y) / (x**alpha - y**alpha)
        # 0^{1-α} is 1 for α = 1
        rhs = (x ** (1 - alpha) + y ** (1 - alpha)) / alpha
        return InequalityCheck(_holds(lhs, rhs, rtol), rhs - lhs, lhs, rhs)
    if which == "iii":
        c = calibrate_c_alpha(float(alpha))
        lhs = abs(x + y) ** (alpha - 1) * abs(x - y)
        rhs = c * abs(x**alpha - y**alpha)
        return InequalityCheck(_holds(lhs, rhs, rtol), rhs - lhs, lhs, rhs)
    raise ValueError(f"which must be 'i', 'ii' or 'iii', got {which!r}")


def write_norm_table(path, rows: list[dict]) -> None:
    """Rows of {name: value} to CSV (header from the first row), or JSON by suffix."""
    path = str(path)
    if path.endswith(".json"):
        with open(path, "w") as fh:
            json.dump(rows, fh, indent=2)
        return
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
