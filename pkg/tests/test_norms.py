import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from singlab.evolve import Trajectory
from singlab.grid import build_grid
from singlab.norms import (
    ExponentReport,
    algebraic_inequality_oracle,
    bochner_norm,
    calibrate_c_alpha,
    exponents,
    gagliardo_seminorm,
    gradient_magnitude,
    h1_seminorm,
    lp_norm,
    lp_space_time,
)
from singlab.operators import assemble_fractional_laplacian, normalization_constant

exps = st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf])


def traj(fields, tau=0.1, h=0.25, n=1):
    fields = np.asarray(fields, float)
    times = np.arange(fields.shape[0]) * tau
    return Trajectory(1.0, times, fields, h**n)


def test_constant_field():
    g = build_grid(1, 8)
    M, tau, c = 10, 0.1, 3.0
    tr = traj(np.full((M + 1, g.interior_count), c), tau, g.h)
    volume = M * tau * g.interior_count * g.h
    for p in (1, 2, 3.5):
        assert lp_space_time(tr, p) == pytest.approx(c * volume ** (1 / p))
    assert lp_space_time(tr, math.inf) == c


def test_sine_l2():
    g = build_grid(1, 64)
    u = np.sin(np.pi * g.node_coords[:, 0])
    assert lp_norm(u, g.cell_volume, 2) == pytest.approx(math.sqrt(0.5), rel=0.01)


@given(arrays(float, (4, 5), elements=st.floats(-3, 3)), st.sampled_from([1.0, 2.0, 2.5, 4.0]))
def test_bochner_matches_space_time_on_diagonal(u, p):
    tr = traj(u)
    assert bochner_norm(tr, p, p) == pytest.approx(lp_space_time(tr, p), rel=1e-12, abs=1e-300)


def test_bochner_sup_in_time():
    u = np.array([[0, 0, 0], [1, 2, 2], [3, 0, 1], [0, 1, 0]], float)
    tr = traj(u, h=0.5)
    per = [lp_norm(r, 0.5, 2) for r in u[1:]]
    assert bochner_norm(tr, math.inf, 2) == max(per)


def test_bochner_separable():
    a = np.array([1.0, 2.0, 0.5])
    b = np.array([1.0, 3.0, 2.0])
    u = np.vstack([np.zeros(3), np.outer(a, b)])
    tau, vol, r, q = 0.2, 0.25, 3.0, 1.5
    tr = traj(u, tau, vol)
    expected = (tau * np.sum(a**r)) ** (1 / r) * (vol * np.sum(b**q)) ** (1 / q)
    assert bochner_norm(tr, r, q) == pytest.approx(expected, rel=1e-13)


@given(arrays(float, (3, 6), elements=st.floats(-5, 5)), st.floats(0, 1), exps, exps)
def test_homogeneous_and_monotone(u, lam, r, q):
    tr, small = traj(u), traj(lam * u)
    assert bochner_norm(small, r, q) <= bochner_norm(tr, r, q) * (1 + 1e-12) + 1e-300
    assert bochner_norm(traj(-2 * u), r, q) == pytest.approx(2 * bochner_norm(tr, r, q), rel=1e-12, abs=1e-300)


def test_exponent_validation():
    with pytest.raises(ValueError):
        lp_norm(np.ones(3), 1.0, 0.5)


def test_gagliardo_zero_and_homogeneity():
    g = build_grid(2, 6)
    assert gagliardo_seminorm(np.zeros(g.interior_count), g, 0.4) == 0
    u = np.random.default_rng(0).random(g.interior_count)
    for q in (1.5, 2.0, 3.0):
        assert gagliardo_seminorm(3 * u, g, 0.4, q) == pytest.approx(3 * gagliardo_seminorm(u, g, 0.4, q))


@pytest.mark.parametrize("n,N,s", [(1, 12, 0.3), (1, 9, 0.7), (2, 6, 0.5), (3, 4, 0.6)])
def test_gagliardo_matches_bilinear_form(n, N, s):
    g = build_grid(n, N)
    u = np.random.default_rng(n).standard_normal(g.interior_count)
    A = assemble_fractional_laplacian(g, s)
    form = 2 * g.cell_volume * float(u @ A.matvec(u)) / normalization_constant(n, s)
    assert gagliardo_seminorm(u, g, s, 2) ** 2 == pytest.approx(form, rel=1e-10)


def test_h1_hand_value():
    # tent 1, 2, 1 on N = 4: four edges with |slope| 4, so Σ h |∇u|² = 4·16/4 = 16
    g = build_grid(1, 4)
    u = np.array([1.0, 2.0, 1.0])
    assert h1_seminorm(u, g) == pytest.approx(4.0)
    assert h1_seminorm(np.zeros(3), g) == 0
    assert h1_seminorm(2 * u, g) == pytest.approx(2 * h1_seminorm(u, g))
    assert gradient_magnitude(u, g).shape == (4,)


def test_h1_two_dimensional_plane():
    g = build_grid(2, 32)
    x = g.node_coords
    u = np.sin(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])
    # ∫ |∇u|² = π²/2 on the unit square
    assert h1_seminorm(u, g) ** 2 == pytest.approx(math.pi**2 / 2, rel=0.01)


def test_exponent_example():
    rep = exponents(3, Fraction(1, 2), m=1)
    assert (rep.m_bar, rep.q_bar, rep.sigma_L) == (Fraction(20, 17), Fraction(5, 3), Fraction(5, 2))
    assert isinstance(rep, ExponentReport)
    assert rep.region == "m < m_bar"
    assert '"exact": "20/17"' in rep.to_json()
    assert "m_bar,1.1764705882352942,20/17" in rep.to_csv()


def test_m_bar_tends_to_one():
    vals = [float(exponents(4, 1 - Fraction(1, 10**j)).m_bar) for j in range(1, 6)]
    assert all(abs(v - 1) < 10.0 ** (-j) for j, v in enumerate(vals, start=1))
    assert exponents(4, 1).m_bar == 1


def test_exponent_regions():
    assert exponents(3, 0.5, r=math.inf, q=math.inf).aronson_serrin
    rep = exponents(3, 0.5, r=2.5, q=2.5)
    assert rep.aronson_serrin is False and rep.outside_zone is False  # 1/r + n/(2q) = 1 exactly
    rep = exponents(3, Fraction(1, 2), r=2, q=Fraction(6, 5))
    assert rep.outside_zone and rep.outside_zone_branch == "ii"
    assert rep.outside_zone_sigma == Fraction(3, 2)
    assert rep.side_condition == "r > 4/3" and rep.side_condition_holds
    rep = exponents(3, Fraction(1, 2), r=10, q=Fraction(6, 5))
    assert rep.outside_zone_branch == "i"
    assert exponents(3, 2, m=2).energy_sigma_gamma_ge_1
    with pytest.raises(ValueError):
        exponents(2, 0.5, m=1)
    with pytest.raises(ValueError):
        exponents(3, 0.5, m=0.5)


@given(
    st.integers(3, 8),
    st.fractions(Fraction(1, 100), Fraction(99, 100), max_denominator=100),
    st.fractions(1, 10, max_denominator=100),
)
def test_exponent_identities(n, gamma, m):
    rep = exponents(n, gamma, m=m)
    assume(rep.q_bar is not None and rep.sigma_L is not None)
    assert (rep.q_bar < 2) == (m < rep.m_bar)
    assert rep.sigma_L >= m * (gamma + 1)
    assert rep.q_bar >= m * (gamma + 1)


def test_inequality_examples():
    for alpha in (0.25, 1.0, 3.0):
        chk = algebraic_inequality_oracle(2.5, 2.5, alpha, "i")
        assert chk.holds and chk.slack == 0
    chk = algebraic_inequality_oracle(4, 1, 2, "i")
    assert chk.lhs == pytest.approx(45) and chk.rhs == pytest.approx(392 / 9) and chk.holds
    with pytest.raises(ValueError):
        algebraic_inequality_oracle(1, 1, 0.5, "ii")
    with pytest.raises(ValueError):
        algebraic_inequality_oracle(1, 2, 2.0, "ii")
    with pytest.raises(ValueError):
        algebraic_inequality_oracle(1, 2, 0.5, "iii")


def test_calibrated_constants():
    assert calibrate_c_alpha(1.0) == pytest.approx(1.0)
    assert calibrate_c_alpha(2.0) == pytest.approx(1.0)
    assert calibrate_c_alpha(3.0) == pytest.approx(4 / 3, rel=1e-6)


positive = st.floats(1e-8, 1e8)


@given(positive, positive, st.sampled_from([0.25, 0.5, 1.0, 2.0, 3.0]))
def test_inequality_i(x, y, alpha):
    assert algebraic_inequality_oracle(x, y, alpha, "i").holds


@given(positive, positive, st.sampled_from([0.25, 0.5, 1.0]))
def test_inequality_ii(x, y, alpha):
    assume(x != y)
    assert algebraic_inequality_oracle(x, y, alpha, "ii").holds


@given(positive, positive, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_inequality_iii(x, y, alpha):
    assert algebraic_inequality_oracle(x, y, alpha, "iii").holds
