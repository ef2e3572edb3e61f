import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singlab.elliptic import EllipticDivergence, solve_elliptic, steady_residual
from singlab.grid import build_grid
from singlab.operators import assemble_combined


def test_zero_source():
    st_ = solve_elliptic(build_grid(1, 16), 0.5, 1.0, 0.0)
    assert not st_.w.any() and st_.residual == 0


@settings(max_examples=10)
@given(st.sampled_from([0.5, 1.0, 2.0]), st.sampled_from([0.25, 0.5, 0.75]), st.sampled_from([(1, 16), (2, 8)]))
def test_residual_symmetry_and_uniqueness(gamma, s, shape):
    g = build_grid(*shape)
    a = solve_elliptic(g, s, gamma, 1.0, init="zero")
    b = solve_elliptic(g, s, gamma, 1.0, init="linear")
    assert a.residual <= 1e-9
    assert np.max(np.abs(a.w - b.w)) <= 1e-8
    assert np.max(np.abs(a.w - g.reflect(a.w))) <= 1e-9


def test_levels_increase():
    res = solve_elliptic(build_grid(1, 32), 0.5, 0.5, 2.0)
    ks = sorted(res.levels)
    for lo, hi in zip(ks, ks[1:]):
        assert np.all(res.levels[hi] >= res.levels[lo] - 1e-12)
        assert np.max(res.levels[hi] - res.levels[lo]) <= 1 / lo - 1 / hi + 1e-10 or lo < 2.0


def test_residual_helper():
    g = build_grid(1, 16)
    res = solve_elliptic(g, 0.5, 1.0, 1.0)
    A = assemble_combined(g, 0.5)
    assert steady_residual(A, res.w, np.ones(15), 1.0, res.k_used) == pytest.approx(res.residual, abs=1e-13)


def test_three_dimensional_cg():
    res = solve_elliptic(build_grid(3, 8), 0.5, 0.5, 1.0, k_ladder=(1, 8, 64), linear_solver="cg")
    assert res.residual <= 1e-9


def test_bad_inputs():
    g = build_grid(1, 8)
    with pytest.raises(ValueError):
        solve_elliptic(g, 0.5, 1.0, -1.0)
    with pytest.raises(ValueError):
        solve_elliptic(g, 0.5, 1.0, 1.0, init="random")
    with pytest.raises(ValueError):
        solve_elliptic(g, 0.5, 0.0, 1.0)
    with pytest.raises(EllipticDivergence):
        solve_elliptic(g, 0.5, 1.0, 1.0, max_sweeps=1)
