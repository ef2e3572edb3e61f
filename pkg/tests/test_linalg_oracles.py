import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from singlab.grid import build_grid
from singlab.linalg import ShiftedSystem, SolverStagnation, conjugate_gradient
from singlab.operators import assemble_combined, normalization_constant
from singlab.oracles import fractional_laplacian_1d, torsion_constant, torsion_profile


@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_cg_matches_direct(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    M = B @ B.T + n * np.eye(n)
    b = rng.standard_normal(n)
    res = conjugate_gradient(lambda v: M @ v, b, precond=1 / np.diag(M))
    assert np.linalg.norm(M @ res.x - b) <= 1e-10 * np.linalg.norm(b)


def test_cg_zero_rhs_and_stall():
    assert conjugate_gradient(lambda v: v, np.zeros(4)).iterations == 0
    M = np.diag([1.0, 1e12])
    with pytest.raises(SolverStagnation):
        conjugate_gradient(lambda v: M @ v, np.ones(2), rtol=1e-30, maxiter=2)


@pytest.mark.parametrize("method", ["direct", "cg"])
def test_shifted_system(method):
    A = assemble_combined(build_grid(2, 8), 0.5)
    sys = ShiftedSystem(A, 0.01, method)
    b = np.linspace(0, 1, A.size)
    d = np.linspace(0, 5, A.size)
    x, _ = sys.solve(b, shift=d)
    M = np.eye(A.size) + 0.01 * A.to_dense() + np.diag(d)
    assert np.allclose(M @ x, b, atol=1e-9)


def test_torsion_constant_values():
    # (-Δ)^{1/2} (1 - x²)^{1/2} = 1 on (-1, 1); 2 after rescaling to radius 1/2
    assert torsion_constant(1, 0.5) == pytest.approx(1.0)
    assert torsion_constant(1, 0.5, 0.5) == pytest.approx(2.0)
    assert torsion_constant(3, 0.5) == pytest.approx(4**0.5 * math.gamma(1.5) * math.gamma(2) / math.gamma(1.5))


@pytest.mark.parametrize("s", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("x", [0.3, 0.5, 0.62])
def test_quadrature_oracle_on_torsion(s, x):
    u = lambda y: float(torsion_profile(np.array([[y]]), s)[0])  # noqa: E731
    assert fractional_laplacian_1d(u, x, s) == pytest.approx(torsion_constant(1, s, 0.5), rel=1e-7)


def test_quadrature_oracle_on_sine_limit():
    # for s -> 1 the operator tends to -d²/dx² on smooth interior points
    val = fractional_laplacian_1d(lambda y: math.sin(math.pi * y), 0.5, 0.999)
    assert val == pytest.approx(math.pi**2, rel=0.02)
    assert normalization_constant(1, 0.999) > 0
