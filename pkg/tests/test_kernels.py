import math

import numpy as np
import pytest

from singlab.kernels import lattice_moment, pair_weight_table, self_cell_moment


def _moment_1d_direct(beta, J=1000):
    # larger J loses digits to cancellation between the two primitives
    # closed-form cell integrals of (z² - j²)|z|^(-1-β), then the asymptotic tail
    def prim(z, j):
        return z ** (2 - beta) / (2 - beta) + j**2 * z ** (-beta) / beta

    j = np.arange(1, J + 1, dtype=float)
    cells = prim(j + 0.5, j) - prim(j - 0.5, j)
    own = 2 * 0.5 ** (2 - beta) / (2 - beta)
    # cell j behaves like -(1 + 2β)/12 · j^(-1-β); sum the remainder by Euler-Maclaurin
    tail = -(1 + 2 * beta) / 12 * (J + 0.5) ** (-beta) / beta
    return own + 2 * (cells.sum() + tail)


@pytest.mark.parametrize("beta", [0.2, 0.5, 1.0, 1.5, 1.8])
def test_lattice_moment_1d_matches_direct_sum(beta):
    assert lattice_moment(1, beta) == pytest.approx(_moment_1d_direct(beta), abs=1e-8)


def test_lattice_moment_vanishes_at_half_order():
    for n in (1, 2, 3):
        assert abs(lattice_moment(n, 1.0)) < 1e-13


def test_lattice_moment_sign():
    assert lattice_moment(1, 0.5) < 0 < lattice_moment(1, 1.5)


def test_lattice_moment_2d_box_sum():
    beta, n = 1.5, 2
    x, w = np.polynomial.legendre.leggauss(12)
    x, w = x / 2, w / 2
    W = w[:, None] * w[None, :]

    def box(J):
        tot = self_cell_moment(2, 2.0, beta)
        for j1 in range(-J, J + 1):
            X = j1 + x[:, None]
            for j2 in range(-J, J + 1):
                if j1 == 0 and j2 == 0:
                    continue
                Y = j2 + x[None, :]
                tot += np.sum(W * (X**2 - j1**2) * (X**2 + Y**2) ** (-(n + beta) / 2))
        return tot

    r1, r2 = box(12), box(24)
    extrap = (r2 * 2**beta - r1) / (2**beta - 1)
    assert extrap == pytest.approx(lattice_moment(2, beta), rel=2e-3)


def test_pair_weights_symmetric_and_positive():
    t = pair_weight_table(2, 4, 1.0)
    assert np.all(t[np.ones_like(t, bool)] >= 0)
    assert t[(1, 0)] == pytest.approx(t[(0, 1)])
    assert t[(1, 2)] == pytest.approx(t[(2, 1)])
    x, w = np.polynomial.legendre.leggauss(16)
    X, Y = 4 + x[:, None] / 2, 3 + x[None, :] / 2
    cell = np.sum(w[:, None] * w[None, :] / 4 * (X**2 + Y**2) ** -1.5)
    assert t[(4, 3)] == pytest.approx(cell, rel=1e-10)


def test_self_cell_moment_one_dimension():
    beta = 0.8
    exact = 2 * 0.5 ** (2 - beta) / (2 - beta)
    assert self_cell_moment(1, 2.0, beta) == pytest.approx(exact, rel=1e-10)
