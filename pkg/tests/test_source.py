import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from singlab.grid import build_grid, strip_mask
from singlab.source import (
    GammaField,
    SourceData,
    load_gridded_csv,
    make_gamma,
    make_preset,
    regularized_rhs,
    truncate,
    validate_gamma_profile,
    write_gridded_csv,
)

reals = st.floats(-1e6, 1e6, allow_nan=False)
levels = st.floats(1e-3, 1e6)


@pytest.mark.parametrize("sigma,k,out", [(5, 3, 3), (-7, 2, -2), (0.5, 1, 0.5)])
def test_truncate_examples(sigma, k, out):
    assert truncate(sigma, k) == out


@given(reals, reals, levels)
def test_truncate_lipschitz_idempotent(a, b, k):
    assert truncate(truncate(a, k), k) == truncate(a, k)
    assert abs(truncate(a, k) - truncate(b, k)) <= abs(a - b) + 1e-9


def test_rhs_examples():
    assert np.allclose(regularized_rhs(np.ones(3), np.zeros(3), 1.0, 2), 2.0)
    assert np.allclose(regularized_rhs(np.ones(3), np.ones(3), 2.0, 1e12), 1.0)
    gam = 0.7
    assert np.all(regularized_rhs(np.full(3, 10.0), np.zeros(3), gam, 3) <= 3 * 3**gam + 1e-12)


@given(
    arrays(float, 6, elements=st.floats(0, 50)),
    arrays(float, 6, elements=st.floats(0, 5)),
    st.floats(0.1, 3),
    st.floats(1, 1e4),
    st.floats(1, 10),
)
def test_rhs_monotone(f, u, gam, k, factor):
    base = regularized_rhs(f, u, gam, k)
    assert np.all(regularized_rhs(f, u + 0.5, gam, k) <= base + 1e-12)
    assert np.all(regularized_rhs(f, u, gam, k * factor) >= base - 1e-12 * np.maximum(1, base))


def test_source_rejects_negative():
    g = build_grid(1, 8)
    with pytest.raises(ValueError):
        SourceData(-1.0).f_at(g, 0.0, 0)
    signed = SourceData(lambda x, t: x[:, 0] - 0.5, signed=True)
    assert signed.f_at(g, 0.0, 0).min() < 0
    with pytest.raises(ValueError):
        SourceData(1.0, -0.5).u0_on(g)


def test_scaled_and_shifted():
    g = build_grid(1, 8)
    src = SourceData(lambda x, t: x[:, 0], 0.2)
    assert np.allclose(src.scaled(2.0).f_at(g, 0.0, 0), 2 * g.node_coords[:, 0])
    assert np.allclose(src.shifted(0.1).u0_on(g), 0.3)


def test_presets_and_classes():
    f, cls = make_preset("space_time_singular", a=0.4, b=0.7)
    assert "L^r" in cls
    g = build_grid(2, 8)
    vals = f(g.node_coords, 0.0)
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)
    with pytest.raises(ValueError):
        make_preset("nope")


def test_gamma_constant_passes_strip_at_most_one():
    g = build_grid(1, 8)
    for delta in (0.0, 0.1, 0.3, 0.49):
        rep = validate_gamma_profile(GammaField.constant(0.5), strip_mask(g, delta, 4, 0.1), "strip-at-most-one")
        assert rep.passed


def test_gamma_ramp_reports_strip_max():
    g = build_grid(1, 8)
    times = np.arange(5) * 0.1
    gam = make_gamma("boundary_ramp", g, times, base=0.5, slope=1.0)
    strip = strip_mask(g, 0.25, 4, 0.1)
    rep = validate_gamma_profile(gam, strip, "strip-at-most-one", grid=g)
    # t < δ rows cover every node, so the strip maximum is the centre value
    assert rep.sup_on_strip == pytest.approx(1.0)
    assert rep.passed
    late = strip_mask(g, 0.25, 4, 1.0)  # only t = 0 is early
    assert late.flags[1:].sum(axis=0).max() == 4


def test_gamma_threshold_fails_everywhere():
    g = build_grid(1, 8)
    rep = validate_gamma_profile(GammaField.constant(2.0), strip_mask(g, 0.2, 4, 0.1), "strip-below-threshold", 1.5)
    assert not rep.passed
    assert rep.sup_on_strip == 2.0


def test_gamma_must_be_positive():
    with pytest.raises(ValueError):
        GammaField.constant(0.0)


def test_gridded_csv_roundtrip(tmp_path):
    g = build_grid(1, 6)
    vals = np.random.default_rng(1).random((4, g.interior_count))
    write_gridded_csv(tmp_path / "f.csv", vals)
    assert np.array_equal(load_gridded_csv(tmp_path / "f.csv", g, 3), vals)
