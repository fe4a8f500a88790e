import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydro_oldroyd.spectral import (
    Grid,
    NormSpec,
    SpectralField,
    WeightOverflowError,
    anisotropic_norm,
    apply_weight,
    dealias,
    derivative,
    is_hermitian,
    magnitude_field,
    product,
    remove_vertical_mean,
    to_physical,
    to_spectral,
    vertical_mean,
)

GRIDS = [Grid(1, 16, 12), Grid(1, 8, 8, l_h=3.0), Grid(2, 8, 6)]


def random_samples(grid, rng, ncomp=1):
    return rng.standard_normal((ncomp,) + grid.shape)


grid_st = st.sampled_from(GRIDS)
seed_st = st.integers(0, 2**31 - 1)


@settings(max_examples=40, deadline=None)
@given(grid_st, seed_st, st.integers(1, 3))
def test_round_trip(grid, seed, ncomp):
    x = random_samples(grid, np.random.default_rng(seed), ncomp)
    f = to_spectral(grid, x)
    assert np.allclose(to_physical(f), x, atol=1e-13)
    assert is_hermitian(f)


@settings(max_examples=40, deadline=None)
@given(grid_st, seed_st)
def test_parseval_plain_norm(grid, seed):
    # with s = r = 0 the norm is the root mean square over the torus
    x = random_samples(grid, np.random.default_rng(seed))
    n = anisotropic_norm(to_spectral(grid, x), NormSpec())
    assert n == pytest.approx(math.sqrt(np.mean(x**2)), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    grid_st,
    seed_st,
    st.floats(0.0, 3.0),
    st.floats(0.0, 3.0),
    st.floats(0.0, 0.5),
)
def test_weighted_norm_is_plain_sobolev_norm_of_weighted_field(grid, seed, s1, s2, r):
    f = to_spectral(grid, random_samples(grid, np.random.default_rng(seed)))
    lhs = anisotropic_norm(f, NormSpec(s1, s2, r))
    rhs = anisotropic_norm(apply_weight(f, r), NormSpec(s1, s2, 0.0))
    assert lhs == pytest.approx(rhs, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(grid_st, seed_st, st.floats(0.0, 2.0), st.floats(0.0, 1.0))
def test_norm_monotone_in_indices_and_radius(grid, seed, s, r):
    f = to_spectral(grid, random_samples(grid, np.random.default_rng(seed)))
    base = anisotropic_norm(f, NormSpec(s, s, r))
    assert anisotropic_norm(f, NormSpec(s + 0.5, s, r)) >= base * (1 - 1e-14)
    assert anisotropic_norm(f, NormSpec(s, s + 0.5, r)) >= base * (1 - 1e-14)
    assert anisotropic_norm(f, NormSpec(s, s, r + 0.1)) >= base * (1 - 1e-14)


@settings(max_examples=30, deadline=None)
@given(grid_st, seed_st)
def test_magnitude_field_has_same_norm(grid, seed):
    f = to_spectral(grid, random_samples(grid, np.random.default_rng(seed)))
    spec = NormSpec(1.3, 0.7, 0.2)
    assert anisotropic_norm(magnitude_field(f), spec) == pytest.approx(anisotropic_norm(f, spec), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(grid_st, seed_st, st.sampled_from(["y", 0, 1]), st.integers(1, 3))
def test_derivative_preserves_real_fields(grid, seed, axis, order):
    if axis == 1 and grid.d_h == 1:
        axis = 0
    f = to_spectral(grid, random_samples(grid, np.random.default_rng(seed)))
    assert is_hermitian(derivative(f, axis, order))


def test_derivative_of_trig_polynomial():
    g = Grid(2, 16, 16, l_h=4 * np.pi)
    x1, x2, y = g.points()
    f = to_spectral(g, np.sin(0.5 * x1) * np.cos(3 * y) + np.cos(x2))
    assert np.allclose(to_physical(derivative(f, "x")), 0.5 * np.cos(0.5 * x1) * np.cos(3 * y), atol=1e-12)
    assert np.allclose(to_physical(derivative(f, 1, 2)), -np.cos(x2), atol=1e-12)
    assert np.allclose(to_physical(derivative(f, "y", 3)), 27 * np.sin(0.5 * x1) * np.sin(3 * y), atol=1e-11)


def test_single_mode_norm_closed_form():
    g = Grid(1, 16, 16)
    x, y = g.points()
    # cos(2x + 3y) has amplitude 1/2 at (2, 3) and (-2, -3)
    f = to_spectral(g, np.cos(2 * x + 3 * y))
    s1, s2, r = 2.6, 1.6, 0.1
    expect = math.sqrt(2) * 0.5 * 5 ** (s1 / 2) * 10 ** (s2 / 2) * math.exp(3 * r)
    assert anisotropic_norm(f, NormSpec(s1, s2, r)) == pytest.approx(expect, rel=1e-13)


def test_vertical_mean_split():
    g = Grid(1, 8, 8)
    x, y = g.points()
    f = to_spectral(g, np.sin(x) + np.sin(x) * np.cos(y))
    assert np.allclose(to_physical(vertical_mean(f)), np.sin(x), atol=1e-14)
    assert np.allclose(to_physical(remove_vertical_mean(f)), np.sin(x) * np.cos(y), atol=1e-14)


def test_dealias_keeps_low_modes_only():
    g = Grid(1, 12, 12)
    f = SpectralField(g, np.ones(g.shape))
    kept = dealias(f).coeffs[0] != 0
    idx = np.abs(np.fft.fftfreq(12, 1 / 12))
    expect = (idx[:, None] <= 4) & (idx[None, :] <= 4)
    assert np.array_equal(kept, expect)


def test_product_is_exact_for_resolved_modes():
    g = Grid(1, 16, 16)
    x, y = g.points()
    a = to_spectral(g, np.sin(x) * np.sin(y))
    b = to_spectral(g, np.cos(2 * y))
    assert np.allclose(to_physical(product(a, b)), np.sin(x) * np.sin(y) * np.cos(2 * y), atol=1e-14)


def test_weight_overflow_is_reported():
    g = Grid(1, 64, 8, l_h=0.01)
    f = SpectralField.zeros(g)
    with pytest.raises(WeightOverflowError, match="exceeds"):
        anisotropic_norm(f, NormSpec(0, 0, 50.0))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        Grid(3, 8, 8)
    with pytest.raises(ValueError):
        Grid(1, 7, 8)
    with pytest.raises(ValueError):
        NormSpec(0, 0, -0.1)
    with pytest.raises(ValueError):
        SpectralField(Grid(1, 8, 8), np.zeros((8, 6)))
    with pytest.raises(ValueError):
        SpectralField.zeros(Grid(1, 8, 8)) + SpectralField.zeros(Grid(1, 8, 10))
