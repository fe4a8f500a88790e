import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydro_oldroyd import kernels
from hydro_oldroyd._backend import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
NP = kernels.IMPLEMENTATIONS["numpy"]
NB = kernels.IMPLEMENTATIONS["numba"]

seed_st = st.integers(0, 2**31 - 1)
n_st = st.integers(1, 40)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed_st, n_st, st.floats(0.01, 0.99), st.floats(-1, 1))
def test_closure_backends_agree(seed, n, theta, b):
    q1, q2 = np.random.default_rng(seed).standard_normal((2, n)) * 3
    assert np.allclose(NP["closure_stresses"](q1, q2, theta, b), NB["closure_stresses"](q1, q2, theta, b), rtol=1e-14, atol=1e-15)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed_st, n_st, st.floats(0, 1))
def test_shear_flux_backends_agree(seed, n, sigma):
    a = np.random.default_rng(seed).standard_normal((4, n))
    assert np.allclose(NP["shear_flux"](*a, sigma), NB["shear_flux"](*a, sigma), rtol=1e-13, atol=1e-14)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed_st, n_st, st.floats(1e-3, 1.0), st.floats(0.01, 0.99), st.floats(-1, 1))
def test_stress_source_backends_agree(seed, n, eps, theta, b):
    rng = np.random.default_rng(seed)
    tau, grad, adv = rng.standard_normal((6, n)), rng.standard_normal((9, n)), rng.standard_normal((6, n))
    assert np.allclose(
        NP["stress_source"](tau, grad, adv, eps, theta, b),
        NB["stress_source"](tau, grad, adv, eps, theta, b),
        rtol=1e-13,
        atol=1e-13,
    )


def shear_only(q1, q2):
    g = np.zeros((9, q1.size))
    g[4], g[5] = q1, q2
    return g


@pytest.mark.parametrize("impl", ["numpy", pytest.param("numba", marks=needs_numba)])
def test_source_vanishes_without_motion(impl):
    tau = np.random.default_rng(0).standard_normal((6, 7))
    zeros9, zeros6 = np.zeros((9, 7)), np.zeros((6, 7))
    out = kernels.IMPLEMENTATIONS[impl]["stress_source"](tau, zeros9, zeros6, 0.1, 0.5, 0.3)
    assert np.array_equal(out, np.zeros((6, 7)))


@pytest.mark.parametrize("impl", ["numpy", pytest.param("numba", marks=needs_numba)])
@settings(max_examples=50, deadline=None)
@given(seed=seed_st, theta=st.floats(0.01, 0.99), b=st.floats(-1, 1))
def test_closure_is_fixed_point_at_zero_eps(impl, seed, theta, b):
    # at eps = 0 with pure shear the source evaluated on the closure returns it
    q1, q2 = np.random.default_rng(seed).standard_normal((2, 20)) * 2
    tau = NP["closure_stresses"](q1, q2, theta, b)
    out = kernels.IMPLEMENTATIONS[impl]["stress_source"](tau, shear_only(q1, q2), np.zeros_like(tau), 0.0, theta, b)
    assert np.allclose(out, tau, rtol=1e-12, atol=1e-12)


def test_source_departure_from_closure_is_first_order_in_eps():
    rng = np.random.default_rng(5)
    n = 30
    grad, adv = rng.standard_normal((9, n)), rng.standard_normal((6, n))
    theta, b = 0.5, 0.3
    tau = NP["closure_stresses"](grad[4], grad[5], theta, b)
    eps = np.array([0.1, 0.05, 0.025, 0.0125])
    dev = [np.abs(NP["stress_source"](tau, grad, adv, e, theta, b) - tau).max() for e in eps]
    slope = np.polyfit(np.log(eps), np.log(dev), 1)[0]
    assert slope >= 0.9


def test_swap_of_horizontal_labels():
    # relabelling x1 <-> x2 permutes the six stresses as 11<->22, 13<->23
    rng = np.random.default_rng(2)
    n = 11
    tau, grad, adv = rng.standard_normal((6, n)), rng.standard_normal((9, n)), rng.standard_normal((6, n))
    perm_t = [1, 0, 2, 3, 5, 4]
    # (a11, a12, a21, a22, q1, q2, w1, w2, vy) -> (a22, a21, a12, a11, q2, q1, w2, w1, vy)
    perm_g = [3, 2, 1, 0, 5, 4, 7, 6, 8]
    out = NP["stress_source"](tau, grad, adv, 0.2, 0.4, -0.6)
    swapped = NP["stress_source"](tau[perm_t], grad[perm_g], adv[perm_t], 0.2, 0.4, -0.6)
    assert np.allclose(swapped, out[perm_t], atol=1e-14)


def test_public_names_follow_backend():
    assert kernels.closure_stresses is kernels.IMPLEMENTATIONS[kernels.BACKEND]["closure_stresses"]
