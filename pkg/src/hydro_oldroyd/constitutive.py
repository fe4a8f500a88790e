"""Algebraic stress relations of the hydrostatic Oldroyd-B limit.

In the thin-strip limit the six stress transport equations degenerate into a
linear algebraic system for the stresses, parametrised by the vertical shear
``q = d_y u``. Its solution is the closure

    tau13 = (1-theta) q1 / (1 + sigma |q|^2),   tau23 likewise,  sigma = 1 - b^2,

with the diagonal stresses and tau12 following by back-substitution.
:func:`algebraic_oracle` solves the same system the long way (assemble the
reduced 2x2 system, solve it numerically) and serves as the reference for
:func:`stress_closure` / :func:`stress_derived`.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .spectral import SpectralField, dealias, derivative, to_physical, to_spectral

__all__ = [
    "MaterialParams",
    "ShearPair",
    "StressTuple",
    "SingularClosureError",
    "STRESS_LABELS",
    "g1",
    "g2",
    "stress_closure",
    "stress_derived",
    "algebraic_oracle",
    "limit_residual",
    "nonlinear_flux_F",
    "initial_stress",
    "shear_components",
]

STRESS_LABELS = ("11", "22", "33", "12", "13", "23")


class SingularClosureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class MaterialParams:
    """Coupling ratio ``theta`` in (0, 1) and slip parameter ``b`` in [-1, 1]."""

    theta: float
    b: float
    sigma: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not -1.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [-1, 1], got {self.b}")
        object.__setattr__(self, "sigma", 1.0 - self.b**2)


class ShearPair(NamedTuple):
    """Pointwise vertical shear (d_y u1, d_y u2); q2 = 0 when d_h = 1."""

    q1: np.ndarray
    q2: np.ndarray


class StressTuple(NamedTuple):
    t11: np.ndarray
    t22: np.ndarray
    t33: np.ndarray
    t12: np.ndarray
    t13: np.ndarray
    t23: np.ndarray


def g1(m, sigma):
    """1/(1 + sigma m) - 1, with m = |d_y u|^2."""
    return 1.0 / (1.0 + sigma * np.asarray(m)) - 1.0


def g2(m, sigma):
    """1/(1 + sigma m)^2 - 1."""
    return 1.0 / (1.0 + sigma * np.asarray(m)) ** 2 - 1.0


def stress_closure(shear, params):
    """Closed-form (tau13, tau23) as functions of the shear."""
    q1 = np.asarray(shear.q1, dtype=float)
    q2 = np.asarray(shear.q2, dtype=float)
    den = 1.0 + params.sigma * (q1 * q1 + q2 * q2)
    c = 1.0 - params.theta
    return c * q1 / den, c * q2 / den


def stress_derived(shear, tau13, tau23, params):
    """(tau11, tau22, tau33, tau12) from the shear and the off-diagonal pair."""
    q1 = np.asarray(shear.q1, dtype=float)
    q2 = np.asarray(shear.q2, dtype=float)
    b = params.b
    t11 = -(b - 1.0) * tau13 * q1
    t22 = -(b - 1.0) * tau23 * q2
    t33 = -(b + 1.0) * (tau13 * q1 + tau23 * q2)
    t12 = -0.5 * (b - 1.0) * (tau13 * q2 + tau23 * q1)
    return t11, t22, t33, t12


def algebraic_oracle(shear, params):
    """Solve the six limit equations without using the closed form.

    The first four equations give the diagonal stresses and tau12 linearly in
    (tau13, tau23); substituting into the last two leaves

        A tau13 + B tau23 = 2 (1-theta) q1
        B tau13 + C tau23 = 2 (1-theta) q2

    which is solved numerically for every sample.

    Raises:
        SingularClosureError: if |AC - B^2| < 1e-14 for any sample.
    """
    q1 = np.atleast_1d(np.asarray(shear.q1, dtype=float))
    q2 = np.atleast_1d(np.asarray(shear.q2, dtype=float))
    q1, q2 = np.broadcast_arrays(q1, q2)
    b, theta = params.b, params.theta
    A = 2.0 + 2.0 * (1.0 - b * b) * q1**2 - 0.5 * (b * b - 1.0) * q2**2
    B = 1.5 * (1.0 - b * b) * q1 * q2
    C = 2.0 + 2.0 * (1.0 - b * b) * q2**2 - 0.5 * (b * b - 1.0) * q1**2
    det = A * C - B * B
    if np.any(np.abs(det) < 1e-14):
        raise SingularClosureError("reduced 2x2 stress system is singular")
    mats = np.stack([np.stack([A, B], -1), np.stack([B, C], -1)], -2)
    rhs = 2.0 * (1.0 - theta) * np.stack([q1, q2], -1)
    sol = np.linalg.solve(mats, rhs[..., None])[..., 0]
    t13, t23 = sol[..., 0], sol[..., 1]
    t11 = (1.0 - b) * t13 * q1
    t22 = (1.0 - b) * t23 * q2
    t33 = -(b + 1.0) * (t13 * q1 + t23 * q2)
    t12 = 0.5 * (1.0 - b) * (t13 * q2 + t23 * q1)
    shape = np.broadcast(np.asarray(shear.q1), np.asarray(shear.q2)).shape
    return StressTuple(*(t.reshape(shape) for t in (t11, t22, t33, t12, t13, t23)))


def limit_residual(stress, shear, params):
    """Residuals of the six algebraic limit equations (each ~0 for a solution)."""
    t11, t22, t33, t12, t13, t23 = (np.asarray(t, dtype=float) for t in stress)
    q1 = np.asarray(shear.q1, dtype=float)
    q2 = np.asarray(shear.q2, dtype=float)
    b, theta = params.b, params.theta
    return np.stack(
        np.broadcast_arrays(
            (b - 1) * t13 * q1 + t11,
            (b - 1) * t23 * q2 + t22,
            (b + 1) * (t13 * q1 + t23 * q2) + t33,
            (b - 1) * (t13 * q2 + t23 * q1) + 2 * t12,
            b * (t11 + t33) * q1 + (t11 - t33) * q1 + (b + 1) * t12 * q2 + 2 * t13 - 2 * (1 - theta) * q1,
            b * (t22 + t33) * q2 + (t22 - t33) * q2 + (b + 1) * t12 * q1 + 2 * t23 - 2 * (1 - theta) * q2,
        )
    )


def shear_components(u):
    """Physical d_y u as two flat arrays (second one zero when d_h = 1)."""
    q = to_physical(derivative(u, "y", 1))
    q1 = q[0].ravel()
    q2 = q[1].ravel() if u.ncomp > 1 else np.zeros_like(q1)
    return q1, q2


def nonlinear_flux_F(dyu, dyyu, sigma):
    """F = d2u G1 - 2 sigma du (du.d2u) G2 - 2 sigma du (du.d2u), dealiased.

    With this F the limit momentum equation reads
    ``u_t + ... - d_y^2 u = (1-theta) F``, i.e. the quotient flux
    ``d_y[d_y u / (1 + sigma |d_y u|^2)]`` equals ``d_y^2 u + F``.
    """
    if dyu.grid != dyyu.grid:
        raise ValueError("fields live on different grids")
    if dyu.ncomp != dyyu.ncomp or dyu.ncomp != dyu.grid.d_h:
        raise ValueError("component counts must equal d_h")
    grid = dyu.grid
    q = to_physical(dyu).reshape(dyu.ncomp, -1)
    qq = to_physical(dyyu).reshape(dyu.ncomp, -1)
    if dyu.ncomp == 1:
        zero = np.zeros_like(q[0])
        out = kernels.shear_flux(q[0], zero, qq[0], zero, float(sigma))[:1]
    else:
        out = kernels.shear_flux(q[0], q[1], qq[0], qq[1], float(sigma))
    return dealias(to_spectral(grid, out.reshape((dyu.ncomp,) + grid.shape)))


def closure_fields(u, params, dealiased=True):
    """All six closure stresses of ``u`` as one 6-component field."""
    grid = u.grid
    q1, q2 = shear_components(u)
    tau = kernels.closure_stresses(q1, q2, params.theta, params.b)
    f = to_spectral(grid, tau.reshape((6,) + grid.shape))
    return dealias(f) if dealiased else f


def initial_stress(u0, params, dealiased=True):
    """The six stresses determined by the initial velocity, in
    ``STRESS_LABELS`` order.

    Returns:
        tuple of six single-component SpectralFields.
    """
    f = closure_fields(u0, params, dealiased)
    return tuple(f[i] for i in range(6))
