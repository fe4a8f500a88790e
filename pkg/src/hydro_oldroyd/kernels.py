"""Pointwise physical-space kernels.

Every kernel exists twice: a vectorised numpy version (``*_numpy``) and an
explicit-loop version compiled by numba (``*_numba``). The public names
(:func:`closure_stresses`, :func:`shear_flux`, :func:`stress_source`) are bound
to one of them according to :mod:`hydro_oldroyd._backend`. All arguments are
flat contiguous float64 arrays of equal length.

Stress components are always ordered ``(11, 22, 33, 12, 13, 23)``.
"""

import numpy as np

from ._backend import BACKEND, njit

__all__ = [
    "BACKEND",
    "closure_stresses",
    "shear_flux",
    "stress_source",
    "IMPLEMENTATIONS",
]


# --------------------------------------------------------------------------
# closed-form stress closure of the hydrostatic limit


def closure_stresses_numpy(q1, q2, theta, b):
    sigma = 1.0 - b * b
    den = 1.0 + sigma * (q1 * q1 + q2 * q2)
    t13 = (1.0 - theta) * q1 / den
    t23 = (1.0 - theta) * q2 / den
    out = np.empty((6, q1.size))
    out[0] = -(b - 1.0) * t13 * q1
    out[1] = -(b - 1.0) * t23 * q2
    out[2] = -(b + 1.0) * (t13 * q1 + t23 * q2)
    out[3] = -0.5 * (b - 1.0) * (t13 * q2 + t23 * q1)
    out[4] = t13
    out[5] = t23
    return out


@njit
def closure_stresses_numba(q1, q2, theta, b):
    n = q1.size
    sigma = 1.0 - b * b
    out = np.empty((6, n))
    for i in range(n):
        den = 1.0 + sigma * (q1[i] * q1[i] + q2[i] * q2[i])
        t13 = (1.0 - theta) * q1[i] / den
        t23 = (1.0 - theta) * q2[i] / den
        out[0, i] = -(b - 1.0) * t13 * q1[i]
        out[1, i] = -(b - 1.0) * t23 * q2[i]
        out[2, i] = -(b + 1.0) * (t13 * q1[i] + t23 * q2[i])
        out[3, i] = -0.5 * (b - 1.0) * (t13 * q2[i] + t23 * q1[i])
        out[4, i] = t13
        out[5, i] = t23
    return out


# --------------------------------------------------------------------------
# nonlinear shear flux F = d2u*G1 - 2 sigma du (du.d2u) G2 - 2 sigma du (du.d2u)


def shear_flux_numpy(q1, q2, qq1, qq2, sigma):
    den = 1.0 + sigma * (q1 * q1 + q2 * q2)
    g1 = 1.0 / den - 1.0
    g2 = 1.0 / (den * den) - 1.0
    s = q1 * qq1 + q2 * qq2
    out = np.empty((2, q1.size))
    out[0] = qq1 * g1 - 2.0 * sigma * q1 * s * g2 - 2.0 * sigma * q1 * s
    out[1] = qq2 * g1 - 2.0 * sigma * q2 * s * g2 - 2.0 * sigma * q2 * s
    return out


@njit
def shear_flux_numba(q1, q2, qq1, qq2, sigma):
    n = q1.size
    out = np.empty((2, n))
    for i in range(n):
        den = 1.0 + sigma * (q1[i] * q1[i] + q2[i] * q2[i])
        g1 = 1.0 / den - 1.0
        g2 = 1.0 / (den * den) - 1.0
        s = q1[i] * qq1[i] + q2[i] * qq2[i]
        out[0, i] = qq1[i] * g1 - 2.0 * sigma * q1[i] * s * g2 - 2.0 * sigma * q1[i] * s
        out[1, i] = qq2[i] * g1 - 2.0 * sigma * q2[i] * s * g2 - 2.0 * sigma * q2[i] * s
    return out


# --------------------------------------------------------------------------
# right-hand side G of  eps d_t tau + tau = G  for the rescaled stresses
#
# grad = (a11, a12, a21, a22, q1, q2, w1, w2, vy) with
#   aij = d_{xj} u_i, qi = d_y u_i, wi = d_{xi} v, vy = d_y v
# adv[c] = (u.grad_x + v d_y) tau_c


def stress_source_numpy(tau, grad, adv, eps, theta, b):
    a11, a12, a21, a22, q1, q2, w1, w2, vy = grad
    t11, t22, t33, t12, t13, t23 = tau
    e = eps
    e2 = eps * eps
    rot = a21 - a12
    sym = a21 + a12
    m1 = q1 - e2 * w1
    p1 = q1 + e2 * w1
    m2 = q2 - e2 * w2
    p2 = q2 + e2 * w2
    c = 1.0 - theta
    out = np.empty_like(tau)
    out[0] = (
        -e * adv[0]
        - (e * t12 * rot - t13 * m1)
        - b * (2.0 * e * t11 * a11 + e * t12 * sym + t13 * p1)
        + 2.0 * c * e * a11
    )
    out[1] = (
        -e * adv[1]
        - (-e * t12 * rot - t23 * m2)
        - b * (e * t12 * sym + 2.0 * e * t22 * a22 + t23 * p2)
        + 2.0 * c * e * a22
    )
    out[2] = (
        -e * adv[2]
        - (t13 * m1 + t23 * m2)
        - b * (t13 * p1 + t23 * p2 + 2.0 * e * t33 * vy)
        + 2.0 * c * e * vy
    )
    out[3] = (
        -e * adv[3]
        - 0.5 * b * e * (2.0 * t12 * (a11 + a22) + (t11 + t22) * sym)
        + 0.5 * e * (t11 - t22) * rot
        + 0.5 * t13 * m2
        + 0.5 * t23 * m1
        - 0.5 * b * (t13 * p2 + t23 * p1)
        + c * e * sym
    )
    out[4] = (
        -e * adv[4]
        - 0.5 * b * e * (2.0 * t13 * (a11 + vy) + t23 * sym)
        - 0.5 * (t11 - t33) * m1
        - 0.5 * t12 * m2
        - 0.5 * e * t23 * rot
        - 0.5 * b * ((t11 + t33) * p1 + t12 * p2)
        + c * p1
    )
    out[5] = (
        -e * adv[5]
        - 0.5 * b * e * (2.0 * t23 * (a22 + vy) + t13 * sym)
        - 0.5 * (t22 - t33) * m2
        - 0.5 * t12 * m1
        + 0.5 * e * t13 * rot
        - 0.5 * b * ((t22 + t33) * p2 + t12 * p1)
        + c * p2
    )
    return out


@njit
def stress_source_numba(tau, grad, adv, eps, theta, b):
    n = tau.shape[1]
    e = eps
    e2 = eps * eps
    c = 1.0 - theta
    out = np.empty_like(tau)
    for i in range(n):
        a11 = grad[0, i]
        a12 = grad[1, i]
        a21 = grad[2, i]
        a22 = grad[3, i]
        q1 = grad[4, i]
        q2 = grad[5, i]
        w1 = grad[6, i]
        w2 = grad[7, i]
        vy = grad[8, i]
        t11 = tau[0, i]
        t22 = tau[1, i]
        t33 = tau[2, i]
        t12 = tau[3, i]
        t13 = tau[4, i]
        t23 = tau[5, i]
        rot = a21 - a12
        sym = a21 + a12
        m1 = q1 - e2 * w1
        p1 = q1 + e2 * w1
        m2 = q2 - e2 * w2
        p2 = q2 + e2 * w2
        out[0, i] = (
            -e * adv[0, i]
            - (e * t12 * rot - t13 * m1)
            - b * (2.0 * e * t11 * a11 + e * t12 * sym + t13 * p1)
            + 2.0 * c * e * a11
        )
        out[1, i] = (
            -e * adv[1, i]
            - (-e * t12 * rot - t23 * m2)
            - b * (e * t12 * sym + 2.0 * e * t22 * a22 + t23 * p2)
            + 2.0 * c * e * a22
        )
        out[2, i] = (
            -e * adv[2, i]
            - (t13 * m1 + t23 * m2)
            - b * (t13 * p1 + t23 * p2 + 2.0 * e * t33 * vy)
            + 2.0 * c * e * vy
        )
        out[3, i] = (
            -e * adv[3, i]
            - 0.5 * b * e * (2.0 * t12 * (a11 + a22) + (t11 + t22) * sym)
            + 0.5 * e * (t11 - t22) * rot
            + 0.5 * t13 * m2
            + 0.5 * t23 * m1
            - 0.5 * b * (t13 * p2 + t23 * p1)
            + c * e * sym
        )
        out[4, i] = (
            -e * adv[4, i]
            - 0.5 * b * e * (2.0 * t13 * (a11 + vy) + t23 * sym)
            - 0.5 * (t11 - t33) * m1
            - 0.5 * t12 * m2
            - 0.5 * e * t23 * rot
            - 0.5 * b * ((t11 + t33) * p1 + t12 * p2)
            + c * p1
        )
        out[5, i] = (
            -e * adv[5, i]
            - 0.5 * b * e * (2.0 * t23 * (a22 + vy) + t13 * sym)
            - 0.5 * (t22 - t33) * m2
            - 0.5 * t12 * m1
            + 0.5 * e * t13 * rot
            - 0.5 * b * ((t22 + t33) * p2 + t12 * p1)
            + c * p2
        )
    return out


IMPLEMENTATIONS = {
    "numpy": {
        "closure_stresses": closure_stresses_numpy,
        "shear_flux": shear_flux_numpy,
        "stress_source": stress_source_numpy,
    },
    "numba": {
        "closure_stresses": closure_stresses_numba,
        "shear_flux": shear_flux_numba,
        "stress_source": stress_source_numba,
    },
}

closure_stresses = IMPLEMENTATIONS[BACKEND]["closure_stresses"]
shear_flux = IMPLEMENTATIONS[BACKEND]["shear_flux"]
stress_source = IMPLEMENTATIONS[BACKEND]["stress_source"]
