"""Reference values computed independently of the package.

Nothing here imports ``hydro_oldroyd``. Values marked FROZEN were produced
once by the exact routines below and pasted as literals so that a later
change to either side is caught.
"""

from fractions import Fraction
import math


# --------------------------------------------------------------------------
# six algebraic limit equations, exact rational elimination


def limit_matrix(q1, q2, theta, b):
    """Rows of the linear system M tau = rhs, tau = (t11, t22, t33, t12, t13, t23)."""
    one = Fraction(1)
    rows = [
        [one, 0, 0, 0, (b - 1) * q1, 0],
        [0, one, 0, 0, 0, (b - 1) * q2],
        [0, 0, one, 0, (b + 1) * q1, (b + 1) * q2],
        [0, 0, 0, 2 * one, (b - 1) * q2, (b - 1) * q1],
        [(b + 1) * q1, 0, (b - 1) * q1, (b + 1) * q2, 2 * one, 0],
        [0, (b + 1) * q2, (b - 1) * q2, (b + 1) * q1, 0, 2 * one],
    ]
    rhs = [0, 0, 0, 0, 2 * (1 - theta) * q1, 2 * (1 - theta) * q2]
    return rows, rhs


def solve_exact(rows, rhs):
    """Gauss-Jordan elimination over Fractions."""
    n = len(rows)
    a = [[Fraction(x) for x in row] + [Fraction(r)] for row, r in zip(rows, rhs)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [a[i][n] for i in range(n)]


def limit_stresses_exact(q1, q2, theta, b):
    q1, q2, theta, b = (Fraction(x) for x in (q1, q2, theta, b))
    return solve_exact(*limit_matrix(q1, q2, theta, b))


# FROZEN: (q1, q2, theta, b) -> (t11, t22, t33, t12, t13, t23)
FROZEN_CLOSURE = {
    ("1", "1/2", "1/2", "3/10"): (
        0.16374269005847952,
        0.040935672514619881,
        -0.38011695906432746,
        0.081871345029239762,
        0.23391812865497075,
        0.11695906432748537,
    ),
    ("-2", "0", "1/10", "-1"): (
        7.2000000000000002,
        0.0,
        0.0,
        0.0,
        -1.8,
        0.0,
    ),
    ("3/2", "-1", "9/10", "1"): (
        0.0,
        0.0,
        -0.65000000000000002,
        0.0,
        0.15000000000000002,
        -0.10000000000000001,
    ),
}


# --------------------------------------------------------------------------
# pointwise shear identity: d/dy [q / (1 + s q^2)] for scalar shear


def quotient_flux_derivative(q, qq, sigma):
    """(q / (1 + sigma q^2))_y given q and q_y = qq (single component)."""
    return qq * (1 - sigma * q * q) / (1 + sigma * q * q) ** 2


# --------------------------------------------------------------------------
# product inequality with f = g = 2 cos(x + y)


def product_ratio_cos(s1, s2, r):
    """||(f^2)_Psi|| / ||f_Psi||^2 for f = 2 cos(x + y).

    f has unit amplitudes at (1, 1) and (-1, -1); f^2 = 2 + 2 cos(2x + 2y) has
    amplitude 2 at (0, 0) and 1 at (2, 2), (-2, -2).
    """
    w1 = 2 ** (s1 / 2) * 2 ** (s2 / 2) * math.exp(2 * r)
    w2 = 5 ** (s1 / 2) * 5 ** (s2 / 2) * math.exp(3 * r)
    w0 = math.exp(r)
    nf = math.sqrt(2) * w1
    nff = math.sqrt((2 * w0) ** 2 + 2 * w2**2)
    return nff / nf**2


# FROZEN: product_ratio_cos(2.6, 1.6, 0.1)
FROZEN_PRODUCT_RATIO = 1.0230666115669311


# --------------------------------------------------------------------------
# linear decay of u = A e^{-t} sin(x) sin(y)


def linear_energy_ratio(t, kappa, a, s1, s2):
    """Energy functional over bracket for u = A e^{-t} sin x sin y (any A).

    All three norms of u, d_y u, d_y^2 u at radius a/2 equal
    n(t) = (A/2) w e^{-t} with w = 2^{(s1+s2)/2} e^{a}; the suprema are taken
    at t = 0 because kappa < 1.
    """
    w_half = 2 ** ((s1 + s2) / 2) * math.exp(a)
    w_full = 2 ** ((s1 + s2) / 2) * math.exp(2 * a)
    n0 = 0.5 * w_half
    l2 = n0 * math.sqrt((1 - math.exp(-2 * (1 - kappa) * t)) / (2 * (1 - kappa)))
    lhs = 2 * n0 + 2 * l2
    bracket = 2 * 0.5 * w_full
    return lhs / bracket


# --------------------------------------------------------------------------
# vertical velocity and pressure for u = sin(x) sin(y), d_h = 1


def v_for_sin_sin(x, y):
    return math.cos(x) * math.cos(y)


def mean_square_quadrature(f, x, n=4096):
    """Vertical average of f(x, y)^2 by the trapezoid rule (spectrally exact
    for trigonometric polynomials of degree < n)."""
    h = 2 * math.pi / n
    return sum(f(x, j * h) ** 2 for j in range(n)) / n
