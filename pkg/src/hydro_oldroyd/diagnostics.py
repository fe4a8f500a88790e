"""Norm functionals and runtime monitors.

The analytic band of the limit solution is tracked through two accumulated
integrals ``eta1``, ``eta2`` (time integrals of weighted norms of ``d_y u`` and
``d_y^2 u``); the current radius is ``r(t) = radius_a - lam * (eta1 + eta2)``.
The remaining functions evaluate the quantities of the global energy bound,
the bootstrap smallness conditions, the vertical Poincare inequality and the
second phase function used when comparing the rescaled and limit solutions.
None of these feed back into the dynamics.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .spectral import NormSpec, anisotropic_norm, derivative, vertical_mean

__all__ = [
    "RadiusTracker",
    "BandExhaustedError",
    "BootstrapStatus",
    "MonitorReport",
    "ZetaReport",
    "eta_rates",
    "eta_advance",
    "bootstrap_check",
    "energy_monitor",
    "energy_monitor_series",
    "poincare_check",
    "bochner_norm",
    "cumulative_trapezoid",
    "zeta_phi",
]


class BandExhaustedError(RuntimeError):
    """The tracked analytic radius reached zero."""


@dataclass(frozen=True)
class RadiusTracker:
    radius_a: float
    lam: float
    eta1: float = 0.0
    eta2: float = 0.0

    def __post_init__(self):
        if not self.radius_a > 0:
            raise ValueError(f"radius_a must be positive, got {self.radius_a}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    @property
    def eta(self):
        return self.eta1 + self.eta2

    @property
    def radius(self):
        """Current radius of the phase Psi = r(t) (1 + |xi|)."""
        return self.radius_a - self.lam * self.eta

    @property
    def exhausted(self):
        return self.radius <= 0.0


def eta_rates(tracker, u, spec):
    """Instantaneous (d eta1/dt, d eta2/dt) at the tracker's current radius."""
    weighted = NormSpec(spec.s1, spec.s2, max(tracker.radius, 0.0))
    dyu = derivative(u, "y", 1)
    return anisotropic_norm(dyu, weighted), anisotropic_norm(derivative(dyu, "y", 1), weighted)


def eta_advance(tracker, u, dt, spec):
    """One forward-Euler step of the eta equations using the current radius.

    Raises:
        BandExhaustedError: if the radius is already non-positive.
    """
    if tracker.exhausted:
        raise BandExhaustedError(f"analytic radius {tracker.radius:.6g} <= 0")
    r1, r2 = eta_rates(tracker, u, spec)
    return replace(tracker, eta1=tracker.eta1 + dt * r1, eta2=tracker.eta2 + dt * r2)


@dataclass(frozen=True)
class BootstrapStatus:
    eta_ok: bool
    norm_ok: bool
    eta_margin: float
    norm_margin: float
    norm_sq: float

    @property
    def ok(self):
        return self.eta_ok and self.norm_ok


def bootstrap_check(tracker, u, spec, eps1, C1, running_sup=0.0):
    """Test eta < radius_a/lam and sup_t ||(u_Psi, d_y u_Psi)||^2 < min(eps1, 1/(16 C1)).

    ``running_sup`` is the largest squared norm seen so far on the run; the
    returned ``norm_sq`` is the updated supremum.
    """
    weighted = NormSpec(spec.s1, spec.s2, max(tracker.radius, 0.0))
    sq = anisotropic_norm(u, weighted) ** 2 + anisotropic_norm(derivative(u, "y", 1), weighted) ** 2
    sup = max(running_sup, sq)
    threshold = min(eps1, 1.0 / (16.0 * C1))
    eta_margin = tracker.radius_a / tracker.lam - tracker.eta
    return BootstrapStatus(eta_margin > 0, sup < threshold, eta_margin, threshold - sup, sup)


def cumulative_trapezoid(y, t):
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(y)
    if y.size > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def energy_monitor_series(times, n_u, n_dyu, n_dyyu, bracket, kappa):
    """Ratio of the running energy functional to the initial-data bracket.

    ``n_*`` are the norms ||exp((a/2)<D_x>) .||_{H^{s1,s2}} of u, d_y u and
    d_y^2 u at each time (without the exp(kappa t) factor). The functional is
    sup|e^{kt} n_u| + sup|e^{kt} n_dyu| + (int e^{2kt} n_dyu^2)^{1/2}
    + (int e^{2kt} n_dyyu^2)^{1/2}, with running suprema and trapezoidal
    integrals.
    """
    t = np.asarray(times, dtype=float)
    grow = np.exp(kappa * t)
    a = grow * np.asarray(n_u)
    b = grow * np.asarray(n_dyu)
    c = grow * np.asarray(n_dyyu)
    lhs = (
        np.maximum.accumulate(a)
        + np.maximum.accumulate(b)
        + np.sqrt(cumulative_trapezoid(b**2, t))
        + np.sqrt(cumulative_trapezoid(c**2, t))
    )
    if bracket == 0:
        return np.zeros_like(lhs)
    return lhs / bracket


def energy_bracket(u0, radius_a, s1, s2):
    spec = NormSpec(s1, s2, radius_a)
    return anisotropic_norm(u0, spec) + anisotropic_norm(derivative(u0, "y", 1), spec)


def energy_monitor(trajectory, kappa, radius_a, s1, s2):
    """Energy ratio series for a sequence of ``(t, u)`` pairs.

    The first pair supplies the initial data of the bracket.
    """
    times = [t for t, _ in trajectory]
    half = NormSpec(s1, s2, 0.5 * radius_a)
    n_u, n_dy, n_dyy = [], [], []
    for _, u in trajectory:
        dyu = derivative(u, "y", 1)
        n_u.append(anisotropic_norm(u, half))
        n_dy.append(anisotropic_norm(dyu, half))
        n_dyy.append(anisotropic_norm(derivative(dyu, "y", 1), half))
    bracket = energy_bracket(trajectory[0][1], radius_a, s1, s2)
    return energy_monitor_series(times, n_u, n_dy, n_dyy, bracket, kappa)


def poincare_check(f, kappa, spec=NormSpec()):
    """Margin 1/2 ||d_y f||^2 - kappa ||f||^2 in the norm ``spec``.

    Raises:
        ValueError: if ``f`` has a nonzero vertical mean.
    """
    mean = np.abs(vertical_mean(f).coeffs).max()
    if mean > 1e-12 * max(1.0, float(np.abs(f.coeffs).max())):
        raise ValueError(f"field has nonzero vertical mean (max |k=0 coeff| = {mean:.3e})")
    return 0.5 * anisotropic_norm(derivative(f, "y", 1), spec) ** 2 - kappa * anisotropic_norm(f, spec) ** 2


def bochner_norm(times, values, weights, p, spec=None, rule="trapezoid"):
    """Weighted time-space norm (int_0^t w ||f||^p dt)^{1/p} over a series.

    ``values`` are either precomputed norms or SpectralFields (then ``spec``
    selects the norm). ``p = inf`` returns the supremum of ``||f||`` over the
    points where the weight is positive. ``rule`` is ``"trapezoid"`` or
    ``"left"`` (left-endpoint sums).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if spec is not None:
        values = [anisotropic_norm(f, spec) for f in values]
    vals = np.asarray(values, dtype=float)
    w = np.broadcast_to(np.asarray(weights, dtype=float), vals.shape)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if np.isinf(p):
        active = vals[w > 0]
        return float(active.max()) if active.size else 0.0
    t = np.asarray(times, dtype=float)
    integrand = w * vals**p
    if rule == "trapezoid":
        total = cumulative_trapezoid(integrand, t)[-1]
    elif rule == "left":
        total = float(np.sum(integrand[:-1] * np.diff(t)))
    else:
        raise ValueError(f"unknown quadrature rule {rule!r}")
    return float(total ** (1.0 / p))


@dataclass
class MonitorReport:
    """Per-step monitor series of one run plus run-level flags."""

    columns: dict = field(default_factory=dict)
    status: str = "ok"
    message: str = ""

    def append(self, **row):
        for key, val in row.items():
            self.columns.setdefault(key, []).append(val)

    def array(self, key):
        return np.asarray(self.columns[key], dtype=float)

    @property
    def failed(self):
        return self.status != "ok"


@dataclass(frozen=True)
class ZetaReport:
    times: np.ndarray
    zeta: np.ndarray
    phi_radius: np.ndarray
    sandwich: np.ndarray

    @property
    def holds(self):
        return bool(np.all(self.sandwich))


def zeta_phi(eps_report, limit_report, radius_a, lam_tilde):
    """Second phase radius (a - lam_tilde zeta(t))/3 and the bounds a/4 <= . <= a/3.

    ``zeta`` is the trapezoidal time integral of
    ||e^{(a/2)<D>}(eps grad_x, d_y) u^eps|| + ||e^{(a/2)<D>} d_y u||
    + ||e^{(a/2)<D>} d_y^2 u|| read from the ``grad_u_half`` column of the
    rescaled run and the ``dyu_half``/``dyyu_half`` columns of the limit run.
    """
    t_eps = eps_report.array("t")
    t_lim = limit_report.array("t")
    if t_eps.shape != t_lim.shape or not np.allclose(t_eps, t_lim, rtol=0, atol=1e-12):
        raise ValueError("rescaled and limit runs are not on the same time grid")
    rate = eps_report.array("grad_u_half") + limit_report.array("dyu_half") + limit_report.array("dyyu_half")
    zeta = cumulative_trapezoid(rate, t_eps)
    phi = (radius_a - lam_tilde * zeta) / 3.0
    tol = 1e-15 * radius_a
    sandwich = (phi >= 0.25 * radius_a - tol) & (phi <= radius_a / 3.0 + tol)
    return ZetaReport(t_eps, zeta, phi, sandwich)
