"""Time integration of the hydrostatic (thin-strip limit) Oldroyd-B system.

Only the horizontal velocity ``u`` is evolved:

    u_t + u.grad_x u + v u_y - u_yy + grad_x p = (1 - theta) F(u_y, u_yy),

with ``v`` recovered from incompressibility, the y-independent pressure
removed by projecting the k = 0 slice of the explicit tendency, and the
stresses given pointwise by the closure. The vertical diffusion is implicit
(first-order IMEX Euler): ``u_new = (u + dt N(u)) / (1 + dt k^2)`` per mode.
"""

from dataclasses import dataclass, replace

import numpy as np

from .constitutive import closure_fields, nonlinear_flux_F
from .diagnostics import (
    BandExhaustedError,
    MonitorReport,
    RadiusTracker,
    bootstrap_check,
    energy_bracket,
    energy_monitor_series,
    eta_advance,
    eta_rates,
    poincare_check,
)
from .spectral import (
    NormSpec,
    SpectralField,
    anisotropic_norm,
    dealias,
    derivative,
    remove_vertical_mean,
    to_physical,
    to_spectral,
)

__all__ = [
    "BlowUpError",
    "LimitState",
    "LimitRun",
    "initial_velocity",
    "recover_v",
    "recover_pressure",
    "horizontal_divergence",
    "divergence_residual",
    "rhs_explicit",
    "step",
    "run",
]


class BlowUpError(FloatingPointError):
    """Non-finite or over-ceiling state; ``state`` holds the offending state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class LimitState:
    u: SpectralField
    t: float = 0.0
    tracker: RadiusTracker = None

    @property
    def eta1(self):
        return self.tracker.eta1 if self.tracker else 0.0

    @property
    def eta2(self):
        return self.tracker.eta2 if self.tracker else 0.0


def initial_velocity(grid, delta):
    """delta sin(2 pi x1 / L_h) sin(y) in the first component, zeros elsewhere."""
    pts = grid.points()
    samples = np.zeros((grid.d_h,) + grid.shape)
    samples[0] = delta * np.sin(2 * np.pi * pts[0] / grid.l_h) * np.sin(pts[-1])
    return to_spectral(grid, samples)


def horizontal_divergence(u):
    """grad_x . u as a single-component field."""
    g = u.grid
    div = sum(u.coeffs[j] * 1j * g.xi(j, odd=True) for j in range(g.d_h))
    return SpectralField(g, div)


def recover_v(u, tol=1e-10):
    """Vertical velocity with d_y v = -grad_x.u and zero vertical mean.

    Raises:
        ValueError: if the divergence of the vertical mean of ``u`` is nonzero.
    """
    g = u.grid
    div = horizontal_divergence(u).coeffs
    scale = max(1.0, float(np.abs(u.coeffs).max(initial=0.0)))
    mean_div = np.abs(div[..., 0]).max()
    if mean_div > tol * scale:
        raise ValueError(f"divergence of the vertical mean is {mean_div:.3e}, must vanish")
    kk = g.k(odd=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(kk != 0, -div / (1j * kk), 0.0)
    return SpectralField(g, v)


def divergence_residual(u, v):
    """Max modulus of grad_x.u + d_y v over all modes."""
    res = horizontal_divergence(u).coeffs + derivative(v, "y", 1).coeffs
    return float(np.abs(res).max())


def recover_pressure(u, v=None):
    """Horizontal pressure field enforcing the hydrostatic constraint.

    ``p`` solves Delta_x p = -d_i d_j <u_i u_j> with zero horizontal mean,
    where <.> is the vertical average (the (v u) flux averages to zero).
    For one horizontal dimension this is p = -<u^2> up to a constant. ``v``
    is accepted for symmetry and unused.
    """
    g = u.grid
    phys = to_physical(u)
    flux = np.zeros((g.d_h,) + g.shape, dtype=complex)
    for i in range(g.d_h):
        for j in range(g.d_h):
            mij = to_spectral(g, phys[i] * phys[j]).coeffs[0]
            flux[i] += 1j * g.xi(j, odd=True) * mij
    # flux_i = d_j (u_i u_j); at k = 0, Delta p = -div flux gives
    # p = (i xi . flux) / |xi|^2
    xi2 = g.xi_abs[..., 0] ** 2
    div = sum(1j * g.xi(i, odd=True)[..., 0] * flux[i][..., 0] for i in range(g.d_h))
    p = np.zeros(g.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        p[..., 0] = np.where(xi2 > 0, div / xi2, 0.0)
    return SpectralField(g, p)


def _project_mean(n):
    """Remove the horizontal-gradient part of the k = 0 slice of a tendency."""
    g = n.grid
    c = n.coeffs.copy()
    if g.d_h == 1:
        c[0, ..., 0] = 0.0
        return SpectralField(g, c)
    xi = [g.xi(i, odd=True)[..., 0] for i in range(2)]
    xi2 = xi[0] ** 2 + xi[1] ** 2
    dot = xi[0] * c[0, ..., 0] + xi[1] * c[1, ..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(xi2 > 0, dot / xi2, 0.0)
    for i in range(2):
        c[i, ..., 0] -= xi[i] * coef
    return SpectralField(g, c)


def advection(u, v):
    """(u.grad_x + v d_y) u, dealiased."""
    g = u.grid
    phys = to_physical(u)
    vp = to_physical(v)[0]
    out = vp * to_physical(derivative(u, "y", 1))
    for j in range(g.d_h):
        out += phys[j] * to_physical(derivative(u, j, 1))
    return dealias(to_spectral(g, out))


def rhs_explicit(state, params, forcing=None):
    """-u.grad_x u - v u_y - grad_x p + (1 - theta) F, dealiased.

    ``forcing``, if given, is a callable ``t -> SpectralField`` added before
    the pressure projection (used for manufactured solutions).
    """
    u = state.u
    dyu = derivative(u, "y", 1)
    dyyu = derivative(dyu, "y", 1)
    n = (1.0 - params.theta) * nonlinear_flux_F(dyu, dyyu, params.sigma) - advection(u, recover_v(u))
    if forcing is not None:
        n = n + forcing(state.t)
    return dealias(_project_mean(n))


def step(state, dt, params, spec=None, forcing=None, ceiling=np.inf):
    """One IMEX Euler step; advances the radius tracker when present.

    Raises:
        BlowUpError: on a non-finite state or an L2 norm above ``ceiling``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    tracker = state.tracker
    if tracker is not None:
        tracker = eta_advance(tracker, state.u, dt, spec or NormSpec())
    g = state.u.grid
    n = rhs_explicit(state, params, forcing)
    c = (state.u.coeffs + dt * n.coeffs) / (1.0 + dt * g.k() ** 2)
    u = _project_mean(SpectralField(g, c))
    new = LimitState(u, state.t + dt, tracker)
    if not np.all(np.isfinite(u.coeffs)):
        raise BlowUpError(f"non-finite velocity at t = {new.t:.6g}", state)
    size = anisotropic_norm(u, NormSpec())
    if size > ceiling:
        raise BlowUpError(f"L2 norm {size:.6g} exceeds ceiling {ceiling:.6g} at t = {new.t:.6g}", state)
    return new


@dataclass
class LimitRun:
    """Result of :func:`run`: snapshots every ``output_every`` steps plus the
    per-step monitor series."""

    snapshots: list
    report: MonitorReport
    final: LimitState

    @property
    def status(self):
        return self.report.status


# column order of the per-step monitor series
LIMIT_COLUMNS = (
    "t",
    "u_l2",
    "u_half",
    "dyu_half",
    "dyyu_half",
    "eta1",
    "eta2",
    "psi_radius",
    "bootstrap_eta_margin",
    "bootstrap_norm_margin",
    "bootstrap_ok",
    "poincare_margin",
    "mean_residual",
    "div_residual",
    "energy_ratio",
)


def mean_residual(u):
    """Size of the vertical mean: max |k=0 coefficient| (d_h = 1) or of the
    divergence of the vertical mean (d_h = 2)."""
    if u.grid.d_h == 1:
        return float(np.abs(u.coeffs[..., 0]).max())
    return float(np.abs(horizontal_divergence(u).coeffs[..., 0]).max())


def _monitor_row(state, config, running_sup):
    p, m = config.params, config.monitors
    spec = config.norm()
    u = state.u
    half = NormSpec(p.s1, p.s2, 0.5 * p.radius_a)
    dyu = derivative(u, "y", 1)
    tr = state.tracker
    boot = bootstrap_check(tr, u, spec, m.eps1, m.big_c1, running_sup)
    psi = NormSpec(p.s1, p.s2, max(tr.radius, 0.0))
    # d_h = 2 may carry a divergence-free vertical mean; the inequality is
    # about the mean-free part
    poinc = poincare_check(remove_vertical_mean(u), m.kappa, psi)
    row = dict(
        t=state.t,
        u_l2=anisotropic_norm(u, NormSpec()),
        u_half=anisotropic_norm(u, half),
        dyu_half=anisotropic_norm(dyu, half),
        dyyu_half=anisotropic_norm(derivative(dyu, "y", 1), half),
        eta1=tr.eta1,
        eta2=tr.eta2,
        psi_radius=tr.radius,
        bootstrap_eta_margin=boot.eta_margin,
        bootstrap_norm_margin=boot.norm_margin,
        bootstrap_ok=float(boot.ok),
        poincare_margin=poinc,
        mean_residual=mean_residual(u),
        div_residual=divergence_residual(u, recover_v(u)),
    )
    return row, boot.norm_sq


def run(config, u0=None, forcing=None):
    """Fixed-step integration to ``config.stepping.t_final``.

    Failures (blow-up, band exhaustion) end the run early with
    ``report.status`` set to ``"blowup"`` or ``"band_exhausted"`` and the
    cause in ``report.message``; the series up to the failure are kept.
    """
    grid = config.make_grid()
    params = config.material()
    spec = config.norm()
    p, m, s = config.params, config.monitors, config.stepping
    if u0 is None:
        u0 = initial_velocity(grid, p.delta)
    if mean_residual(u0) > 1e-12 * max(1.0, float(np.abs(u0.coeffs).max())):
        raise ValueError("initial velocity must have zero vertical mean")
    state = LimitState(u0, 0.0, RadiusTracker(p.radius_a, m.lam))
    report = MonitorReport()
    snapshots = [state]
    row, sup = _monitor_row(state, config, 0.0)
    report.append(**row)
    for n in range(1, config.n_steps + 1):
        try:
            state = step(state, s.dt, params, spec, forcing, m.ceiling)
        except BlowUpError as exc:
            report.status, report.message = "blowup", str(exc)
            break
        except BandExhaustedError as exc:
            report.status, report.message = "band_exhausted", f"{exc} at t = {state.t:.6g}"
            break
        # exact time grid, avoids drift from repeated addition
        state = replace(state, t=n * s.dt)
        row, sup = _monitor_row(state, config, sup)
        report.append(**row)
        if n % s.output_every == 0 or n == config.n_steps:
            snapshots.append(state)
    bracket = energy_bracket(u0, p.radius_a, p.s1, p.s2)
    report.columns["energy_ratio"] = list(
        energy_monitor_series(
            report.array("t"),
            report.array("u_half"),
            report.array("dyu_half"),
            report.array("dyyu_half"),
            bracket,
            m.kappa,
        )
    )
    return LimitRun(snapshots, report, state)


def derived_fields(state, params):
    """(v, p, tau) recovered from a limit state; tau has six components."""
    v = recover_v(state.u)
    return v, recover_pressure(state.u, v), closure_fields(state.u, params)


__all__ += ["LIMIT_COLUMNS", "advection", "mean_residual", "derived_fields", "eta_rates"]
