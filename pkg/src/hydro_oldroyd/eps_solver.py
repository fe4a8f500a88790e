"""Time integration of the rescaled thin-strip Oldroyd-B system at fixed eps.

Unknowns are the horizontal velocity ``u`` (d_h components), the vertical
velocity ``v`` and the six stresses ``tau`` ordered (11, 22, 33, 12, 13, 23).
The velocity equations, with the vertical one divided by eps^2, read

    u_t + u.grad_x u + v u_y + grad_x p = theta Delta_eps u + (div tau)_h
    v_t + u.grad_x v + v v_y + eps^-2 p_y = theta Delta_eps v
                                           + d_x1 tau13 + d_x2 tau23 + eps^-1 d_y tau33

with Delta_eps = eps^2 Delta_x + d_y^2 and (div tau)_h the horizontal rows
(eps d_x1 tau11 + eps d_x2 tau12 + d_y tau13, ...). The stresses obey
``eps tau_t + tau = G(u, v, tau)``.

One step is split: (1) stress relaxation with an exact integrating factor and
G frozen, (2) a velocity IMEX Euler step with implicit theta Delta_eps and the
pressure removed by the anisotropic Leray projection.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .constitutive import closure_fields
from .diagnostics import MonitorReport, cumulative_trapezoid
from .limit_solver import (
    BlowUpError,
    divergence_residual,
    horizontal_divergence,
    initial_velocity,
    recover_v,
)
from .spectral import (
    NormSpec,
    SpectralField,
    anisotropic_norm,
    dealias,
    derivative,
    to_physical,
    to_spectral,
)

__all__ = [
    "EpsState",
    "EpsRun",
    "EPS_COLUMNS",
    "initial_state",
    "anisotropic_leray",
    "pressure_from_tendency",
    "velocity_rhs",
    "stress_rhs",
    "relaxation_step",
    "step",
    "run",
]


@dataclass(frozen=True)
class EpsState:
    u: SpectralField
    v: SpectralField
    tau: SpectralField
    t: float
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.tau.ncomp != 6:
            raise ValueError(f"tau must have 6 components, got {self.tau.ncomp}")


def initial_state(u0, params, eps):
    """Shared initial data: u0, v from incompressibility, closure stresses of u0."""
    return EpsState(u0, recover_v(u0), closure_fields(u0, params), 0.0, eps)


def _mode_vector(grid, eps, odd=True):
    return [grid.xi(i, odd) for i in range(grid.d_h)] + [grid.k(odd) / eps]


def anisotropic_leray(fu, fv, eps):
    """Project (fu, fv) onto fields with i xi.fu + i k fv = 0 mode by mode.

    With q = (xi, k/eps) the projection acts on (fu, eps fv) as
    F - q (q.F) / |q|^2; the (0, 0) mode is left untouched.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    g = fu.grid
    q = _mode_vector(g, eps)
    comps = [fu.coeffs[i] for i in range(g.d_h)] + [eps * fv.coeffs[0]]
    q2 = sum(qi**2 for qi in q)
    dot = sum(qi * ci for qi, ci in zip(q, comps))
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(q2 > 0, dot / q2, 0.0)
    out = [ci - qi * coef for qi, ci in zip(q, comps)]
    return SpectralField(g, np.stack(out[:-1])), SpectralField(g, out[-1] / eps)


def pressure_from_tendency(fu, fv, eps):
    """Pressure removed by the projection: grad_x p = component removed from
    fu, so p = -(i xi.fu + i k fv) / (|xi|^2 + k^2/eps^2) with zero mean."""
    g = fu.grid
    div = sum(1j * g.xi(i, odd=True) * fu.coeffs[i] for i in range(g.d_h)) + 1j * g.k(odd=True) * fv.coeffs[0]
    den = sum(g.xi(i, odd=True) ** 2 for i in range(g.d_h)) + (g.k(odd=True) / eps) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(den > 0, -div / den, 0.0)
    return SpectralField(g, p)


def _grad_components(u, v):
    """Physical (a11, a12, a21, a22, q1, q2, w1, w2, vy), aij = d_xj u_i.

    Missing second-direction entries are zeros when d_h = 1.
    """
    g = u.grid
    n = g.size
    out = np.zeros((9, n))
    for i in range(g.d_h):
        for j in range(g.d_h):
            out[2 * i + j] = to_physical(derivative(u[i], j, 1)).ravel()
        out[4 + i] = to_physical(derivative(u[i], "y", 1)).ravel()
        out[6 + i] = to_physical(derivative(v, i, 1)).ravel()
    out[8] = to_physical(derivative(v, "y", 1)).ravel()
    return out


def _transport(u_phys, v_phys, f):
    """(u.grad_x + v d_y) f in physical space, component by component."""
    g = f.grid
    out = v_phys * to_physical(derivative(f, "y", 1))
    for j in range(g.d_h):
        out = out + u_phys[j] * to_physical(derivative(f, j, 1))
    return out


def stress_rhs(state, params):
    """G with eps d_t tau + tau = G, six components, dealiased."""
    u, v, tau = state.u, state.v, state.tau
    g = u.grid
    up = to_physical(u)
    vp = to_physical(v)[0]
    adv = _transport(up, vp, tau).reshape(6, -1)
    grad = _grad_components(u, v)
    tp = np.ascontiguousarray(to_physical(tau).reshape(6, -1))
    out = kernels.stress_source(tp, grad, np.ascontiguousarray(adv), float(state.eps), params.theta, params.b)
    return dealias(to_spectral(g, out.reshape((6,) + g.shape)))


def relaxation_step(tau, G, dt, eps):
    """Exact solution of eps tau_t + tau = G over dt with G frozen."""
    if not (dt > 0 and eps > 0):
        raise ValueError("dt and eps must be > 0")
    decay = np.exp(-dt / eps)
    return tau * decay + G * (-np.expm1(-dt / eps))


def _diffusion_symbol(grid, eps):
    xi2 = sum(grid.xi(i) ** 2 for i in range(grid.d_h))
    return eps**2 * xi2 + grid.k() ** 2


def _stress_divergence(tau, eps, d_h):
    """Horizontal rows and the vertical row (already divided by eps^2) of div tau."""
    t = {lab: tau[i] for i, lab in enumerate(("11", "22", "33", "12", "13", "23"))}
    dx = lambda f, j: derivative(f, j, 1)  # noqa: E731
    dy = lambda f: derivative(f, "y", 1)  # noqa: E731
    h1 = eps * dx(t["11"], 0) + dy(t["13"])
    rows = [h1]
    vert = dx(t["13"], 0) + dy(t["33"]) * (1.0 / eps)
    if d_h == 2:
        rows[0] = rows[0] + eps * dx(t["12"], 1)
        rows.append(eps * dx(t["12"], 0) + eps * dx(t["22"], 1) + dy(t["23"]))
        vert = vert + dx(t["23"], 1)
    return SpectralField(tau.grid, np.concatenate([r.coeffs for r in rows])), vert


def velocity_rhs(state, params, include_diffusion=True):
    """Unprojected velocity tendencies (fu, fv), dealiased."""
    u, v = state.u, state.v
    g = u.grid
    up = to_physical(u)
    vp = to_physical(v)[0]
    adv_u = to_spectral(g, _transport(up, vp, u))
    adv_v = to_spectral(g, _transport(up, vp, v))
    div_h, div_v = _stress_divergence(state.tau, state.eps, g.d_h)
    fu = div_h - adv_u
    fv = div_v - adv_v
    if include_diffusion:
        lap = -params.theta * _diffusion_symbol(g, state.eps)
        fu = fu + SpectralField(g, u.coeffs * lap)
        fv = fv + SpectralField(g, v.coeffs * lap)
    return dealias(fu), dealias(fv)


def _gauge_v(v):
    c = v.coeffs.copy()
    c[..., 0] = 0.0
    return SpectralField(v.grid, c)


def step(state, dt, params, freeze_velocity=False, ceiling=np.inf):
    """Stress relaxation then velocity IMEX step.

    Raises:
        BlowUpError: on non-finite values or a velocity L2 norm above ``ceiling``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    G = stress_rhs(state, params)
    tau = relaxation_step(state.tau, G, dt, state.eps)
    mid = replace(state, tau=tau)
    u, v = state.u, state.v
    if not freeze_velocity:
        g = u.grid
        fu, fv = anisotropic_leray(*velocity_rhs(mid, params, include_diffusion=False), state.eps)
        den = 1.0 + dt * params.theta * _diffusion_symbol(g, state.eps)
        u = SpectralField(g, (u.coeffs + dt * fu.coeffs) / den)
        v = _gauge_v(SpectralField(g, (v.coeffs + dt * fv.coeffs) / den))
    new = EpsState(u, v, tau, state.t + dt, state.eps)
    if not all(np.all(np.isfinite(f.coeffs)) for f in (u, v, tau)):
        raise BlowUpError(f"non-finite state at t = {new.t:.6g}", state)
    size = anisotropic_norm(u, NormSpec())
    if size > ceiling:
        raise BlowUpError(f"L2 norm {size:.6g} exceeds ceiling {ceiling:.6g} at t = {new.t:.6g}", state)
    return new


EPS_COLUMNS = (
    "t",
    "u_l2",
    "uv_half",
    "tau_half_sqrt_eps",
    "grad_uv_half",
    "grad_u_half",
    "tau_half",
    "div_residual",
    "v_mean",
)


def _scaled_gradient(u, eps):
    """Stack of eps d_xj u and d_y u for every component of ``u``."""
    g = u.grid
    parts = [eps * derivative(u, j, 1).coeffs for j in range(g.d_h)]
    parts.append(derivative(u, "y", 1).coeffs)
    return SpectralField(g, np.concatenate(parts))


def _monitor_row(state, half):
    eps = state.eps
    uv = SpectralField(state.u.grid, np.concatenate([state.u.coeffs, eps * state.v.coeffs]))
    tau_half = anisotropic_norm(state.tau, half)
    return dict(
        t=state.t,
        u_l2=anisotropic_norm(state.u, NormSpec()),
        uv_half=anisotropic_norm(uv, half),
        tau_half_sqrt_eps=np.sqrt(eps) * tau_half,
        grad_uv_half=anisotropic_norm(_scaled_gradient(uv, eps), half),
        grad_u_half=anisotropic_norm(_scaled_gradient(state.u, eps), half),
        tau_half=tau_half,
        div_residual=divergence_residual(state.u, state.v),
        v_mean=float(np.abs(state.v.coeffs[..., 0]).max()),
    )


@dataclass
class EpsRun:
    snapshots: list
    report: MonitorReport
    final: EpsState

    @property
    def status(self):
        return self.report.status


def hypothesis_quantities(report):
    """Sup and time-integral quantities of the rescaled solution whose finiteness
    is assumed for the convergence estimate.

    Returns a dict with the individual terms and their sum ``total``:
    sup ||(u, eps v)||, sup sqrt(eps)||tau||, L2_t and L1_t of the scaled
    gradient of (u, eps v), and L2_t of ||tau||, all with weight exp((a/2)<D_x>).
    """
    t = report.array("t")
    grad = report.array("grad_uv_half")
    terms = {
        "sup_uv": float(report.array("uv_half").max()),
        "sup_sqrt_eps_tau": float(report.array("tau_half_sqrt_eps").max()),
        "l2_grad": float(np.sqrt(cumulative_trapezoid(grad**2, t)[-1])),
        "l1_grad": float(cumulative_trapezoid(grad, t)[-1]),
        "l2_tau": float(np.sqrt(cumulative_trapezoid(report.array("tau_half") ** 2, t)[-1])),
    }
    terms["total"] = sum(terms.values())
    return terms


def run(config, eps=None, u0=None, freeze_velocity=False, state0=None):
    """Fixed-step integration at one eps (defaults to ``config.params.eps``).

    Snapshots are taken every ``output_every`` steps, on the same schedule as
    the limit solver so that trajectories can be compared pointwise in time.
    """
    grid = config.make_grid()
    params = config.material()
    p, m, s = config.params, config.monitors, config.stepping
    eps = p.eps if eps is None else eps
    if state0 is None:
        if u0 is None:
            u0 = initial_velocity(grid, p.delta)
        state0 = initial_state(u0, params, eps)
    state = state0
    half = NormSpec(p.s1, p.s2, 0.5 * p.radius_a)
    report = MonitorReport()
    report.append(**_monitor_row(state, half))
    snapshots = [state]
    for n in range(1, config.n_steps + 1):
        try:
            state = step(state, s.dt, params, freeze_velocity, m.ceiling)
        except BlowUpError as exc:
            report.status, report.message = "blowup", str(exc)
            break
        state = replace(state, t=n * s.dt)
        report.append(**_monitor_row(state, half))
        if n % s.output_every == 0 or n == config.n_steps:
            snapshots.append(state)
    return EpsRun(snapshots, report, state)


__all__ += ["hypothesis_quantities", "horizontal_divergence"]
