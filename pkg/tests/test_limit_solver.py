import math

import numpy as np
import pytest

from hydro_oldroyd import limit_solver as ls
from hydro_oldroyd.config import RunConfig
from hydro_oldroyd.constitutive import MaterialParams
from hydro_oldroyd.spectral import Grid, NormSpec, SpectralField, anisotropic_norm, to_physical, to_spectral

from oracles import mean_square_quadrature, quotient_flux_derivative, v_for_sin_sin


def small_config(**stepping):
    cfg = RunConfig().with_updates(grid={"n_h": 16, "n_y": 16})
    return cfg.with_updates(stepping=stepping) if stepping else cfg


def test_vertical_velocity_of_product_mode():
    g = Grid(1, 16, 16)
    x, y = g.points()
    v = ls.recover_v(to_spectral(g, np.sin(x) * np.sin(y)))
    expect = np.vectorize(v_for_sin_sin)(x, y)
    assert np.allclose(to_physical(v)[0], expect, atol=1e-14)
    assert abs(np.mean(to_physical(v))) < 1e-15


def test_vertical_velocity_rejects_divergent_mean():
    g = Grid(1, 8, 8)
    x, y = g.points()
    with pytest.raises(ValueError, match="vertical mean"):
        ls.recover_v(to_spectral(g, np.sin(x) + 0 * y))


def test_vertical_velocity_accepts_solenoidal_mean_in_2d():
    g = Grid(2, 8, 8)
    x1, x2, y = g.points()
    u = to_spectral(g, np.stack([np.sin(x2) + np.cos(x1) * np.sin(y), np.zeros_like(y)]))
    v = ls.recover_v(u)
    assert ls.divergence_residual(u, v) < 1e-14


def test_pressure_against_quadrature():
    g = Grid(1, 16, 16)
    p = to_physical(ls.recover_pressure(to_spectral(g, np.sin(g.points()[0]) * np.sin(g.points()[1]))))[0]
    xs = np.arange(16) * 2 * np.pi / 16
    msq = np.array([mean_square_quadrature(lambda x, y: math.sin(x) * math.sin(y), x) for x in xs])
    expect = -(msq - msq.mean())
    assert np.allclose(p[:, 0], expect, atol=1e-13)
    # p does not depend on y
    assert np.allclose(p, p[:, :1], atol=1e-15)


def test_pressure_cancels_mean_flux_2d():
    g = Grid(2, 8, 8)
    x1, x2, y = g.points()
    u = to_spectral(g, np.stack([np.sin(x1) * np.sin(y), np.cos(x2) * np.sin(2 * y)]))
    p = ls.recover_pressure(u)
    # d_i p + d_j <u_i u_j> is divergence free at k = 0
    phys = to_physical(u)
    flux = []
    for i in range(2):
        fi = sum(
            np.fft.fftn(phys[i] * phys[j]) / g.size * 1j * g.xi(j, odd=True) for j in range(2)
        ) + p.coeffs[0] * 1j * g.xi(i, odd=True)
        flux.append(fi[..., 0])
    div = sum(1j * g.xi(i, odd=True)[..., 0] * flux[i] for i in range(2))
    assert np.abs(div).max() < 1e-15


def test_zero_state_is_steady():
    cfg = small_config(t_final=0.05, dt=1e-2, dt_list=(0.05, 0.025, 0.0125))
    g = cfg.make_grid()
    out = ls.run(cfg, u0=SpectralField.zeros(g))
    assert out.status == "ok"
    assert np.all(out.final.u.coeffs == 0)


def test_linear_decay_rate():
    cfg = small_config(t_final=1.0, dt=1e-3)
    g = cfg.make_grid()
    u0 = ls.initial_velocity(g, 1e-6)
    out = ls.run(cfg, u0=u0)
    ratio = anisotropic_norm(out.final.u, NormSpec()) / anisotropic_norm(u0, NormSpec())
    assert ratio == pytest.approx(math.exp(-1.0), rel=1e-2)


def test_initial_mean_must_vanish():
    cfg = small_config()
    g = cfg.make_grid()
    x, y = g.points()
    with pytest.raises(ValueError, match="vertical mean"):
        ls.run(cfg, u0=to_spectral(g, 0.01 * np.sin(x) + 0 * y))


def manufactured(amplitude, sigma, theta, grid):
    x, y = grid.points()

    def exact(t):
        return amplitude * math.exp(-t) * np.sin(x) * np.sin(y)

    def forcing(t):
        a = amplitude * math.exp(-t)
        q = a * np.sin(x) * np.cos(y)
        qq = -a * np.sin(x) * np.sin(y)
        F = quotient_flux_derivative(q, qq, sigma) - qq
        return to_spectral(grid, -(1 - theta) * F)

    return exact, forcing


def mms_error(dt, t_final=0.5, amplitude=0.5):
    cfg = RunConfig().with_updates(
        grid={"n_h": 16, "n_y": 32},
        stepping={"dt": dt, "t_final": t_final},
        # the radius band is not under test here
        monitors={"lam": 1e-3},
    )
    g = cfg.make_grid()
    params = cfg.material()
    exact, forcing = manufactured(amplitude, params.sigma, params.theta, g)
    out = ls.run(cfg, u0=to_spectral(g, exact(0.0)), forcing=forcing)
    assert out.status == "ok"
    return np.abs(to_physical(out.final.u)[0] - exact(t_final)).max()


def test_manufactured_solution_first_order():
    errs = [mms_error(dt) for dt in (0.02, 0.01, 0.005)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert errs[-1] < 2e-3
    assert np.all((orders > 0.8) & (orders < 1.2)), orders


def test_mean_stays_zero_and_divergence_free():
    cfg = small_config(t_final=0.2)
    out = ls.run(cfg.with_updates(params={"delta": 0.3}))
    assert max(out.report.array("mean_residual")) < 1e-15
    assert max(out.report.array("div_residual")) < 1e-12


def test_two_dimensional_solenoidal_mean_is_kept():
    cfg = RunConfig().with_updates(grid={"d_h": 2, "n_h": 8, "n_y": 8}, stepping={"t_final": 0.1, "dt": 1e-2})
    g = cfg.make_grid()
    x1, x2, y = g.points()
    u0 = to_spectral(g, 0.1 * np.stack([np.sin(x2) + np.sin(x1) * np.sin(y), np.cos(x2) * np.sin(y)]))
    out = ls.run(cfg.with_updates(stepping={"dt_list": (0.1, 0.05, 0.025)}), u0=u0)
    assert out.status == "ok"
    assert max(out.report.array("mean_residual")) < 1e-14
    assert max(out.report.array("div_residual")) < 1e-12


def test_run_is_deterministic():
    cfg = small_config(t_final=0.1)
    a, b = ls.run(cfg), ls.run(cfg)
    assert np.array_equal(a.final.u.coeffs, b.final.u.coeffs)
    for key in ls.LIMIT_COLUMNS:
        assert np.array_equal(a.report.array(key), b.report.array(key))


def test_report_columns_and_snapshots():
    cfg = small_config(t_final=0.05, output_every=2)
    out = ls.run(cfg)
    assert set(out.report.columns) == set(ls.LIMIT_COLUMNS)
    assert len(out.report.array("t")) == cfg.n_steps + 1
    # every second step plus the initial and final states
    assert [s.t for s in out.snapshots] == pytest.approx([0.0] + [0.002 * i for i in range(1, 25)] + [0.05])
    assert out.report.array("t")[-1] == 0.05


def test_blowup_ceiling_ends_run():
    cfg = small_config(t_final=0.05).with_updates(monitors={"ceiling": 1e-6})
    out = ls.run(cfg)
    assert out.status == "blowup"
    assert "ceiling" in out.report.message
    assert len(out.report.array("t")) == 1


def test_band_exhaustion_is_reported():
    cfg = small_config(t_final=0.2).with_updates(params={"delta": 0.6})
    out = ls.run(cfg)
    assert out.status == "band_exhausted"
    radius = out.report.array("psi_radius")
    # the last recorded state is the first with a non-positive radius
    assert radius[-1] <= 0 and np.all(radius[:-1] > 0)


def test_derived_fields_consistency():
    cfg = small_config()
    g = cfg.make_grid()
    state = ls.LimitState(ls.initial_velocity(g, 0.2))
    v, p, tau = ls.derived_fields(state, MaterialParams(0.5, 0.3))
    assert ls.divergence_residual(state.u, v) < 1e-15
    assert tau.ncomp == 6
    assert np.allclose(p.coeffs[..., 1:], 0)


def test_step_rejects_bad_dt():
    g = Grid(1, 8, 8)
    with pytest.raises(ValueError):
        ls.step(ls.LimitState(SpectralField.zeros(g)), 0.0, MaterialParams(0.5, 0.3))
