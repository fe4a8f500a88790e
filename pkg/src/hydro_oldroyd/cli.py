"""Command-line entry point and run orchestration.

Exit codes:

    0  success (monitors may still report violations unless strict)
    2  configuration or usage error
    3  numerical failure (non-finite state or norm above the ceiling)
    4  monitor or check violation, only in strict mode
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import __version__, eps_solver, harness, limit_solver
from ._backend import BACKEND
from .config import MODES, ConfigError, RunConfig, as_dict, load_config, serialize, validate
from .diagnostics import zeta_phi
from .eps_solver import EPS_COLUMNS, hypothesis_quantities
from .limit_solver import LIMIT_COLUMNS
from .reporting import write_csv, write_json
from .spectral import Grid

__all__ = ["EXIT_OK", "EXIT_CONFIG", "EXIT_BLOWUP", "EXIT_MONITOR", "ExecResult", "execute", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_MONITOR = 4

RATE_BAND = (0.8, 1.2)
ORDER_BAND = (0.7, 1.3)
DIV_TOL_EPS = 1e-10
DIV_TOL_LIMIT = 1e-12


@dataclass
class ExecResult:
    exit_code: int
    summary: dict
    files: list = field(default_factory=list)


def _series_rows(report, columns):
    cols = [report.columns[c] for c in columns]
    return list(zip(*cols))


def _limit_checks(run, config):
    r = run.report
    m, p = config.monitors, config.params
    return {
        "bootstrap": bool(np.all(r.array("bootstrap_ok") > 0)),
        "energy": bool(r.array("energy_ratio").max() <= m.energy_bound),
        "poincare": bool(r.array("poincare_margin").min() >= 0),
        "psi_radius_half": bool(r.array("psi_radius").min() >= 0.5 * p.radius_a),
        "eta_monotone": bool(np.all(np.diff(r.array("eta1") + r.array("eta2")) >= 0)),
        "incompressible": bool(r.array("div_residual").max() <= DIV_TOL_LIMIT),
        "band": r.status != "band_exhausted",
    }


def _first_violation(report, key, bad):
    arr = report.array(key)
    idx = np.flatnonzero(bad(arr))
    return float(report.array("t")[idx[0]]) if idx.size else None


def _run_limit(config, out):
    run = limit_solver.run(config)
    r = run.report
    write_csv(out / "timeseries.csv", LIMIT_COLUMNS, _series_rows(r, LIMIT_COLUMNS))
    checks = _limit_checks(run, config)
    summary = {
        "status": r.status,
        "message": r.message,
        "t_end": float(r.array("t")[-1]),
        "energy_ratio_max": float(r.array("energy_ratio").max()),
        "psi_radius_min": float(r.array("psi_radius").min()),
        "eta_final": float(r.array("eta1")[-1] + r.array("eta2")[-1]),
        "bootstrap_violation_time": _first_violation(r, "bootstrap_ok", lambda a: a <= 0),
        "div_residual_max": float(r.array("div_residual").max()),
        "checks": checks,
    }
    return run.status, all(checks.values()), summary, ["timeseries.csv"]


def _run_eps(config, out):
    lim = limit_solver.run(config)
    run = eps_solver.run(config)
    r = run.report
    write_csv(out / "timeseries.csv", EPS_COLUMNS, _series_rows(r, EPS_COLUMNS))
    hyp = hypothesis_quantities(r)
    bound = 100.0 * config.monitors.small_c1 * config.params.radius_a
    checks = {
        "incompressible": bool(r.array("div_residual").max() <= DIV_TOL_EPS),
        "hypothesis_bound": bool(np.isfinite(hyp["total"]) and hyp["total"] <= bound),
    }
    summary = {
        "status": r.status,
        "message": r.message,
        "eps": config.params.eps,
        "t_end": float(r.array("t")[-1]),
        "div_residual_max": float(r.array("div_residual").max()),
        "hypothesis": hyp,
        "hypothesis_bound": bound,
    }
    if run.status == "ok" and lim.status == "ok":
        z = zeta_phi(r, lim.report, config.params.radius_a, config.monitors.lam_tilde)
        checks["phi_sandwich"] = z.holds
        checks["zeta_monotone"] = bool(np.all(np.diff(z.zeta) >= 0))
        summary["zeta_final"] = float(z.zeta[-1])
        summary["phi_radius_min"] = float(z.phi_radius.min())
    summary["checks"] = checks
    status = run.status if run.status != "ok" else lim.status
    return status, all(checks.values()), summary, ["timeseries.csv"]


def _run_convergence(config, out):
    study = harness.convergence_study(config)
    rows = [(t["eps"], t["error"], t["error_u"], t["error_tau"]) for t in study.table()]
    write_csv(out / "rates.csv", ("eps", "error", "error_u", "error_tau"), rows)
    lo, hi = RATE_BAND
    in_band = study.slope is not None and lo <= study.slope <= hi
    ok = study.complete and not study.degenerate and in_band and study.monotone
    summary = {
        "eps_list": list(study.eps_list),
        "slope": study.slope,
        "intercept": study.intercept,
        "residual": study.residual,
        "slope_u": study.slope_u,
        "slope_tau": study.slope_tau,
        "monotone": study.monotone,
        "degenerate": study.degenerate,
        "failures": {str(k): v for k, v in study.failures.items()},
        "slope_band": list(RATE_BAND),
        "pass": bool(ok),
    }
    status = "ok" if study.complete else "blowup"
    return status, ok, summary, ["rates.csv"]


def lemma_suite(config):
    """All lemma checks of a configuration, in a fixed order."""
    p, m = config.params, config.monitors
    seed = p.seed
    grid = Grid(config.grid.d_h, m.lemma_n_list[0], m.lemma_n_list[0])
    sigma = config.material().sigma
    common = dict(s1=p.s1, s2=p.s2, r=p.radius_a, seed=seed)
    reports = [
        harness.lemma_magnitude_check(m.lemma_samples, grid=grid, **common),
        harness.lemma_product_check(m.lemma_samples, p.s1, p.s2, p.radius_a, m.lemma_n_list, config.grid.d_h, seed),
        harness.lemma_composition_check(m.lemma_samples, "g1", m.eps0, sigma=sigma, grid=grid, **common),
        harness.lemma_composition_check(m.lemma_samples, "g2", m.eps0, sigma=sigma, grid=grid, **common),
    ]
    tiny = harness.lemma_composition_check(m.lemma_samples, "g1", m.eps0, sigma=sigma, grid=grid, amplitude=1e-4, **common)
    tiny.name = "composition_g1_linearization"
    tiny.ceiling = None
    rel = abs(tiny.max_ratio - sigma) / sigma if sigma > 0 else float("inf")
    tiny.details = {"sigma": sigma, "relative_gap": rel}
    tiny.conditions = {"near_sigma": rel <= 0.1}
    reports.append(tiny)
    return reports


def _run_lemmas(config, out):
    reports = lemma_suite(config)
    rows = [(rep.name, i, ratio) for rep in reports for i, ratio in enumerate(rep.ratios)]
    write_csv(out / "lemmas.csv", ("check", "sample", "ratio"), rows)
    summary = {
        rep.name: {
            "samples": rep.samples,
            "max_ratio": rep.max_ratio,
            "ceiling": rep.ceiling,
            "violations": rep.violations,
            "skipped": rep.skipped,
            "details": rep.details,
            "conditions": rep.conditions,
            "pass": rep.passed,
        }
        for rep in reports
    }
    ok = all(rep.passed for rep in reports)
    summary["pass"] = ok
    return "ok", ok, summary, ["lemmas.csv"]


def _run_selfconv(config, out):
    reports = [harness.self_convergence(config, solver=s) for s in ("limit", "eps")]
    rows = [(rep.solver, dt, d) for rep in reports for dt, d in zip(rep.dt_list, rep.differences)]
    write_csv(out / "selfconv.csv", ("solver", "dt", "difference"), rows)
    summary = {
        rep.solver: {
            "order": rep.order,
            "degenerate": rep.degenerate,
            "differences": rep.differences,
            "pass": rep.within(*ORDER_BAND),
        }
        for rep in reports
    }
    ok = all(rep.within(*ORDER_BAND) for rep in reports)
    summary["order_band"] = list(ORDER_BAND)
    summary["pass"] = ok
    return "ok", ok, summary, ["selfconv.csv"]


_RUNNERS = {
    "limit": _run_limit,
    "eps": _run_eps,
    "convergence": _run_convergence,
    "lemmas": _run_lemmas,
    "selfconv": _run_selfconv,
}


def execute(config, mode=None, out_dir=None, strict=None):
    """Run one mode and write manifest, table(s) and summary into ``out_dir``.

    Returns:
        ExecResult with the exit code and the summary written.
    """
    mode = mode or config.params.mode
    if mode not in MODES:
        raise ConfigError([f"mode {mode!r}: must be one of {', '.join(MODES)}"])
    config = config.with_updates(params={"mode": mode})
    validate(config, mode)
    strict = config.monitors.strict if strict is None else strict
    out = Path(out_dir or config.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": __version__,
        "backend": BACKEND,
        "mode": mode,
        "seed": config.params.seed,
        # the output location does not influence results and is not echoed
        "config": {k: v for k, v in as_dict(config).items() if k != "output"},
    }
    write_json(out / "manifest.json", manifest)
    status, ok, summary, files = _RUNNERS[mode](config, out)
    summary = {"mode": mode, "status": status, "monitors_ok": ok, "strict": strict, **summary}
    write_json(out / "summary.json", summary)
    if status == "blowup":
        code = EXIT_BLOWUP
    elif not ok and strict:
        code = EXIT_MONITOR
    else:
        code = EXIT_OK
    return ExecResult(code, summary, ["manifest.json", *files, "summary.json"])


def _load(config_path, seed, out):
    text = Path(config_path).read_text(encoding="utf-8") if config_path else ""
    config = load_config(text, validate_ranges=False)
    if seed is not None:
        config = config.with_updates(params={"seed": seed})
    if out is not None:
        config = config.with_updates(output={"dir": str(out)})
    return config


def _invoke(config_path, mode, out, seed, strict):
    try:
        config = _load(config_path, seed, out)
        result = execute(config, mode, strict=True if strict else None)
    except ConfigError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_CONFIG)
    summary = result.summary
    click.echo(f"mode={summary['mode']} status={summary['status']} monitors_ok={summary['monitors_ok']}")
    click.echo(f"wrote {', '.join(result.files)} to {config.output.dir}")
    sys.exit(result.exit_code)


_common = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Configuration file."),
    click.option("--out", type=click.Path(file_okay=False), help="Output directory (overrides [output] dir)."),
    click.option("--seed", type=int, help="Random seed (overrides [params] seed)."),
    click.option("--strict", is_flag=True, help="Exit with status 4 on monitor violations."),
]


def _with_common(func):
    for opt in reversed(_common):
        func = opt(func)
    return func


@click.group()
@click.version_option(__version__)
def main():
    """Solvers and diagnostics for the hydrostatic Oldroyd-B limit."""


@main.command("run")
@click.option("--mode", type=click.Choice(MODES), help="Mode (overrides [params] mode).")
@_with_common
def run_cmd(mode, config_path, out, seed, strict):
    """Run the mode given by --mode or the configuration."""
    _invoke(config_path, mode, out, seed, strict)


def _mode_command(mode, doc):
    @_with_common
    def cmd(config_path, out, seed, strict):
        _invoke(config_path, mode, out, seed, strict)

    cmd.__doc__ = doc
    main.command(mode)(cmd)


_mode_command("limit", "Integrate the limit system and its monitors.")
_mode_command("eps", "Integrate the rescaled system at [params] eps.")
_mode_command("convergence", "Rate study over [params] eps_list.")
_mode_command("lemmas", "Randomized checks of the weighted-norm inequalities.")
_mode_command("selfconv", "Temporal self-convergence of both solvers over [stepping] dt_list.")


@main.command("defaults")
def defaults_cmd():
    """Print the default configuration."""
    click.echo(serialize(RunConfig()), nl=False)
