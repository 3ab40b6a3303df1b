"""Command-line front end.

Subcommands: analyze (stability report for a method), design (optimal
two-step construction), figure1 (trajectory/flow CSV bundle), compare
(optimizer vs integration twin), sweep (predicted vs fitted rate table).

Exit codes: 0 success, 1 comparison failure, 2 usage/config error,
3 I/O error.  All randomness is seeded; --reproducible suppresses the
only environment-dependent output line (the CSV timestamp header).
Flags win over --config file values; GRADFLOW_OUT_DIR sets the default
output directory.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__
from .analysis import deviation_from_flow, fit_geometric_rate
from .design import (
    design_m2,
    euler_optimal,
    from_change_of_variables,
    method_m1,
    method_m2,
    optimal_roots,
)
from .errors import (
    GradFlowError,
    InsufficientData,
    NonFiniteIterate,
)
from .integrators import (
    bootstrap_starts,
    imex_euler,
    implicit_euler,
    run_gode_imex,
    run_imex,
    run_negf_euler,
)
from .multistep import (
    MultistepMethod,
    euler,
    rate_prediction,
    run,
    stability_report,
)
from .optimizers import (
    gradient_descent,
    heavy_ball,
    mirror_descent,
    nesterov_sc,
    proximal_gradient,
    universal_gradient,
)
from .problems import (
    CompositeProblem,
    GenericOmega,
    L1Norm,
    QuadraticProblem,
    SquaredL2,
    entropy_geometry,
    euclidean_geometry,
    exact_flow,
    random_spd_quadratic,
)

BUILTIN_METHODS = ("euler", "m1", "m2", "polyak", "nesterov")
PAIRS = (
    "gd:euler",
    "polyak:m2",
    "nesterov:m1",
    "proxgrad:imex-euler",
    "mirror:negf-euler",
    "universal:gode-imex",
    "proxpoint:implicit-euler",
)


def _json_default(o):
    # numpy scalars leak out of the analysis layer
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True, default=_json_default))


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise click.UsageError(f"cannot read config file: {e}")
    except json.JSONDecodeError as e:
        raise click.UsageError(f"malformed config JSON: {e}")
    if not isinstance(cfg, dict):
        raise click.UsageError("config file must hold a JSON object")
    return cfg


def _merge(ctx, cfg, **values):
    """Flags win over config values, config values win over defaults."""
    out = {}
    for key, val in values.items():
        src = ctx.get_parameter_source(key)
        if src is not None and src.name == "COMMANDLINE":
            out[key] = val
        elif key in cfg:
            out[key] = cfg[key]
        else:
            out[key] = val
    return out


def _out_dir(path):
    d = path or os.environ.get("GRADFLOW_OUT_DIR") or "."
    try:
        os.makedirs(d, exist_ok=True)
    except OSError as e:
        click.echo(f"cannot create output directory: {e}", err=True)
        sys.exit(3)
    return d


def _build_method(builtin, method_file, mu, L, h):
    if method_file:
        try:
            with open(method_file) as fh:
                data = json.load(fh)
            m = MultistepMethod.from_json(data, name="from-file")
        except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError, GradFlowError) as e:
            raise click.UsageError(f"bad method file: {e}")
        return m.with_step(h) if h else m
    if builtin in ("m1", "nesterov"):
        m = method_m1(mu, L)
    elif builtin in ("m2", "polyak"):
        m = method_m2(mu, L)
    elif builtin == "euler":
        m = euler(h if h else 2.0 / (L + mu))
        return m
    else:
        raise click.UsageError(f"unknown builtin {builtin!r}")
    return m.with_step(h) if h else m


def _usage_guard(fn, *args, **kwargs):
    """Map domain errors on user-supplied values to exit code 2."""
    try:
        return fn(*args, **kwargs)
    except GradFlowError as e:
        raise click.UsageError(str(e))


@click.group()
@click.version_option(version=__version__, prog_name="gradflow")
def main():
    """Multi-step integration of gradient flow: analysis, design, experiments."""


# ---------------------------------------------------------------------------


@main.command("analyze")
@click.option("--builtin", type=click.Choice(BUILTIN_METHODS), default=None,
              help="Named method; nesterov=m1, polyak=m2.")
@click.option("--method-file", type=click.Path(), default=None,
              help="JSON file with {rho, sigma, h} (ascending coefficients).")
@click.option("--mu", type=float, default=1.0, show_default=True)
@click.option("--L", "L", type=float, default=10.0, show_default=True)
@click.option("--h", type=float, default=None, help="Override the method's step size.")
@click.option("--grid", type=int, default=129, show_default=True,
              help="Curvature grid size for the rate prediction.")
@click.option("--config", type=click.Path(), default=None)
@click.pass_context
def cmd_analyze(ctx, builtin, method_file, mu, L, h, grid, config):
    """Consistency, zero-stability and worst-case rate of a method."""
    cfg = _load_config(config)
    v = _merge(ctx, cfg, builtin=builtin, method_file=method_file, mu=mu, L=L, h=h, grid=grid)
    if not v["builtin"] and not v["method_file"]:
        raise click.UsageError("pick --builtin or --method-file")
    m = _usage_guard(_build_method, v["builtin"], v["method_file"], v["mu"], v["L"], v["h"])
    rep = stability_report(m)
    out = {
        "method": m.describe(),
        "consistent": rep.consistent,
        "consistency_residuals": [rep.residual_value, rep.residual_slope],
        "zero_stable": rep.zero_stable,
        "rho_roots": [
            {"root": [r.real, r.imag], "multiplicity": mult}
            for r, mult in rep.rho_condition.root_set.roots
        ],
        "offending_roots": [
            {"root": [r.real, r.imag], "multiplicity": mult, "reason": why}
            for r, mult, why in rep.rho_condition.offending
        ],
    }
    pred = _usage_guard(rate_prediction, m, v["mu"], v["L"], v["grid"])
    out["rate"] = {
        "interval": [pred.mu, pred.L],
        "r_max": pred.rate,
        "multiplicity": pred.multiplicity,
        "lambda_star": pred.lambda_star,
        "stable_on_interval": pred.rate <= 1.0 + 1e-9,
    }
    _echo_json(out)


# ---------------------------------------------------------------------------


@main.command("design")
@click.option("--mu", type=float, required=True)
@click.option("--L", "L", type=float, required=True)
@click.option("--h-hat", type=float, default=None,
              help="Normalized step; omit for the balanced (rate-optimal) choice.")
@click.option("--config", type=click.Path(), default=None)
@click.pass_context
def cmd_design(ctx, mu, L, h_hat, config):
    """Optimal two-step method for curvatures in [mu, L]."""
    cfg = _load_config(config)
    v = _merge(ctx, cfg, mu=mu, L=L, h_hat=h_hat)
    mu, L, h_hat = v["mu"], v["L"], v["h_hat"]
    if h_hat is None:
        m = _usage_guard(method_m2, mu, L)
        d = _usage_guard(design_m2, mu, L)
    else:
        c_mu, c_L = _usage_guard(optimal_roots, h_hat, mu, L)
        d = _usage_guard(from_change_of_variables, h_hat, c_mu, c_L, mu, L)
        m = d.method("designed")
    pred = _usage_guard(rate_prediction, m, mu, L)
    _, euler_rate = _usage_guard(euler_optimal, mu, L)
    _echo_json(
        {
            "method": m.to_json(),
            "name": m.name,
            "h_hat": d.h_hat,
            "c_mu": d.c_mu,
            "c_L": d.c_L,
            "predicted_rate": pred.rate,
            "rate_multiplicity": pred.multiplicity,
            "euler_optimal_rate": euler_rate,
        }
    )


# ---------------------------------------------------------------------------


def _race_iterations(traj, target, tol):
    errs = np.linalg.norm(traj.points - target, axis=1)
    hit = np.flatnonzero(errs <= tol)
    return int(hit[0]) if hit.size else None


@main.command("figure1")
@click.option("--mu", type=float, default=1.0, show_default=True)
@click.option("--L", "L", type=float, default=100.0, show_default=True)
@click.option("--dim", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--t-max", type=float, default=12.0, show_default=True,
              help="Horizon for the left-panel race.")
@click.option("--t-track", type=float, default=2.0, show_default=True,
              help="Horizon for the right-panel flow tracking.")
@click.option("--h", type=float, default=None,
              help="Common step for the right panel (default 1/L).")
@click.option("--tol", type=float, default=1e-3, show_default=True,
              help="Left-panel accuracy target.")
@click.option("--out", type=click.Path(), default=None,
              help="Output directory (default GRADFLOW_OUT_DIR or cwd).")
@click.option("--reproducible", is_flag=True, default=False,
              help="Suppress timestamp headers for byte-identical reruns.")
@click.option("--config", type=click.Path(), default=None)
@click.pass_context
def cmd_figure1(ctx, mu, L, dim, seed, t_max, t_track, h, tol, out, reproducible, config):
    """Race the three optimal methods to the flow endpoint (left panel) and
    track the flow itself at a common small step (right panel)."""
    cfg = _load_config(config)
    v = _merge(ctx, cfg, mu=mu, L=L, dim=dim, seed=seed, t_max=t_max,
               t_track=t_track, h=h, tol=tol, out=out, reproducible=reproducible)
    mu, L, dim, seed = v["mu"], v["L"], v["dim"], v["seed"]
    t_max, t_track, tol = v["t_max"], v["t_track"], v["tol"]
    out_dir = _out_dir(v["out"])

    p = _usage_guard(random_spd_quadratic, dim, mu, L, seed)
    direction = np.random.default_rng(seed + 1).standard_normal(dim)
    x0 = p.minimizer + direction / np.linalg.norm(direction)

    em, _ = euler_optimal(mu, L)
    methods = {"euler": em, "nesterov": method_m1(mu, L), "polyak": method_m2(mu, L)}

    # left panel: each method at its own step, racing to x(t_max)
    target = exact_flow(p, x0, t_max)
    left_rows = []
    left_summary = {}
    for name, m in methods.items():
        n = int(np.ceil(t_max / m.h))
        policy = "euler-warmup" if m.s == 1 else "matched-algorithm"
        starts = bootstrap_starts(m, p, x0, policy)
        traj = run(m, p, starts, n)
        errs = np.linalg.norm(traj.points - target, axis=1)
        for k, e in enumerate(errs):
            left_rows.append((name, k, k * m.h, e))
        left_summary[name] = _race_iterations(traj, target, tol)

    # right panel: common step, deviation from the flow, at h and h/2.
    # Tracking starts once the fast eigenmodes have left the flow (at
    # t_track/4): with h = 1/L the stiffest modes sit at h*lambda ~ 1 where
    # the one-step error is not yet linear in h, so measuring across the
    # boundary layer would not show the deviation halving with the step.
    h_common = v["h"] if v["h"] else 1.0 / L
    t_burn = 0.25 * t_track
    x0_track = exact_flow(p, x0, t_burn)
    right_rows = []
    right_summary = {}
    for name, m in methods.items():
        devs = {}
        for hh in (h_common, 0.5 * h_common):
            mm = m.with_step(hh)
            n = int(np.ceil((t_track - t_burn) / hh)) - (mm.s - 1)
            starts = bootstrap_starts(mm, p, x0_track, "exact-flow")
            traj = run(mm, p, starts, n)
            for k in range(len(traj)):
                dev = float(np.linalg.norm(traj.points[k] - exact_flow(p, x0_track, k * hh)))
                right_rows.append((name, hh, k, t_burn + k * hh, dev))
            devs[hh] = deviation_from_flow(traj, lambda t: exact_flow(p, x0_track, t))
        right_summary[name] = {
            "deviation_h": devs[h_common],
            "deviation_h_half": devs[0.5 * h_common],
            "ratio": devs[h_common] / devs[0.5 * h_common],
        }

    try:
        _write_csv(
            os.path.join(out_dir, "figure1_left.csv"),
            ["method", "k", "t", "err_to_flow_endpoint"],
            left_rows,
            v["reproducible"],
            comment=f"# race to x(t_max), mu={mu} L={L} dim={dim} seed={seed} t_max={t_max}",
        )
        _write_csv(
            os.path.join(out_dir, "figure1_right.csv"),
            ["method", "h", "k", "t", "deviation_from_flow"],
            right_rows,
            v["reproducible"],
            comment=(f"# flow tracking on [{t_burn}, {t_track}], "
                     f"mu={mu} L={L} dim={dim} seed={seed}"),
        )
        ts = np.linspace(0.0, t_max, 481)
        flow_rows = [(t, *exact_flow(p, x0, t)) for t in ts]
        _write_csv(
            os.path.join(out_dir, "figure1_flow.csv"),
            ["t"] + [f"x{i}" for i in range(dim)],
            flow_rows,
            v["reproducible"],
            comment=f"# exact flow samples, seed={seed}",
        )
    except OSError as e:
        click.echo(f"write failure: {e}", err=True)
        sys.exit(3)

    _echo_json(
        {
            "files": ["figure1_left.csv", "figure1_right.csv", "figure1_flow.csv"],
            "out_dir": out_dir,
            "left_iterations_to_tol": left_summary,
            "right_tracking": right_summary,
            "steps": {name: m.h for name, m in methods.items()},
        }
    )


def _write_csv(path, header, rows, reproducible, comment=None):
    import csv

    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(comment + "\n")
        if not reproducible:
            import datetime

            fh.write(f"# written {datetime.datetime.now().isoformat()}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, (str, int)) else repr(float(x)) for x in row])


# ---------------------------------------------------------------------------


def _rel_deviation(a, b):
    scale = max(float(np.max(np.linalg.norm(a.points, axis=1))), 1e-30)
    return float(np.max(np.linalg.norm(a.points - b.points, axis=1))) / scale


def _compare_pair(pair, mu, L, dim, seed, n, tol, geometry="entropy"):
    rng = np.random.default_rng(seed + 17)
    p = random_spd_quadratic(dim, mu, L, seed)
    x0 = p.minimizer + rng.standard_normal(dim)
    geom = entropy_geometry() if geometry == "entropy" else euclidean_geometry()
    # mirror runs need a start inside the geometry's domain
    x0_geom = np.full(dim, 1.0 / dim) if geometry == "entropy" else x0

    if pair == "gd:euler":
        h = 1.5 / L
        a = gradient_descent(p, h, x0, n)
        b = run(euler(h), p, x0[None, :], n)
    elif pair == "polyak:m2":
        m = method_m2(mu, L)
        a = heavy_ball(p, mu, L, x0, n)
        b = run(m, p, bootstrap_starts(m, p, x0, "matched-algorithm"), n - 1)
    elif pair == "nesterov:m1":
        m = method_m1(mu, L)
        a = nesterov_sc(p, mu, L, x0, n)
        b = run(m, p, bootstrap_starts(m, p, x0, "matched-algorithm"), n - 1)
    elif pair == "proxgrad:imex-euler":
        comp = CompositeProblem(p, L1Norm(0.1))
        h = 1.0 / L
        a = proximal_gradient(comp, h, x0, n)
        b = run_imex(imex_euler(h), comp, x0[None, :], n)
    elif pair == "mirror:negf-euler":
        h = 0.5 / L
        a = mirror_descent(p, geom, h, x0_geom, n)
        b = run_negf_euler(p, geom, h, x0_geom, n)
    elif pair == "universal:gode-imex":
        comp = CompositeProblem(p, SquaredL2(0.5))
        h = 0.5 / L
        a = universal_gradient(comp, geom, h, x0_geom, n)
        b = run_gode_imex(comp, geom, h, x0_geom, n)
    elif pair == "proxpoint:implicit-euler":
        h = 2.0 / L
        a = implicit_euler(p, h, x0, n)
        prox_f = GenericOmega(p.value, p.grad, hessian=p.hessian)
        b = implicit_euler(prox_f, h, x0, n)
    else:
        raise click.UsageError(f"unknown pair {pair!r}")
    dev = _rel_deviation(a, b)
    return {"pair": pair, "max_rel_deviation": dev, "tol": tol, "pass": dev <= tol}


@main.command("compare")
@click.option("--pair", type=click.Choice(PAIRS), required=True)
@click.option("--mu", type=float, default=1.0, show_default=True)
@click.option("--L", "L", type=float, default=9.0, show_default=True)
@click.option("--dim", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--geometry", type=click.Choice(["euclidean", "entropy"]),
              default="entropy", show_default=True,
              help="Mirror map used by the mirror/universal pairings.")
@click.option("--config", type=click.Path(), default=None)
@click.pass_context
def cmd_compare(ctx, pair, mu, L, dim, seed, n, tol, geometry, config):
    """Run an optimizer and its integration twin; fail (exit 1) if the
    iterates deviate beyond --tol."""
    cfg = _load_config(config)
    v = _merge(ctx, cfg, pair=pair, mu=mu, L=L, dim=dim, seed=seed, n=n, tol=tol,
               geometry=geometry)
    report = _usage_guard(
        _compare_pair, v["pair"], v["mu"], v["L"], v["dim"], v["seed"], v["n"],
        v["tol"], v["geometry"]
    )
    _echo_json(report)
    if not report["pass"]:
        sys.exit(1)


# ---------------------------------------------------------------------------


def _sweep_cell(m, mu, L, dim, seed, n):
    pred = rate_prediction(m, mu, L)
    p = random_spd_quadratic(dim, mu, L, seed) if mu < L else None
    if p is None:
        # kappa = 1: single eigenvalue; build directly
        A = mu * np.eye(dim)
        p = QuadraticProblem(A, A @ np.ones(dim), tag="spd-degenerate", seed=seed)
    x0 = p.minimizer + np.random.default_rng(seed + 3).standard_normal(dim)
    try:
        policy = "euler-warmup" if m.s == 1 else "exact-flow"
        traj = run(m, p, bootstrap_starts(m, p, x0, policy), n)
        fit = fit_geometric_rate(traj, p.minimizer)
        return {
            "predicted_rate": pred.rate,
            "fitted_rate": fit.rate,
            "r_squared": fit.r_squared,
            "status": "ok",
        }
    except (InsufficientData, NonFiniteIterate) as e:
        return {
            "predicted_rate": pred.rate,
            "fitted_rate": None,
            "r_squared": None,
            "status": type(e).__name__,
        }


@main.command("sweep")
@click.option("--methods", default="euler,m1,m2", show_default=True,
              help="Comma-separated subset of euler,m1,m2.")
@click.option("--mu", type=float, default=1.0, show_default=True)
@click.option("--L", "L", type=float, default=9.0, show_default=True)
@click.option("--kappa-grid", default=None,
              help="Comma-separated condition numbers (mu fixed, L = mu*kappa).")
@click.option("--h-grid", default=None,
              help="Comma-separated step sizes (methods rescaled; mu, L fixed).")
@click.option("--dim", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=int, default=400, show_default=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--reproducible", is_flag=True, default=False)
@click.option("--config", type=click.Path(), default=None)
@click.pass_context
def cmd_sweep(ctx, methods, mu, L, kappa_grid, h_grid, dim, seed, n, out, reproducible, config):
    """Predicted vs fitted rates over a condition-number or step-size grid."""
    cfg = _load_config(config)
    v = _merge(ctx, cfg, methods=methods, mu=mu, L=L, kappa_grid=kappa_grid,
               h_grid=h_grid, dim=dim, seed=seed, n=n, out=out, reproducible=reproducible)
    names = [s.strip() for s in v["methods"].split(",") if s.strip()]
    for nm in names:
        if nm not in ("euler", "m1", "m2"):
            raise click.UsageError(f"unknown method {nm!r} (euler, m1, m2)")
    if v["kappa_grid"] and v["h_grid"]:
        raise click.UsageError("pick one of --kappa-grid or --h-grid")

    def build(nm, mu_, L_):
        if nm == "euler":
            return euler_optimal(mu_, L_)[0]
        return {"m1": method_m1, "m2": method_m2}[nm](mu_, L_)

    rows = []
    if v["h_grid"]:
        try:
            hs = [float(s) for s in str(v["h_grid"]).split(",") if s.strip()]
        except ValueError as e:
            raise click.UsageError(f"bad --h-grid: {e}")
        for nm in names:
            base = _usage_guard(build, nm, v["mu"], v["L"])
            for hh in hs:
                cell = _usage_guard(
                    lambda: _sweep_cell(base.with_step(hh), v["mu"], v["L"],
                                        v["dim"], v["seed"], v["n"])
                )
                rows.append({"method": nm, "param": hh, "mu": v["mu"], "L": v["L"], **cell})
        param_name = "h"
    else:
        grid = str(v["kappa_grid"] or "4,9,100")
        try:
            kappas = [float(s) for s in grid.split(",") if s.strip()]
        except ValueError as e:
            raise click.UsageError(f"bad --kappa-grid: {e}")
        for nm in names:
            for kap in kappas:
                mu_, L_ = v["mu"], v["mu"] * kap
                base = _usage_guard(build, nm, mu_, L_)
                cell = _usage_guard(
                    lambda: _sweep_cell(base, mu_, L_, v["dim"], v["seed"], v["n"])
                )
                rows.append({"method": nm, "param": kap, "mu": mu_, "L": L_, **cell})
        param_name = "kappa"

    out_dir = _out_dir(v["out"])
    path = os.path.join(out_dir, "sweep.csv")
    try:
        _write_csv(
            path,
            ["method", param_name, "mu", "L", "predicted_rate", "fitted_rate",
             "r_squared", "status"],
            [
                (
                    r["method"], r["param"], r["mu"], r["L"], r["predicted_rate"],
                    "" if r["fitted_rate"] is None else r["fitted_rate"],
                    "" if r["r_squared"] is None else r["r_squared"],
                    r["status"],
                )
                for r in rows
            ],
            v["reproducible"],
            comment=f"# rate sweep, seed={v['seed']} dim={v['dim']} n={v['n']}",
        )
    except OSError as e:
        click.echo(f"write failure: {e}", err=True)
        sys.exit(3)
    _echo_json({"file": path, "seed": v["seed"], "cells": rows})


if __name__ == "__main__":
    main()
