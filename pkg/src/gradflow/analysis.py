"""Empirical measurement on trajectories: geometric-rate fits, power-law
decay exponents, deviation from the continuous flow, and global-error
convergence studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, NonPositiveValue
from .integrators import bootstrap_starts
from .multistep import MultistepMethod, run
from .problems import QuadraticProblem, exact_flow
from .trajectory import Trajectory

# errors below 1e3 * eps * (initial error) are treated as rounding noise
FLOOR_FACTOR = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class RateFit:
    """Fitted geometric convergence factor.

    rate = exp(least-squares slope of log error vs k) over the tail window;
    window is the (first, last) iterate index actually used.
    """

    rate: float
    r_squared: float
    window: tuple

    @property
    def n_points(self) -> int:
        return self.window[1] - self.window[0] + 1


def _line_fit(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    """OLS slope, intercept and r^2 for y against x."""
    xm, ym = xs.mean(), ys.mean()
    dx = xs - xm
    dy = ys - ym
    denom = float(dx @ dx)
    if denom == 0.0:
        return 0.0, ym, 0.0
    slope = float(dx @ dy) / denom
    intercept = ym - slope * xm
    resid = ys - (slope * xs + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(dy @ dy)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def fit_geometric_rate(traj, x_star) -> RateFit:
    """Estimate the geometric factor of ||x_k - x*|| along a trajectory.

    Indices whose error has fallen to the rounding floor (relative to the
    initial error) are dropped; the fit uses the last 60% of what remains,
    which is long enough to average out the sign oscillation that complex
    or negative characteristic roots produce.  Needs at least 30 iterates
    overall and 10 above the floor.
    """
    if isinstance(traj, Trajectory):
        errors = traj.errors_to(x_star)
    else:
        errors = np.asarray(traj, dtype=float)
    if errors.size < 30:
        raise InsufficientData(f"need >= 30 iterates, got {errors.size}")
    e0 = errors[0]
    floor = FLOOR_FACTOR * e0
    usable = np.flatnonzero((errors > floor) & np.isfinite(errors))
    if usable.size < 10:
        raise InsufficientData(
            f"only {usable.size} iterates above the rounding floor"
        )
    tail = usable[int(0.4 * usable.size):]
    slope, _, r2 = _line_fit(tail.astype(float), np.log(errors[tail]))
    return RateFit(rate=float(np.exp(slope)), r_squared=r2, window=(int(tail[0]), int(tail[-1])))


def fit_decay_exponent(values, start_index: int = 0) -> float:
    """Log-log least-squares slope of a positive sequence against its index.

    values[i] is taken to sit at index start_index + i; index 0 (log 0) is
    skipped.  The fit uses the last 60% of the points.  Needs >= 50 points;
    non-positive values raise NonPositiveValue.
    """
    values = np.asarray(values, dtype=float)
    ks = start_index + np.arange(values.size)
    keep = ks >= 1
    values, ks = values[keep], ks[keep]
    if values.size < 50:
        raise InsufficientData(f"need >= 50 points, got {values.size}")
    if np.any(values <= 0.0) or np.any(~np.isfinite(values)):
        raise NonPositiveValue("decay fit needs strictly positive finite values")
    start = int(0.4 * values.size)
    slope, _, _ = _line_fit(np.log(ks[start:].astype(float)), np.log(values[start:]))
    return float(slope)


def deviation_from_flow(traj: Trajectory, flow) -> float:
    """max_k ||x_k - x(t_k)|| against a flow oracle t -> x(t)."""
    if traj.h is None:
        raise ValueError("deviation_from_flow needs a constant-step trajectory")
    dev = 0.0
    for k in range(len(traj)):
        d = float(np.linalg.norm(traj.points[k] - np.asarray(flow(k * traj.h), float)))
        dev = max(dev, d)
    return dev


def global_error_study(
    m: MultistepMethod,
    p: QuadraticProblem,
    t_max: float,
    h_list,
    x0=None,
) -> list:
    """Max global error over [0, t_max] for the method rescaled to each h.

    Starting values are exact flow samples, so the study isolates the
    method's own error propagation: for consistent zero-stable methods the
    column shrinks with h, for a zero-unstable method it does not.
    Returns one row dict per h: {h, n_steps, max_error}.
    """
    if x0 is None:
        x0 = p.minimizer + np.ones(p.dim) / np.sqrt(p.dim)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    rows = []
    for h in h_list:
        mm = m.with_step(float(h))
        s = mm.s
        n_points = int(np.floor(t_max / mm.h + 1e-9)) + 1
        n = n_points - s
        if n < 1:
            raise ValueError(f"t_max={t_max} too short for h={h} with s={s} starts")
        starts = bootstrap_starts(mm, p, x0, "exact-flow")
        traj = run(mm, p, starts, n)
        err = deviation_from_flow(traj, lambda t: exact_flow(p, x0, t))
        rows.append({"h": float(h), "n_steps": int(n), "max_error": float(err)})
    return rows
