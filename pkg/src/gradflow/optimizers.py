"""First-order optimizers in their native formulations, and the map that
re-reads each one as a linear multi-step integrator of gradient flow.

Every optimizer here advances with its own textbook recursion (momentum
form, two-sequence form, prox form, argmin form).  The corresponding
multi-step or mirror drivers advance with the recurrence form.  The point
of the package is that the two routes produce the same iterates; keeping
the implementations independent is what makes that a real check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import beta
from .errors import (
    InnerSolveFailure,
    InvalidInterval,
    NonPositiveValue,
    UnknownAlgorithm,
)
from .multistep import MultistepMethod, consistency_residuals, euler
from .polynomials import Polynomial
from .problems import CompositeProblem, MirrorGeometry
from .trajectory import Trajectory

IDENTIFIABLE = ("gradient_descent", "heavy_ball", "nesterov_sc")


def _start(x0) -> np.ndarray:
    return np.atleast_1d(np.asarray(x0, dtype=float))


def _traj(pts, h, name, extra=None, problem=None, h_list=None) -> Trajectory:
    info = {"name": name}
    if h is not None:
        info["h"] = h
    if extra:
        info.update(extra)
    return Trajectory(
        pts,
        h=h,
        h_list=h_list,
        method_info=info,
        problem_info=dict(getattr(problem, "info", {}) or {}),
    )


def gradient_descent(p, h: float, x0, n: int) -> Trajectory:
    """x_{k+1} = x_k - h grad f(x_k)."""
    if not h > 0:
        raise NonPositiveValue(f"step size must be positive, got {h}")
    x0 = _start(x0)
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    for k in range(n):
        pts[k + 1] = pts[k] - h * p.grad(pts[k])
    return _traj(pts, h, "gradient-descent", problem=p)


def heavy_ball(p, mu: float, L: float, x0, n: int) -> Trajectory:
    """Momentum form: x_{k+2} = x_{k+1} - c1 grad f(x_{k+1}) + c2 (x_{k+1} - x_k)
    with c1 = (1-beta^2)/sqrt(mu L) and c2 = beta^2.

    The first step has no history; the convention x_{-1} := x_0 makes it a
    plain gradient step with step c1.
    """
    b = beta(mu, L)
    h = 1.0 / np.sqrt(mu * L)
    c1 = h * (1.0 - b * b)
    c2 = b * b
    x0 = _start(x0)
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    if n >= 1:
        pts[1] = x0 - c1 * p.grad(x0)
    for k in range(n - 1):
        pts[k + 2] = pts[k + 1] - c1 * p.grad(pts[k + 1]) + c2 * (pts[k + 1] - pts[k])
    return _traj(pts, h, "heavy-ball", {"c1": c1, "c2": c2, "mu": mu, "L": L}, p)


def nesterov_sc(p, mu: float, L: float, x0, n: int) -> Trajectory:
    """Two-sequence accelerated form for strongly convex problems:

        y_{k+1} = x_k - (1/L) grad f(x_k)
        x_{k+1} = y_{k+1} + beta (y_{k+1} - y_k),    y_0 = x_0.
    """
    b = beta(mu, L)
    inv_L = 1.0 / L
    x0 = _start(x0)
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    y_prev = x0.copy()
    for k in range(n):
        y = pts[k] - inv_L * p.grad(pts[k])
        pts[k + 1] = y + b * (y - y_prev)
        y_prev = y
    return _traj(pts, 1.0 / (L * (1.0 - b)) if b < 1.0 else None, "nesterov-sc",
                 {"beta": b, "mu": mu, "L": L}, p)


def nesterov_convex(p, L: float, x0, n: int) -> Trajectory:
    """Accelerated method for merely convex problems, with the growing
    momentum beta_k = max(0, (k-2)/(k+1)):

        y_{k+1} = x_k - (1/L) grad f(x_k)
        x_{k+1} = y_{k+1} + beta_k (y_{k+1} - y_k).

    The trajectory records the identified per-step sizes h_k = (k+2)/(3L),
    so cumulative time grows like k^2/(6L).
    """
    if not L > 0:
        raise NonPositiveValue(f"L must be positive, got {L}")
    inv_L = 1.0 / L
    x0 = _start(x0)
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    y_prev = x0.copy()
    for k in range(n):
        y = pts[k] - inv_L * p.grad(pts[k])
        bk = max(0.0, (k - 2.0) / (k + 1.0))
        pts[k + 1] = y + bk * (y - y_prev)
        y_prev = y
    h_list = np.array([(k + 2.0) / (3.0 * L) for k in range(n)])
    return _traj(pts, None, "nesterov-convex", {"L": L}, p, h_list=h_list)


def proximal_gradient(c: CompositeProblem, h: float, x0, n: int) -> Trajectory:
    """Forward-backward splitting: gradient step on f, prox step on Omega."""
    if not h > 0:
        raise NonPositiveValue(f"step size must be positive, got {h}")
    x0 = _start(x0)
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    for k in range(n):
        y = pts[k] - h * c.smooth.grad(pts[k])
        pts[k + 1] = np.asarray(c.omega.prox(y, h), float)
    return _traj(pts, h, "proximal-gradient", problem=c)


def mirror_descent(p, geom: MirrorGeometry, h: float, x0, n: int) -> Trajectory:
    """x_{k+1} = argmin_x  h <grad f(x_k), x> + B_d(x, x_k).

    The argmin is solved through its first-order optimality system
    grad d(x_{k+1}) = grad d(x_k) - h grad f(x_k), re-deriving the dual
    point from the current primal iterate at every step.
    """
    if not h > 0:
        raise NonPositiveValue(f"step size must be positive, got {h}")
    x0 = geom.ensure_domain(_start(x0))
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    for k in range(n):
        rhs = np.asarray(geom.grad_d(pts[k]), float) - h * p.grad(pts[k])
        x = np.asarray(geom.grad_d_star(rhs), float)
        geom.ensure_domain(x)
        pts[k + 1] = x
    return _traj(pts, h, "mirror-descent", {"geometry": geom.name}, p)


def _primal_argmin(geom: MirrorGeometry, omega, rhs, x_init, h: float) -> np.ndarray:
    """Solve grad d(x) + h grad Omega(x) = rhs for x (the argmin optimality
    system of the composite mirror step), by damped Newton on the primal
    variable when curvature oracles exist, else by prox fixed point."""
    rhs = np.asarray(rhs, float)
    differentiable = getattr(omega, "differentiable", False)
    diag = getattr(omega, "hessian_diag", None)
    if differentiable and diag is not None and geom.d_hess_diag is not None:
        x = np.asarray(x_init, float).copy()
        for _ in range(100):
            G = np.asarray(geom.grad_d(x), float) + h * np.asarray(omega.grad(x), float) - rhs
            nG = np.linalg.norm(G)
            if nG <= 1e-13 * max(1.0, np.linalg.norm(rhs)):
                return x
            J = np.asarray(geom.d_hess_diag(x), float) + h * np.asarray(diag(x), float)
            step = G / J
            t = 1.0
            for _ in range(40):
                cand = x - t * step
                try:
                    geom.ensure_domain(cand)
                except Exception:
                    t *= 0.5
                    continue
                r = np.linalg.norm(
                    np.asarray(geom.grad_d(cand), float)
                    + h * np.asarray(omega.grad(cand), float)
                    - rhs
                )
                if r < nG:
                    x = cand
                    break
                t *= 0.5
            else:
                raise InnerSolveFailure("composite mirror step: Newton stalled")
        raise InnerSolveFailure("composite mirror step: Newton exceeded budget")
    # prox fixed point; with Euclidean geometry this is exact in one pass
    x = np.asarray(geom.grad_d_star(rhs), float)
    prev = np.inf
    for _ in range(1000):
        nx = np.asarray(omega.prox(x - np.asarray(geom.grad_d(x), float) + rhs, h), float)
        r = np.linalg.norm(nx - x)
        x = nx
        if r <= 1e-13 * max(1.0, np.linalg.norm(x)):
            return x
        if r > prev and r > 1e-9:
            raise InnerSolveFailure("composite mirror step: fixed point not contracting")
        prev = r
    raise InnerSolveFailure("composite mirror step: fixed point too slow")


def universal_gradient(c: CompositeProblem, geom: MirrorGeometry, h: float, x0, n: int) -> Trajectory:
    """x_{k+1} = argmin_x  h(<grad f(x_k), x> + Omega(x)) + B_d(x, x_k),
    solved through the optimality system in the primal variable."""
    if not h > 0:
        raise NonPositiveValue(f"step size must be positive, got {h}")
    x0 = geom.ensure_domain(_start(x0))
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    for k in range(n):
        rhs = np.asarray(geom.grad_d(pts[k]), float) - h * c.smooth.grad(pts[k])
        x = _primal_argmin(geom, c.omega, rhs, pts[k], h)
        geom.ensure_domain(x)
        pts[k + 1] = x
    return _traj(pts, h, "universal-gradient", {"geometry": geom.name}, c)


# ---------------------------------------------------------------------------
# identification


@dataclass(frozen=True)
class IdentifiedMethod:
    """The multi-step method hidden inside an optimizer's recursion.

    residuals = (|rho(1)|, |rho'(1) - sigma(1)|) after the step size was
    extracted by imposing consistency; both are rounding-level when the
    identification is exact.
    """

    method: MultistepMethod
    source: str
    residuals: tuple

    @property
    def h(self) -> float:
        return self.method.h


def identify_lmm(algorithm: str, mu: float = None, L: float = None, h: float = None) -> IdentifiedMethod:
    """Rewrite an optimizer's recursion as rho(E) x = h sigma(E) g with
    g = -grad f, extracting h from h sigma(1) = h rho'(1).

    Supported: gradient_descent (needs h), heavy_ball and nesterov_sc
    (need mu, L).  The returned coefficients are computed from the same
    closed forms the optimizers use, so they match the corresponding
    designed methods to rounding.
    """
    if algorithm == "gradient_descent":
        if h is None or not h > 0:
            raise NonPositiveValue("gradient_descent identification needs h > 0")
        m = euler(h)
        return IdentifiedMethod(m, algorithm, consistency_residuals(m))

    if algorithm in ("heavy_ball", "nesterov_sc"):
        if mu is None or L is None:
            raise InvalidInterval(f"{algorithm} identification needs mu and L")
        b = beta(mu, L)
        if algorithm == "heavy_ball":
            # x_{k+2} - (1+c2) x_{k+1} + c2 x_k = c1 g_{k+1}
            c2 = b * b
            c1 = (1.0 / np.sqrt(mu * L)) * (1.0 - b * b)
            rho = Polynomial([c2, -(1.0 + c2), 1.0])
            h_sigma = np.array([0.0, c1])
            name = "m2"
        else:
            # eliminate the y-sequence:
            # x_{k+2} - (1+b) x_{k+1} + b x_k = ((1+b)/L) g_{k+1} - (b/L) g_k
            rho = Polynomial([b, -(1.0 + b), 1.0])
            h_sigma = np.array([-b / L, (1.0 + b) / L])
            name = "m1"
        slope = rho.derivative()(1.0)
        h_ext = float(h_sigma.sum() / slope)
        sigma = Polynomial(h_sigma / h_ext)
        m = MultistepMethod(rho, sigma, h_ext, name)
        return IdentifiedMethod(m, algorithm, consistency_residuals(m))

    raise UnknownAlgorithm(
        f"cannot identify {algorithm!r}; supported: {', '.join(IDENTIFIABLE)}"
    )
