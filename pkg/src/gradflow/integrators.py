"""Drivers for the non-explicit schemes: implicit Euler, multi-step
implicit-explicit methods, and the mirror-geometry flows, plus the
starting-value bootstrap for multi-step runs.

Sign conventions throughout: the smooth field is g = -grad f, the simple
field is omega = -grad Omega (a negative subgradient in the non-smooth
case).  Implicit substeps are resolved through proximal maps, so the
realized omega value of an implicit step is recovered exactly from the
update itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InnerSolveFailure,
    NonFiniteIterate,
    NonPositiveValue,
    PolicyUnavailable,
)
from .multistep import DIVERGENCE_LIMIT, MultistepMethod
from .design import method_m1, method_m2
from .polynomials import Polynomial
from .problems import (
    CompositeProblem,
    MirrorGeometry,
    QuadraticProblem,
    SmoothProblem,
    exact_flow,
)
from .trajectory import Trajectory

IMPLICIT_TOL = 1e-13
IMPLICIT_MAX_ITER = 100

BOOTSTRAP_POLICIES = ("exact-flow", "matched-algorithm", "euler-warmup")


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


@dataclass(frozen=True)
class ImexMethod:
    """rho(E) x = h (sigma(E) g + gamma(E) omega): explicit in the smooth
    field, implicit (through gamma_s) in the simple field."""

    rho: Polynomial
    sigma: Polynomial
    gamma: Polynomial
    h: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rho", _as_poly(self.rho))
        object.__setattr__(self, "sigma", _as_poly(self.sigma))
        object.__setattr__(self, "gamma", _as_poly(self.gamma))
        object.__setattr__(self, "h", float(self.h))
        if not self.h > 0:
            raise NonPositiveValue(f"step size must be positive, got {self.h}")
        if self.rho.degree < 1 or not self.rho.is_monic:
            raise ValueError("rho must be monic of degree >= 1")
        if self.sigma.degree >= self.rho.degree:
            raise ValueError("sigma must have degree below rho's (explicit part)")
        if self.gamma.degree > self.rho.degree:
            raise ValueError("gamma degree cannot exceed rho degree")

    @property
    def s(self) -> int:
        return self.rho.degree

    def describe(self) -> dict:
        return {
            "name": self.name,
            "rho": self.rho.coeffs.tolist(),
            "sigma": self.sigma.coeffs.tolist(),
            "gamma": self.gamma.coeffs.tolist(),
            "h": self.h,
        }


def imex_euler(h: float) -> ImexMethod:
    """One-step scheme: x_{k+1} = x_k + h g(x_k) + h omega(x_{k+1})."""
    return ImexMethod(
        Polynomial([-1.0, 1.0]), Polynomial([1.0]), Polynomial([0.0, 1.0]), h, "imex-euler"
    )


# ---------------------------------------------------------------------------
# starting values


def bootstrap_starts(m: MultistepMethod, p, x0, policy: str) -> np.ndarray:
    """s starting points for a multi-step run.

    Policies:

    * ``exact-flow``: sample the closed-form flow at 0, h, ..., (s-1) h
      (quadratic problems only);
    * ``euler-warmup``: one-step gradient steps at the method's own h;
    * ``matched-algorithm``: the first step the method's native-optimizer
      twin would take, x1 = x0 - h sigma_{s-1} grad f(x0) for the two-step
      optimal family (both twins start with exactly that gradient step).
    """
    if policy not in BOOTSTRAP_POLICIES:
        raise PolicyUnavailable(f"unknown policy {policy!r}; pick from {BOOTSTRAP_POLICIES}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    s = m.s
    if s == 1:
        return x0[None, :].copy()

    if policy == "exact-flow":
        if not isinstance(p, QuadraticProblem):
            raise PolicyUnavailable("exact-flow starts need a quadratic problem")
        return np.array([exact_flow(p, x0, i * m.h) for i in range(s)])

    if policy == "euler-warmup":
        pts = [x0]
        x = x0
        for _ in range(s - 1):
            x = x - m.h * p.grad(x)
            pts.append(x)
        return np.array(pts)

    # matched-algorithm: only defined for the paired two-step family
    if s != 2:
        raise PolicyUnavailable("matched-algorithm starts exist for two-step methods only")
    mu = getattr(p, "mu", None)
    L = getattr(p, "L", None)
    if mu is None or L is None or not 0.0 < mu <= L:
        raise PolicyUnavailable("matched-algorithm starts need problem curvatures mu, L")
    recognized = False
    for builder in (method_m1, method_m2):
        try:
            ref = builder(mu, L)
        except Exception:
            continue
        same_h = abs(ref.h - m.h) <= 1e-6 * ref.h
        same_rho = np.allclose(ref.rho.coeffs, m.rho.coeffs, rtol=1e-6, atol=1e-9)
        ref_sig = np.zeros(2)
        ref_sig[: ref.sigma.coeffs.size] = ref.sigma.coeffs
        m_sig = np.zeros(2)
        m_sig[: m.sigma.coeffs.size] = m.sigma.coeffs
        same_sigma = np.allclose(ref_sig, m_sig, rtol=1e-6, atol=1e-9)
        if same_h and same_rho and same_sigma:
            recognized = True
            break
    if not recognized:
        raise PolicyUnavailable("method is not one of the paired two-step optimizers")
    c1 = m.h * m.sigma.coeffs[-1]
    x1 = x0 - c1 * p.grad(x0)
    return np.array([x0, x1])


# ---------------------------------------------------------------------------
# implicit Euler / proximal point


def _implicit_grad_step(p, x, h: float) -> np.ndarray:
    """Solve z = x - h grad f(z) by damped Newton (needs a hessian oracle)
    or contraction iteration."""
    grad = p.grad
    hess = getattr(p, "hessian", None)
    z = x - h * grad(x)
    if hess is not None:
        for _ in range(IMPLICIT_MAX_ITER):
            F = z - x + h * grad(z)
            nF = np.linalg.norm(F)
            if nF <= IMPLICIT_TOL * max(1.0, np.linalg.norm(z)):
                return z
            J = np.eye(z.size) + h * np.asarray(hess(z), float)
            step = np.linalg.solve(J, F)
            t = 1.0
            for _ in range(30):
                cand = z - t * step
                if np.linalg.norm(cand - x + h * grad(cand)) < nF:
                    z = cand
                    break
                t *= 0.5
            else:
                raise InnerSolveFailure("implicit step: Newton stalled")
        raise InnerSolveFailure("implicit step: Newton exceeded iteration budget")
    prev = np.inf
    for _ in range(1000):
        nz = x - h * grad(z)
        r = np.linalg.norm(nz - z)
        z = nz
        if r <= IMPLICIT_TOL * max(1.0, np.linalg.norm(z)):
            return z
        if r > prev and r > 1.0:
            raise InnerSolveFailure("implicit step: fixed point diverging (need h L < 1)")
        prev = r
    raise InnerSolveFailure("implicit step: fixed point too slow")


def implicit_euler(p, h: float, x0, n: int) -> Trajectory:
    """x_{k+1} = x_k + h g(x_{k+1}), i.e. one proximal-point step per index.

    Quadratics use the exact linear solve; objects exposing a prox map use
    it directly; composite problems are treated as the pure simple part;
    other smooth problems fall back to a Newton/fixed-point inner solve.
    """
    if not h > 0:
        raise NonPositiveValue(f"step size must be positive, got {h}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0

    if isinstance(p, QuadraticProblem):
        w, V = p.eigenvalues, p.eigenvectors
        shrink = 1.0 / (1.0 + h * w)
        for k in range(n):
            pts[k + 1] = V @ (shrink * (V.T @ (pts[k] + h * p.b)))
        info = p.info
    elif isinstance(p, CompositeProblem):
        for k in range(n):
            pts[k + 1] = p.omega.prox(pts[k], h)
        info = p.info
    elif hasattr(p, "prox"):
        for k in range(n):
            pts[k + 1] = p.prox(pts[k], h)
        info = {"tag": type(p).__name__}
    else:
        for k in range(n):
            pts[k + 1] = _implicit_grad_step(p, pts[k], h)
        info = getattr(p, "info", {})

    return Trajectory(
        pts, h=h, method_info={"name": "implicit-euler", "h": h}, problem_info=dict(info)
    )


# ---------------------------------------------------------------------------
# implicit-explicit multi-step


def run_imex(m: ImexMethod, c: CompositeProblem, starts, n: int) -> Trajectory:
    """Advance the IMEX recurrence n steps.

    Per step the explicit combination (history of x, g, omega) is formed,
    then the gamma_s term is resolved through the prox of the simple part;
    the realized omega value (exactly a negative subgradient at the new
    point) enters the history for later steps.
    """
    s = m.s
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[0] != s:
        raise ValueError(f"need {s} starting points, got {starts.shape[0]}")
    d = starts.shape[1]
    h = m.h
    rho_c = m.rho.coeffs
    sig_c = m.sigma.coeffs
    gam_c = np.zeros(s + 1)
    gam_c[: m.gamma.coeffs.size] = m.gamma.coeffs
    gam_s = gam_c[s]
    if gam_s < 0:
        raise ValueError("gamma_s must be nonnegative")

    omega = c.omega
    history_weights_omega = np.any(gam_c[:s] != 0.0)
    differentiable = getattr(omega, "differentiable", False)

    pts = np.empty((n + s, d))
    pts[:s] = starts
    gs = [-c.smooth.grad(starts[i]) for i in range(s)]
    if history_weights_omega and not differentiable:
        raise InnerSolveFailure(
            "explicit gamma weights on history need a differentiable simple part"
        )
    oms = [
        -np.asarray(omega.grad(starts[i]), float) if differentiable else np.zeros(d)
        for i in range(s)
    ]

    for k in range(n):
        known = np.zeros(d)
        for i in range(s):
            known -= rho_c[i] * pts[k + i]
        for i in range(sig_c.size):
            if sig_c[i] != 0.0:
                known += (h * sig_c[i]) * gs[k + i]
        for i in range(s):
            if gam_c[i] != 0.0:
                known += (h * gam_c[i]) * oms[k + i]
        if gam_s == 0.0:
            x_new = known
            om_new = -np.asarray(omega.grad(x_new), float) if differentiable else np.zeros(d)
        else:
            x_new = np.asarray(omega.prox(known, h * gam_s), float)
            om_new = (x_new - known) / (h * gam_s)
        if not np.all(np.isfinite(x_new)) or np.max(np.abs(x_new)) > DIVERGENCE_LIMIT:
            raise NonFiniteIterate(f"iterate {k + s} diverged", step=k + s)
        pts[k + s] = x_new
        gs.append(-c.smooth.grad(x_new))
        oms.append(om_new)

    return Trajectory(pts, h=h, method_info=m.describe(), problem_info=dict(c.info))


# ---------------------------------------------------------------------------
# mirror-geometry flows


def run_negf_euler(p, geom: MirrorGeometry, h: float, x0, n: int) -> Trajectory:
    """Explicit Euler in the dual variable: y_{k+1} = y_k - h grad f(x_k),
    x_{k+1} = grad d*(y_{k+1})."""
    if not h > 0:
        raise NonPositiveValue(f"step size must be positive, got {h}")
    x0 = geom.ensure_domain(np.atleast_1d(np.asarray(x0, dtype=float)))
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    y = np.asarray(geom.grad_d(x0), float)
    for k in range(n):
        y = y - h * p.grad(pts[k])
        x = np.asarray(geom.grad_d_star(y), float)
        if not np.all(np.isfinite(x)):
            raise NonFiniteIterate(f"iterate {k + 1} diverged", step=k + 1)
        geom.ensure_domain(x)
        pts[k + 1] = x
    return Trajectory(
        pts,
        h=h,
        method_info={"name": "negf-euler", "h": h, "geometry": geom.name},
        problem_info=dict(getattr(p, "info", {})),
    )


def _dual_projection(geom: MirrorGeometry, omega, z, h: float) -> np.ndarray:
    """Solve y = z - h grad Omega(grad d*(y)) for the dual iterate.

    Newton when Omega is differentiable with a diagonal curvature oracle
    and the geometry is separable; otherwise a primal proximal fixed point
    x <- prox_{Omega,h}(x - grad d(x) + z), which fixes exactly the points
    with grad d(x) + h partial Omega(x) containing z.
    """
    z = np.asarray(z, float)
    differentiable = getattr(omega, "differentiable", False)
    diag = getattr(omega, "hessian_diag", None)
    if differentiable and diag is not None and geom.d_star_jac_diag is not None:
        y = z.copy()
        for _ in range(IMPLICIT_MAX_ITER):
            x = np.asarray(geom.grad_d_star(y), float)
            G = y - z + h * np.asarray(omega.grad(x), float)
            nG = np.linalg.norm(G)
            if nG <= IMPLICIT_TOL * max(1.0, np.linalg.norm(y)):
                return y
            J = 1.0 + h * np.asarray(diag(x), float) * np.asarray(
                geom.d_star_jac_diag(y), float
            )
            step = G / J
            t = 1.0
            for _ in range(30):
                cand = y - t * step
                xc = np.asarray(geom.grad_d_star(cand), float)
                if np.linalg.norm(cand - z + h * np.asarray(omega.grad(xc), float)) < nG:
                    y = cand
                    break
                t *= 0.5
            else:
                raise InnerSolveFailure("dual projection: Newton stalled")
        raise InnerSolveFailure("dual projection: Newton exceeded iteration budget")

    x = np.asarray(geom.grad_d_star(z), float)
    prev = np.inf
    for _ in range(1000):
        nx = np.asarray(omega.prox(x - np.asarray(geom.grad_d(x), float) + z, h), float)
        r = np.linalg.norm(nx - x)
        x = nx
        if r <= IMPLICIT_TOL * max(1.0, np.linalg.norm(x)):
            return np.asarray(geom.grad_d(x), float)
        if r > prev and r > 1e-9:
            raise InnerSolveFailure("dual projection: fixed point not contracting")
        prev = r
    raise InnerSolveFailure("dual projection: fixed point too slow")


def run_gode_imex(c: CompositeProblem, geom: MirrorGeometry, h: float, x0, n: int) -> Trajectory:
    """Generalized flow, implicit in the simple part, one step per index:

    1. dual gradient step      z_{k+1} = y_k - h grad f(x_k)
    2. dual projection step    y_{k+1} solves y = z_{k+1} - h grad Omega(grad d*(y))
    3. primal mapping          x_{k+1} = grad d*(y_{k+1})
    """
    if not h > 0:
        raise NonPositiveValue(f"step size must be positive, got {h}")
    x0 = geom.ensure_domain(np.atleast_1d(np.asarray(x0, dtype=float)))
    pts = np.empty((n + 1, x0.size))
    pts[0] = x0
    y = np.asarray(geom.grad_d(x0), float)
    for k in range(n):
        z = y - h * c.smooth.grad(pts[k])
        y = _dual_projection(geom, c.omega, z, h)
        x = np.asarray(geom.grad_d_star(y), float)
        if not np.all(np.isfinite(x)):
            raise NonFiniteIterate(f"iterate {k + 1} diverged", step=k + 1)
        geom.ensure_domain(x)
        pts[k + 1] = x
    return Trajectory(
        pts,
        h=h,
        method_info={"name": "gode-imex", "h": h, "geometry": geom.name},
        problem_info=dict(c.info),
    )
