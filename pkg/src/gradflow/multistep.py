"""Linear multi-step methods applied to gradient flow.

A method is the pair of generating polynomials (rho, sigma) together with a
step size h.  Applied to dx/dt = g(x) with g = -grad f, the recurrence is

    sum_i rho_i x_{k+i} = h * sum_i sigma_i g(x_{k+i}),

with rho monic of degree s.  The method is explicit when sigma has degree
below s, which is the only kind `run` integrates; implicit and
implicit-explicit schemes live in the integrators module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NonFiniteIterate, NonPositiveValue, InvalidInterval
from .polynomials import (
    DEFAULT_ROOT_TOL,
    Polynomial,
    RootConditionReport,
    root_condition,
    roots,
)
from .trajectory import Trajectory

DEFAULT_CONSISTENCY_TOL = 1e-10
DEFAULT_RATE_GRID = 129
DIVERGENCE_LIMIT = 1e100


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


@dataclass(frozen=True)
class MultistepMethod:
    """(rho, sigma, h) with rho monic of degree >= 1 and h > 0."""

    rho: Polynomial
    sigma: Polynomial
    h: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rho", _as_poly(self.rho))
        object.__setattr__(self, "sigma", _as_poly(self.sigma))
        object.__setattr__(self, "h", float(self.h))
        if not self.h > 0:
            raise NonPositiveValue(f"step size must be positive, got {self.h}")
        if self.rho.degree < 1:
            raise ValueError("rho must have degree >= 1")
        if not self.rho.is_monic:
            raise ValueError("rho must be monic (leading coefficient 1)")
        if self.sigma.degree > self.rho.degree:
            raise ValueError("sigma degree cannot exceed rho degree")

    @property
    def s(self) -> int:
        """Number of steps."""
        return self.rho.degree

    @property
    def is_explicit(self) -> bool:
        return self.sigma.degree < self.s

    def with_step(self, h: float) -> "MultistepMethod":
        return MultistepMethod(self.rho, self.sigma, h, self.name)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "rho": self.rho.coeffs.tolist(),
            "sigma": self.sigma.coeffs.tolist(),
            "h": self.h,
            "steps": self.s,
            "explicit": self.is_explicit,
        }

    def to_json(self) -> dict:
        return {
            "rho": self.rho.coeffs.tolist(),
            "sigma": self.sigma.coeffs.tolist(),
            "h": self.h,
        }

    @classmethod
    def from_json(cls, d: dict, name: str = "") -> "MultistepMethod":
        return cls(Polynomial(d["rho"]), Polynomial(d["sigma"]), float(d["h"]), name)


def euler(h: float) -> MultistepMethod:
    """Explicit one-step method: x_{k+1} = x_k + h g(x_k)."""
    return MultistepMethod(Polynomial([-1.0, 1.0]), Polynomial([1.0]), h, "euler")


def consistency_residuals(m: MultistepMethod) -> tuple[float, float]:
    """(|rho(1)|, |rho'(1) - sigma(1)|); both vanish for a consistent method."""
    return abs(m.rho(1.0)), abs(m.rho.derivative()(1.0) - m.sigma(1.0))


def is_consistent(m: MultistepMethod, tol: float = DEFAULT_CONSISTENCY_TOL) -> bool:
    """True when both consistency residuals are within tol."""
    r0, r1 = consistency_residuals(m)
    return r0 <= tol and r1 <= tol


def is_zero_stable(m: MultistepMethod, tol: float = DEFAULT_ROOT_TOL) -> bool:
    """Root condition on rho: moduli <= 1, unit-circle roots simple."""
    return root_condition(m.rho, tol).ok


@dataclass(frozen=True)
class StabilityReport:
    """Consistency and zero-stability in one bundle, with the evidence."""

    consistent: bool
    zero_stable: bool
    residual_value: float
    residual_slope: float
    rho_condition: RootConditionReport

    @property
    def convergent(self) -> bool:
        # the two properties together are exactly what convergence requires
        return self.consistent and self.zero_stable


def stability_report(
    m: MultistepMethod,
    tol_consistency: float = DEFAULT_CONSISTENCY_TOL,
    tol_root: float = DEFAULT_ROOT_TOL,
) -> StabilityReport:
    r0, r1 = consistency_residuals(m)
    cond = root_condition(m.rho, tol_root)
    return StabilityReport(
        consistent=(r0 <= tol_consistency and r1 <= tol_consistency),
        zero_stable=cond.ok,
        residual_value=r0,
        residual_slope=r1,
        rho_condition=cond,
    )


def characteristic_polynomial(m: MultistepMethod, lambda_h: float) -> Polynomial:
    """pi_{lambda h} = rho + lambda*h*sigma, governing the recurrence on an
    eigendirection with curvature lambda."""
    return m.rho + m.sigma.scale(lambda_h)


def in_stability_region(
    m: MultistepMethod, lambda_h: float, tol: float = DEFAULT_ROOT_TOL
) -> bool:
    """Root condition for pi_{lambda h}."""
    return root_condition(characteristic_polynomial(m, lambda_h), tol).ok


@dataclass(frozen=True)
class RatePrediction:
    """Worst-case asymptotic convergence factor over curvatures in [mu, L].

    Iterate errors behave like k**(multiplicity - 1) * rate**k, with the
    polynomial factor present only when the extremal root is repeated.
    """

    rate: float
    multiplicity: int
    lambda_star: float
    mu: float
    L: float
    grid_size: int


def _check_interval(mu: float, L: float) -> None:
    if not (0.0 < mu <= L) or not np.isfinite(mu) or not np.isfinite(L):
        raise InvalidInterval(f"need 0 < mu <= L, got mu={mu}, L={L}")


def rate_profile(
    m: MultistepMethod, mu: float, L: float, grid_size: int = DEFAULT_RATE_GRID
):
    """(lambda grid, largest root modulus of pi_{lambda h} at each grid point)."""
    _check_interval(mu, L)
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    lams = np.linspace(mu, L, grid_size)
    mods = np.empty(grid_size)
    for i, lam in enumerate(lams):
        mods[i] = roots(characteristic_polynomial(m, lam * m.h)).max_modulus()
    return lams, mods


def rate_prediction(
    m: MultistepMethod, mu: float, L: float, grid_size: int = DEFAULT_RATE_GRID
) -> RatePrediction:
    """Maximize the spectral factor of pi_{lambda h} over a uniform inclusive
    grid of curvatures lambda in [mu, L]."""
    _check_interval(mu, L)
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    lams = np.linspace(mu, L, grid_size)
    best = -1.0
    best_lam = lams[0]
    best_mult = 1
    for lam in lams:
        rs = roots(characteristic_polynomial(m, lam * m.h))
        mod = rs.max_modulus()
        if mod > best:
            best = mod
            best_lam = float(lam)
            best_mult = rs.max_multiplicity_at(mod)
    return RatePrediction(
        rate=best,
        multiplicity=best_mult,
        lambda_star=best_lam,
        mu=float(mu),
        L=float(L),
        grid_size=grid_size,
    )


def truncation_error(m: MultistepMethod, flow, grad_f, k: int = 0) -> np.ndarray:
    """Local error vector of the method against an exact trajectory.

    flow maps time t to the exact point x(t); the residual inserts
    x(t_k), ..., x(t_{k+s}) into the recurrence and divides by h:

        T(h) = (1/h) * sum_i rho_i x(t_{k+i}) - sum_i sigma_i g(x(t_{k+i}))

    with g = -grad_f and t_j = j*h.
    """
    h = m.h
    pts = [np.asarray(flow((k + i) * h), dtype=float) for i in range(m.s + 1)]
    acc = np.zeros_like(pts[0])
    for i, c in enumerate(m.rho.coeffs):
        if c != 0.0:
            acc = acc + c * pts[i]
    acc = acc / h
    for i, c in enumerate(m.sigma.coeffs):
        if c != 0.0:
            acc = acc - c * (-np.asarray(grad_f(pts[i]), dtype=float))
    return acc


def _gradient_of(problem):
    if callable(problem):
        return problem
    grad = getattr(problem, "grad", None)
    if grad is None:
        raise TypeError("need a gradient callable or an object with .grad")
    return grad


def run(
    m: MultistepMethod,
    problem,
    starts,
    n: int,
    limit: float = DIVERGENCE_LIMIT,
) -> Trajectory:
    """Advance an explicit method n steps from s starting points.

    `problem` is either a callable returning grad f, or a problem object;
    quadratic problems (objects exposing A and b) run through the compiled
    recurrence kernel, everything else through a plain Python loop.  Raises
    NonFiniteIterate as soon as an iterate overflows or stops being finite.
    """
    if not m.is_explicit:
        raise ValueError("run integrates explicit methods only; see integrators")
    if n < 0:
        raise ValueError("n must be >= 0")
    s = m.s
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[0] != s:
        raise ValueError(f"need {s} starting points, got {starts.shape[0]}")
    info = {}
    if hasattr(problem, "info"):
        info = dict(problem.info)

    A = getattr(problem, "A", None)
    b = getattr(problem, "b", None)
    if A is not None and b is not None:
        pts, bad = kernels.lmm_quadratic(
            m.rho.coeffs, m.sigma.coeffs, m.h, A, b, starts, n, limit
        )
        if bad >= 0:
            raise NonFiniteIterate(
                f"iterate {bad} exceeded {limit:g} or became non-finite", step=bad
            )
        return Trajectory(pts, h=m.h, method_info=m.describe(), problem_info=info)

    grad = _gradient_of(problem)
    d = starts.shape[1]
    pts = np.empty((n + s, d))
    pts[:s] = starts
    gs = [-np.asarray(grad(starts[i]), dtype=float) for i in range(s)]
    rho_c = m.rho.coeffs
    sigma_c = m.sigma.coeffs
    for k in range(n):
        acc = np.zeros(d)
        for i in range(s):
            acc -= rho_c[i] * pts[k + i]
        for i in range(sigma_c.size):
            if sigma_c[i] != 0.0:
                acc += (m.h * sigma_c[i]) * gs[k + i]
        if not np.all(np.isfinite(acc)) or np.max(np.abs(acc)) > limit:
            raise NonFiniteIterate(
                f"iterate {k + s} exceeded {limit:g} or became non-finite", step=k + s
            )
        pts[k + s] = acc
        gs.append(-np.asarray(grad(acc), dtype=float))
    return Trajectory(pts, h=m.h, method_info=m.describe(), problem_info=info)
