"""Test problems as flow-defining oracles.

Everything a method run needs lives behind small oracle objects: smooth
problems expose value/gradient and curvature bounds, quadratics add the
closed-form flow exp(-At) and an explicit minimizer, composite problems
add a simple part with a proximal map, and mirror geometries carry the
distance-generating function and its dual map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DomainViolation,
    EigenFailure,
    InnerSolveFailure,
    MissingMinimizer,
    NoConvergence,
    NonPositiveValue,
)


class SmoothProblem:
    """Differentiable convex objective with known curvature interval.

    value/grad are callables; mu >= 0 and L bound the eigenvalues of the
    Hessian everywhere.  minimizer and hessian are optional; hessian (a
    callable x -> matrix) enables Newton-based implicit solves.
    """

    def __init__(
        self,
        dim: int,
        value,
        grad,
        mu: float,
        L: float,
        minimizer=None,
        hessian=None,
        tag: str = "",
        seed=None,
    ):
        self.dim = int(dim)
        self._value = value
        self._grad = grad
        self.mu = float(mu)
        self.L = float(L)
        self.minimizer = None if minimizer is None else np.asarray(minimizer, float)
        self.hessian = hessian
        self.tag = tag
        self.seed = seed

    def value(self, x) -> float:
        return float(self._value(np.asarray(x, float)))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self._grad(np.asarray(x, float)), float)

    @property
    def info(self) -> dict:
        return {"tag": self.tag, "seed": self.seed, "dim": self.dim}

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim} mu={self.mu:g} L={self.L:g} tag={self.tag!r}>"


class QuadraticProblem(SmoothProblem):
    """f(x) = 0.5 x'Ax - b'x with A symmetric positive semidefinite.

    mu and L are the extreme eigenvalues of A; the minimizer is the
    minimum-norm solution of Ax = b (b must lie in the range of A).
    """

    def __init__(self, A, b, tag: str = "", seed=None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise EigenFailure("A must be symmetric")
        self.A = A
        self.b = b
        w, V = np.linalg.eigh(A)
        self.eigenvalues = w
        self.eigenvectors = V
        wmax = float(w[-1])
        cutoff = 1e-12 * max(1.0, wmax)
        if w[0] < -cutoff:
            raise EigenFailure(f"A must be positive semidefinite, min eigenvalue {w[0]}")
        inv = np.where(w > cutoff, 1.0 / np.where(w > cutoff, w, 1.0), 0.0)
        xstar = V @ (inv * (V.T @ b))
        if np.linalg.norm(A @ xstar - b) > 1e-8 * max(1.0, np.linalg.norm(b)):
            raise MissingMinimizer("b is not in the range of A; f is unbounded below")
        mu = float(max(w[0], 0.0))
        super().__init__(
            dim=A.shape[0],
            value=lambda x: 0.5 * x @ (self.A @ x) - self.b @ x,
            grad=lambda x: self.A @ x - self.b,
            mu=mu,
            L=wmax,
            minimizer=xstar,
            hessian=lambda x: self.A,
            tag=tag,
            seed=seed,
        )

    def to_json(self) -> dict:
        return {
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "tag": self.tag,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d) -> "QuadraticProblem":
        if isinstance(d, str):
            d = json.loads(d)
        return cls(np.array(d["A"]), np.array(d["b"]), d.get("tag", ""), d.get("seed"))


def exact_flow(q: QuadraticProblem, x0, t: float) -> np.ndarray:
    """Closed-form gradient flow of a quadratic: x* + exp(-At)(x0 - x*)."""
    if not isinstance(q, QuadraticProblem):
        raise EigenFailure("exact_flow needs a QuadraticProblem")
    if t < 0:
        raise ValueError("t must be >= 0")
    x0 = np.asarray(x0, float)
    w, V = q.eigenvalues, q.eigenvectors
    xstar = q.minimizer
    c = V.T @ (x0 - xstar)
    return xstar + V @ (np.exp(-w * t) * c)


def reference_flow(p: SmoothProblem, x0, t: float, tol: float = 1e-10) -> np.ndarray:
    """High-accuracy surrogate for the flow endpoint on general smooth problems.

    Classical 4th-order one-step integration with the step count doubled
    until two successive refinements agree within tol.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    x0 = np.asarray(x0, float)
    if t == 0:
        return x0.copy()

    A = getattr(p, "A", None)
    if A is not None:
        def endpoint(n):
            return kernels.rk4_quadratic(p.A, p.b, x0, t / n, n)
    else:
        grad = p.grad

        def endpoint(n):
            x = x0.copy()
            h = t / n
            for _ in range(n):
                k1 = -grad(x)
                k2 = -grad(x + 0.5 * h * k1)
                k3 = -grad(x + 0.5 * h * k2)
                k4 = -grad(x + h * k3)
                x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            return x

    n = max(16, int(np.ceil(2.0 * t * p.L)))
    prev = endpoint(n)
    for _ in range(22):
        n *= 2
        cur = endpoint(n)
        if np.linalg.norm(cur - prev) <= tol:
            return cur
        prev = cur
    raise NoConvergence(f"step refinement did not reach tol={tol} by n={n}")


def convex_rate_bound(p: SmoothProblem, x0, t: float) -> float:
    """Objective-gap bound ||x0 - x*||^2 / (t + 2/L) along the flow of a
    convex (possibly mu = 0) smooth problem."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if p.minimizer is None:
        raise MissingMinimizer("bound needs a known minimizer")
    r2 = float(np.dot(np.asarray(x0, float) - p.minimizer, np.asarray(x0, float) - p.minimizer))
    return r2 / (t + 2.0 / p.L)


# ---------------------------------------------------------------------------
# simple parts (the proximable piece of a composite objective)


class ZeroOmega:
    """The identically-zero simple part; prox is the identity."""

    differentiable = True

    def value(self, x) -> float:
        return 0.0

    def grad(self, x):
        return np.zeros_like(np.asarray(x, float))

    def hessian_diag(self, x):
        return np.zeros_like(np.asarray(x, float))

    def prox(self, x, h):
        return np.asarray(x, float).copy()


class SquaredL2:
    """Omega(x) = (w/2) ||x||^2."""

    differentiable = True

    def __init__(self, weight: float = 1.0):
        self.weight = float(weight)

    def value(self, x) -> float:
        x = np.asarray(x, float)
        return 0.5 * self.weight * float(x @ x)

    def grad(self, x):
        return self.weight * np.asarray(x, float)

    def hessian_diag(self, x):
        return np.full(np.asarray(x).shape, self.weight)

    def prox(self, x, h):
        return np.asarray(x, float) / (1.0 + h * self.weight)


class L1Norm:
    """Omega(x) = w ||x||_1; prox is soft thresholding."""

    differentiable = False

    def __init__(self, weight: float = 1.0):
        self.weight = float(weight)

    def value(self, x) -> float:
        return self.weight * float(np.abs(np.asarray(x, float)).sum())

    def prox(self, x, h):
        x = np.asarray(x, float)
        thr = h * self.weight
        return np.sign(x) * np.maximum(np.abs(x) - thr, 0.0)


class BoxIndicator:
    """Indicator of the box [lo, hi]^d; prox is the projection (clip)."""

    differentiable = False

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        if not lo <= hi:
            raise ValueError("need lo <= hi")
        self.lo, self.hi = float(lo), float(hi)

    def value(self, x) -> float:
        x = np.asarray(x, float)
        inside = np.all(x >= self.lo - 1e-12) and np.all(x <= self.hi + 1e-12)
        return 0.0 if inside else float("inf")

    def prox(self, x, h):
        return np.clip(np.asarray(x, float), self.lo, self.hi)


class GenericOmega:
    """Differentiable simple part given by oracles; prox solved numerically.

    The proximal equation z - x + h grad(z) = 0 is solved by damped Newton
    when a hessian oracle (x -> matrix) is available, by fixed-point
    iteration otherwise, to absolute residual 1e-10.
    """

    differentiable = True

    def __init__(self, value, grad, hessian=None):
        self._value = value
        self._grad = grad
        self._hessian = hessian

    def value(self, x) -> float:
        return float(self._value(np.asarray(x, float)))

    def grad(self, x):
        return np.asarray(self._grad(np.asarray(x, float)), float)

    def prox(self, x, h):
        x = np.asarray(x, float)
        z = x.copy()
        if self._hessian is not None:
            for _ in range(100):
                F = z - x + h * self.grad(z)
                if np.linalg.norm(F) <= 1e-10:
                    return z
                J = np.eye(x.size) + h * np.asarray(self._hessian(z), float)
                step = np.linalg.solve(J, F)
                t = 1.0
                base = np.linalg.norm(F)
                # backtrack until the residual actually drops
                for _ in range(30):
                    cand = z - t * step
                    if np.linalg.norm(cand - x + h * self.grad(cand)) < base:
                        z = cand
                        break
                    t *= 0.5
                else:
                    raise InnerSolveFailure("proximal Newton stalled")
            raise InnerSolveFailure("proximal Newton exceeded 100 iterations")
        best = np.inf
        for _ in range(500):
            nz = x - h * self.grad(z)
            r = np.linalg.norm(nz - z)
            z = nz
            if r <= 1e-10:
                return z
            if r > 10.0 * best + 1.0:
                break
            best = min(best, r)
        raise InnerSolveFailure("proximal fixed point did not contract")


class CompositeProblem:
    """f(x) + Omega(x): smooth part plus a simple part with a prox oracle."""

    def __init__(self, smooth: SmoothProblem, omega, tag: str = ""):
        self.smooth = smooth
        self.omega = omega
        self.tag = tag or smooth.tag

    @property
    def dim(self) -> int:
        return self.smooth.dim

    def value(self, x) -> float:
        return self.smooth.value(x) + self.omega.value(x)

    @property
    def info(self) -> dict:
        d = dict(self.smooth.info)
        d["omega"] = type(self.omega).__name__
        return d


def prox(target, x, h: float):
    """Proximal map of a simple part (or of a composite's simple part)."""
    if not h > 0:
        raise NonPositiveValue(f"prox step must be positive, got {h}")
    omega = target.omega if isinstance(target, CompositeProblem) else target
    return np.asarray(omega.prox(np.asarray(x, float), float(h)), float)


# ---------------------------------------------------------------------------
# mirror geometries


@dataclass(frozen=True)
class MirrorGeometry:
    """Strongly convex distance-generating function d with its dual map.

    grad_d and grad_d_star must be inverse bijections on the domain;
    check_domain raises DomainViolation for points outside.  For separable
    geometries, d_star_jac_diag(y) gives the diagonal of the Jacobian of
    grad_d_star and unlocks Newton-based implicit projection solves.
    """

    name: str
    d: object
    grad_d: object
    grad_d_star: object
    check_domain: object = None
    d_star_jac_diag: object = None
    d_hess_diag: object = None

    def ensure_domain(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.check_domain is not None:
            self.check_domain(x)
        return x

    def bregman(self, x, y) -> float:
        x = self.ensure_domain(x)
        y = self.ensure_domain(y)
        return float(self.d(x) - self.d(y) - np.dot(self.grad_d(y), x - y))


def euclidean_geometry() -> MirrorGeometry:
    """d = 0.5||x||^2; both maps are the identity."""
    return MirrorGeometry(
        name="euclidean",
        d=lambda x: 0.5 * float(x @ x),
        grad_d=lambda x: np.asarray(x, float).copy(),
        grad_d_star=lambda y: np.asarray(y, float).copy(),
        check_domain=None,
        d_star_jac_diag=lambda y: np.ones_like(np.asarray(y, float)),
        d_hess_diag=lambda x: np.ones_like(np.asarray(x, float)),
    )


ENTROPY_FLOOR = 1e-300


def entropy_geometry() -> MirrorGeometry:
    """Negative entropy d = sum x_i log x_i on the strictly positive orthant.

    grad_d = 1 + log x, grad_d_star = exp(y - 1).  Coordinates at or below
    the floor raise DomainViolation.
    """

    def check(x):
        x = np.asarray(x, float)
        if np.any(~np.isfinite(x)) or np.any(x <= ENTROPY_FLOOR):
            bad = int(np.argmin(x))
            raise DomainViolation(
                f"coordinate {bad} = {x[bad]} outside the positive orthant"
            )

    return MirrorGeometry(
        name="entropy",
        d=lambda x: float(np.sum(x * np.log(x))),
        grad_d=lambda x: 1.0 + np.log(np.asarray(x, float)),
        grad_d_star=lambda y: np.exp(np.asarray(y, float) - 1.0),
        check_domain=check,
        d_star_jac_diag=lambda y: np.exp(np.asarray(y, float) - 1.0),
        d_hess_diag=lambda x: 1.0 / np.asarray(x, float),
    )


# ---------------------------------------------------------------------------
# problem zoo


def random_spd_quadratic(
    dim: int, mu: float, L: float, seed: int, minimizer_scale: float = 1.0
) -> QuadraticProblem:
    """Random quadratic with prescribed extreme curvatures.

    The spectrum always contains both mu and L exactly (interior eigenvalues
    log-uniform in between), so rate predictions over [mu, L] are sharp.
    """
    if not (0.0 < mu <= L):
        raise NonPositiveValue(f"need 0 < mu <= L, got {mu}, {L}")
    rng = np.random.default_rng(seed)
    if dim < 2 and mu != L:
        raise ValueError("dim >= 2 needed to place both extreme eigenvalues")
    eigs = np.empty(dim)
    eigs[0] = mu
    eigs[-1] = L
    if dim > 2:
        eigs[1:-1] = np.exp(rng.uniform(np.log(mu), np.log(L), dim - 2))
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    A = (Q * eigs) @ Q.T
    A = 0.5 * (A + A.T)
    xstar = minimizer_scale * rng.standard_normal(dim)
    b = A @ xstar
    return QuadraticProblem(A, b, tag=f"spd-{dim}d", seed=seed)


def singular_psd_quadratic(dim: int, L: float, seed: int) -> QuadraticProblem:
    """Convex-only quadratic: one zero eigenvalue, b in the range of A.

    The positive spectrum is log-spaced over seven decades below L, so the
    objective gap along a run decays at the sublinear envelope (no spectral
    gap takes over inside the usual fitting windows).
    """
    if dim < 2:
        raise ValueError("dim >= 2 needed for a singular direction")
    rng = np.random.default_rng(seed)
    eigs = np.empty(dim)
    eigs[0] = 0.0
    eigs[1:] = np.geomspace(L * 1e-7, L, dim - 1)
    eigs[-1] = L
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    A = (Q * eigs) @ Q.T
    A = 0.5 * (A + A.T)
    # minimizer built inside the range of A so b = A xstar is consistent
    xstar = Q[:, 1:] @ rng.standard_normal(dim - 1)
    b = A @ xstar
    return QuadraticProblem(A, b, tag=f"psd-singular-{dim}d", seed=seed)


def logistic_ridge(
    dim: int = 5, n_samples: int = 60, lam: float = 0.1, seed: int = 0
) -> SmoothProblem:
    """Logistic loss plus ridge: smooth, strongly convex, non-quadratic.

    mu = lam and L = sigma_max(X'X)/(4 n) + lam; the minimizer is computed
    once by Newton's method to gradient norm 1e-13.
    """
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, dim))
    truth = rng.standard_normal(dim)
    y = np.sign(X @ truth + 0.3 * rng.standard_normal(n_samples))
    y[y == 0] = 1.0

    def sig_neg(z):
        # 1/(1+exp(z)) without overflow on either tail
        out = np.empty_like(z)
        pos = z >= 0
        ep = np.exp(-z[pos])
        out[pos] = ep / (1.0 + ep)
        out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
        return out

    def value(w):
        z = y * (X @ w)
        # log(1+exp(-z)) computed stably for large |z|
        return float(np.mean(np.logaddexp(0.0, -z)) + 0.5 * lam * (w @ w))

    def grad(w):
        s = sig_neg(y * (X @ w))
        return -(X.T @ (y * s)) / n_samples + lam * w

    def hessian(w):
        s = sig_neg(y * (X @ w))
        D = s * (1.0 - s)
        return (X.T * D) @ X / n_samples + lam * np.eye(dim)

    L = float(np.linalg.eigvalsh(X.T @ X)[-1]) / (4.0 * n_samples) + lam
    w = np.zeros(dim)
    for _ in range(100):
        g = grad(w)
        if np.linalg.norm(g) <= 1e-13:
            break
        w = w - np.linalg.solve(hessian(w), g)
    else:
        raise NoConvergence("Newton did not locate the logistic minimizer")
    return SmoothProblem(
        dim=dim,
        value=value,
        grad=grad,
        mu=lam,
        L=L,
        minimizer=w,
        hessian=hessian,
        tag="logistic-ridge",
        seed=seed,
    )


def scalar_quadratic(lam: float = 1.0) -> QuadraticProblem:
    """One-dimensional f(x) = lam x^2 / 2, handy in unit tests."""
    return QuadraticProblem(np.array([[float(lam)]]), np.zeros(1), tag="scalar")
