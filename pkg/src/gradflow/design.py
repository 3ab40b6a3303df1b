"""Optimal explicit methods for strongly convex gradient flow.

For curvatures in [mu, L] this module builds the step-optimized one-step
method and the two-parameter family of consistent, zero-stable explicit
two-step methods, reparameterized so that absolute stability on the whole
interval becomes a pair of root-modulus conditions.  Tightening those
conditions yields the two named methods:

* m1: normalized step h_hat = 1/L, rate 1 - sqrt(mu/L);
* m2: the balanced choice h_hat = (1+beta)^2/L, complex conjugate roots of
  constant modulus beta = (1-sqrt(mu/L))/(1+sqrt(mu/L)), rate beta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleHhat, InvalidInterval
from .multistep import MultistepMethod, euler
from .polynomials import Polynomial


def _check_interval(mu: float, L: float, strict: bool = False) -> None:
    ok = np.isfinite(mu) and np.isfinite(L) and 0.0 < mu <= L
    if ok and strict and mu == L:
        ok = False
    if not ok:
        rel = "<" if strict else "<="
        raise InvalidInterval(f"need 0 < mu {rel} L, got mu={mu}, L={L}")


def beta(mu: float, L: float) -> float:
    """Momentum constant (1-sqrt(mu/L))/(1+sqrt(mu/L)), in [0, 1)."""
    _check_interval(mu, L)
    q = np.sqrt(mu / L)
    return (1.0 - q) / (1.0 + q)


def euler_optimal(mu: float, L: float) -> tuple[MultistepMethod, float]:
    """One-step method with the minimax step h = 2/(L+mu).

    Returns (method, rate) where rate = (L-mu)/(L+mu) is the optimal value
    of min_h max_{lambda in [mu,L]} |1 - lambda h|.
    """
    _check_interval(mu, L)
    h = 2.0 / (L + mu)
    return euler(h), (L - mu) / (L + mu)


def feasible_window(mu: float, L: float) -> tuple[float, float]:
    """Open interval of admissible normalized steps h_hat.

    The optimal endpoint roots keep |rho0| < 1 exactly when
    h_hat < (sqrt(mu) + sqrt(L))^2 / (mu L); at either end of the window
    the inversion degenerates (rho0 hits +1 or -1).
    """
    _check_interval(mu, L)
    return 0.0, (np.sqrt(mu) + np.sqrt(L)) ** 2 / (mu * L)


def optimal_roots(h_hat: float, mu: float, L: float) -> tuple[float, float]:
    """Squared root moduli at the interval endpoints that minimize the rate
    for a given normalized step:

        c_mu = (1 - sqrt(mu*h_hat))^2,   c_L = (1 - sqrt(L*h_hat))^2.

    h_hat must lie strictly inside the feasible window; the endpoints raise
    InfeasibleHhat.
    """
    lo, hi = feasible_window(mu, L)
    if not (lo < h_hat < hi):
        raise InfeasibleHhat(
            f"h_hat={h_hat} outside the open window ]{lo}, {hi}[ for mu={mu}, L={L}"
        )
    c_mu = (1.0 - np.sqrt(mu * h_hat)) ** 2
    c_L = (1.0 - np.sqrt(L * h_hat)) ** 2
    return float(c_mu), float(c_L)


@dataclass(frozen=True)
class TwoStepDesign:
    """A consistent, zero-stable explicit two-step method in both coordinate
    systems: raw coefficients (rho0, rho1, sigma0, sigma1, h) and the
    normalized triple (h_hat, c_mu, c_L).

    The raw side always satisfies rho1 = -(1+rho0) and sigma1 = 1-rho0-sigma0
    with |rho0| < 1; the normalized side satisfies h_hat = h(1-rho0),
    c_mu = rho0 + mu*h*sigma0 and c_L = rho0 + L*h*sigma0.
    """

    h_hat: float
    c_mu: float
    c_L: float
    rho0: float
    rho1: float
    sigma0: float
    sigma1: float
    h: float
    mu: float
    L: float

    def method(self, name: str = "") -> MultistepMethod:
        return MultistepMethod(
            Polynomial([self.rho0, self.rho1, 1.0]),
            Polynomial([self.sigma0, self.sigma1]),
            self.h,
            name,
        )

    def normalized_triple(self) -> tuple[float, float, float]:
        """Recompute (h_hat, c_mu, c_L) from the raw coefficients."""
        return (
            self.h * (1.0 - self.rho0),
            self.rho0 + self.mu * self.h * self.sigma0,
            self.rho0 + self.L * self.h * self.sigma0,
        )


def from_change_of_variables(
    h_hat: float, c_mu: float, c_L: float, mu: float, L: float
) -> TwoStepDesign:
    """Invert the normalized coordinates back to raw two-step coefficients.

    h_hat must sit inside the feasible window and |rho0| < 1 must come out
    of the inversion, otherwise the triple was not admissible.  At mu = L
    the two endpoint conditions coincide, so c_mu must equal c_L and the
    free gradient weight collapses to sigma0 = 0.
    """
    _check_interval(mu, L)
    lo, hi = feasible_window(mu, L)
    if not (lo < h_hat < hi):
        raise InfeasibleHhat(f"h_hat={h_hat} outside ]{lo}, {hi}[")
    if mu == L:
        if abs(c_L - c_mu) > 1e-12 * max(1.0, abs(c_mu)):
            raise InfeasibleHhat("mu = L forces c_mu = c_L")
        h_sigma0 = 0.0
        rho0 = c_mu
    else:
        # solve c_mu = rho0 + mu*h*sigma0, c_L = rho0 + L*h*sigma0
        h_sigma0 = (c_L - c_mu) / (L - mu)
        rho0 = (L * c_mu - mu * c_L) / (L - mu)
    if not abs(rho0) < 1.0:
        raise InfeasibleHhat(f"triple implies |rho0|={abs(rho0)} >= 1")
    h = h_hat / (1.0 - rho0)
    sigma0 = h_sigma0 / h
    return TwoStepDesign(
        h_hat=float(h_hat),
        c_mu=float(c_mu),
        c_L=float(c_L),
        rho0=float(rho0),
        rho1=float(-(1.0 + rho0)),
        sigma0=float(sigma0),
        sigma1=float(1.0 - rho0 - sigma0),
        h=float(h),
        mu=float(mu),
        L=float(L),
    )


def design_from_coefficients(
    rho0: float, sigma0: float, h: float, mu: float, L: float
) -> TwoStepDesign:
    """Build the design directly from the free raw parameters."""
    _check_interval(mu, L)
    if not abs(rho0) < 1.0:
        raise InvalidInterval(f"|rho0| must be < 1, got {rho0}")
    return TwoStepDesign(
        h_hat=float(h * (1.0 - rho0)),
        c_mu=float(rho0 + mu * h * sigma0),
        c_L=float(rho0 + L * h * sigma0),
        rho0=float(rho0),
        rho1=float(-(1.0 + rho0)),
        sigma0=float(sigma0),
        sigma1=float(1.0 - rho0 - sigma0),
        h=float(h),
        mu=float(mu),
        L=float(L),
    )


def method_m1(mu: float, L: float) -> MultistepMethod:
    """Two-step method at normalized step h_hat = 1/L.

    rho = beta - (1+beta) z + z^2, sigma = -beta(1-beta) + (1-beta^2) z,
    h = 1/(L(1-beta)); worst-case rate 1 - sqrt(mu/L).  At mu = L this
    degenerates to a shifted one-step gradient step with h = 1/L.
    """
    _check_interval(mu, L)
    b = beta(mu, L)
    rho = Polynomial([b, -(1.0 + b), 1.0])
    sigma = Polynomial([-b * (1.0 - b), 1.0 - b * b])
    h = 1.0 / (L * (1.0 - b))
    return MultistepMethod(rho, sigma, h, "m1")


def method_m2(mu: float, L: float) -> MultistepMethod:
    """Two-step method at the balanced normalized step h_hat = (1+beta)^2/L.

    rho = beta^2 - (1+beta^2) z + z^2, sigma = (1-beta^2) z, h = 1/sqrt(mu L);
    every curvature in [mu, L] sees a complex-conjugate root pair of modulus
    exactly beta, so the worst-case rate is beta.
    """
    _check_interval(mu, L)
    b = beta(mu, L)
    rho = Polynomial([b * b, -(1.0 + b * b), 1.0])
    sigma = Polynomial([0.0, 1.0 - b * b])
    h = 1.0 / np.sqrt(mu * L)
    return MultistepMethod(rho, sigma, h, "m2")


def m1_rate(mu: float, L: float) -> float:
    _check_interval(mu, L)
    return 1.0 - np.sqrt(mu / L)


def m2_rate(mu: float, L: float) -> float:
    return beta(mu, L)


def complex_root_conditions(
    d: TwoStepDesign, mu: float, L: float
) -> tuple[bool, float | None]:
    """Check the endpoint discriminant inequalities

        (rho1 + lambda h sigma1)^2 <= 4 (rho0 + lambda h sigma0)

    at lambda = mu and lambda = L.  When both hold the characteristic roots
    are complex conjugate across the whole interval and the squared largest
    modulus is max(c_mu, c_L), which is returned; otherwise (False, None).
    """
    ok = True
    for lam in (mu, L):
        lhs = (d.rho1 + lam * d.h * d.sigma1) ** 2
        rhs = 4.0 * (d.rho0 + lam * d.h * d.sigma0)
        # tiny slack: the named balanced designs sit exactly on equality
        if lhs > rhs + 64.0 * np.finfo(float).eps * max(1.0, abs(lhs), abs(rhs)):
            ok = False
    if not ok:
        return False, None
    return True, max(d.c_mu, d.c_L)


def design_m1(mu: float, L: float) -> TwoStepDesign:
    """M1 as a TwoStepDesign (for the change-of-variables identities)."""
    _check_interval(mu, L)
    b = beta(mu, L)
    h = 1.0 / (L * (1.0 - b))
    return design_from_coefficients(b, -b * (1.0 - b), h, mu, L)


def design_m2(mu: float, L: float) -> TwoStepDesign:
    """M2 as a TwoStepDesign."""
    _check_interval(mu, L)
    b = beta(mu, L)
    h = 1.0 / np.sqrt(mu * L)
    return design_from_coefficients(b * b, 0.0, h, mu, L)
