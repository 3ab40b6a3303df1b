"""Real-coefficient polynomials and the root bookkeeping behind recurrence stability.

Coefficients are stored ascending: coeffs[i] multiplies z**i.  Root finding
uses closed forms through degree two and companion-matrix eigenvalues above
that, followed by a Newton polish and a clustering pass that merges nearby
roots into a single root with a multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroPolynomial

# Relative tolerance used to decide that two numerical roots are the same
# root, and that a root modulus sits on the unit circle.
DEFAULT_ROOT_TOL = 1e-7


class Polynomial:
    """Univariate polynomial with real coefficients.

    Parameters
    ----------
    coeffs : array_like
        Ascending coefficients; coeffs[i] is the coefficient of z**i.
        Trailing exact zeros are trimmed so the leading coefficient is
        nonzero.  The zero polynomial is kept as the single coefficient 0.0.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).ravel()
        if c.size == 0:
            c = np.zeros(1)
        end = c.size
        while end > 1 and c[end - 1] == 0.0:
            end -= 1
        self.coeffs = np.array(c[:end], dtype=float)

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        if self.is_zero:
            return -1
        return self.coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    @property
    def is_monic(self) -> bool:
        return not self.is_zero and self.coeffs[-1] == 1.0

    def __call__(self, z):
        """Evaluate by Horner's rule.  Accepts scalars or arrays, real or complex."""
        z = np.asarray(z)
        acc = np.zeros_like(z, dtype=np.result_type(z, float)) + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        if acc.ndim == 0:
            return acc[()]
        return acc

    def derivative(self) -> "Polynomial":
        if self.coeffs.size == 1:
            return Polynomial([0.0])
        k = np.arange(1, self.coeffs.size)
        return Polynomial(self.coeffs[1:] * k)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        n = max(a.size, b.size)
        out = np.zeros(n)
        out[: a.size] += a
        out[: b.size] += b
        return Polynomial(out)

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.coeffs * float(factor))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs.size == other.coeffs.size and bool(
            np.all(self.coeffs == other.coeffs)
        )

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()})"


@dataclass(frozen=True)
class RootSet:
    """Roots of a polynomial with multiplicities.

    roots : list of (root, multiplicity), multiplicities summing to the degree.
    tol : the relative clustering tolerance that produced them.
    """

    roots: tuple
    tol: float

    def max_modulus(self) -> float:
        return max(abs(r) for r, _ in self.roots)

    def max_multiplicity_at(self, modulus: float, band: float = 1e-9) -> int:
        """Largest multiplicity among roots whose modulus is within band of `modulus`."""
        width = band * max(1.0, modulus)
        hits = [m for r, m in self.roots if abs(abs(r) - modulus) <= width]
        return max(hits) if hits else 0


@dataclass(frozen=True)
class RootConditionReport:
    """Outcome of the root condition check: moduli <= 1, circle roots simple."""

    ok: bool
    root_set: RootSet
    offending: tuple = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.ok


def _quadratic_roots(c0: float, c1: float, c2: float):
    """Stable closed-form roots of c2 z^2 + c1 z + c0, with a snap to a
    double root when the discriminant is zero up to rounding."""
    b, a = c1, c2
    disc = b * b - 4.0 * a * c0
    # Error in the computed discriminant is of order eps * (b^2 + 4|a c0|);
    # inside that band the true discriminant may be exactly zero, and the
    # sqrt would otherwise split a double root by ~sqrt(eps).
    snap = 32.0 * np.finfo(float).eps * (b * b + 4.0 * abs(a * c0))
    if abs(disc) <= snap:
        r = -b / (2.0 * a)
        return [complex(r), complex(r)]
    if disc > 0.0:
        sq = np.sqrt(disc)
        # avoid cancellation: add sq to the same-signed b
        q = -0.5 * (b + sq) if b >= 0.0 else -0.5 * (b - sq)
        r1 = q / a
        r2 = c0 / q
        return [complex(r1), complex(r2)]
    sq = np.sqrt(-disc)
    re = -b / (2.0 * a)
    im = sq / (2.0 * a)
    return [complex(re, im), complex(re, -im)]


def _polish(p: Polynomial, r: complex) -> complex:
    """A few Newton steps; keep the improvement only while the residual shrinks."""
    dp = p.derivative()
    best = r
    best_res = abs(p(best))
    cur = r
    for _ in range(8):
        d = dp(cur)
        if d == 0:
            break
        step = p(cur) / d
        cur = cur - step
        res = abs(p(cur))
        if res < best_res:
            best, best_res = cur, res
        if abs(step) <= 1e-16 * max(1.0, abs(cur)):
            break
    return best


def _cluster(raw, tol: float):
    """Greedy transitive clustering: roots within tol*(1+|r|) of a cluster
    member join that cluster.  Each cluster becomes (centroid, size)."""
    order = sorted(range(len(raw)), key=lambda i: (raw[i].real, raw[i].imag))
    clusters: list[list[complex]] = []
    for i in order:
        r = raw[i]
        placed = False
        for cl in clusters:
            if any(abs(r - s) <= tol * (1.0 + max(abs(r), abs(s))) for s in cl):
                cl.append(r)
                placed = True
                break
        if not placed:
            clusters.append([r])
    out = []
    for cl in clusters:
        centroid = sum(cl) / len(cl)
        if abs(centroid.imag) <= tol * (1.0 + abs(centroid)):
            centroid = complex(centroid.real, 0.0)
        out.append((centroid, len(cl)))
    out.sort(key=lambda t: (-abs(t[0]), t[0].real, t[0].imag))
    return tuple(out)


def roots(p: Polynomial, tol: float = DEFAULT_ROOT_TOL) -> RootSet:
    """All complex roots of p with multiplicities.

    Degree <= 2 uses closed forms (with a double-root snap for near-zero
    discriminants); higher degrees use companion-matrix eigenvalues plus a
    Newton polish.  Raises ZeroPolynomial for the zero polynomial and
    ValueError for (nonzero) constants.
    """
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no well-defined roots")
    if p.degree < 1:
        raise ValueError("root finding needs degree >= 1")
    c = p.coeffs
    if p.degree == 1:
        raw = [complex(-c[0] / c[1])]
    elif p.degree == 2:
        raw = _quadratic_roots(c[0], c[1], c[2])
    else:
        raw = [complex(r) for r in np.roots(c[::-1])]
        raw = [_polish(p, r) for r in raw]
    return RootSet(roots=_cluster(raw, tol), tol=tol)


def root_condition(p: Polynomial, tol: float = DEFAULT_ROOT_TOL) -> RootConditionReport:
    """Check that every root has modulus <= 1 and roots on the unit circle
    are simple, both up to tol.  Scaling p by a nonzero constant does not
    change the outcome."""
    rs = roots(p, tol)
    offending = []
    for r, m in rs.roots:
        mod = abs(r)
        if mod > 1.0 + tol:
            offending.append((r, m, "modulus above one"))
        elif mod >= 1.0 - tol and m > 1:
            offending.append((r, m, "repeated root on the unit circle"))
    return RootConditionReport(ok=not offending, root_set=rs, offending=tuple(offending))
