"""Textbook first-order methods and their recovery as multistep schemes."""

import numpy as np
import pytest

import gradflow as gf
from gradflow import integrators as ig
from gradflow import multistep as ms
from gradflow import optimizers as op
from gradflow.errors import InvalidInterval, NonPositiveValue, UnknownAlgorithm


def test_gradient_descent_scalar_closed_form():
    lam, h = 3.0, 0.2
    t = op.gradient_descent(gf.scalar_quadratic(lam), h, np.array([5.0]), 8)
    expect = 5.0 * (1.0 - h * lam) ** np.arange(9)
    np.testing.assert_allclose(t.points[:, 0], expect, atol=1e-13)


def test_heavy_ball_is_the_two_step_scheme(quad19, x0_quad19):
    """Momentum iteration against the recurrence it rearranges into."""
    m = gf.method_m2(1.0, 9.0)
    th = op.heavy_ball(quad19, 1.0, 9.0, x0_quad19, 30)
    starts = ig.bootstrap_starts(m, quad19, x0_quad19, "matched-algorithm")
    tr = ms.run(m, quad19, starts, 29)
    assert np.abs(th.points - tr.points).max() <= 1e-12


def test_nesterov_sc_is_the_two_step_scheme(quad19, x0_quad19):
    m = gf.method_m1(1.0, 9.0)
    tn = op.nesterov_sc(quad19, 1.0, 9.0, x0_quad19, 30)
    starts = ig.bootstrap_starts(m, quad19, x0_quad19, "matched-algorithm")
    tr = ms.run(m, quad19, starts, 29)
    assert np.abs(tn.points - tr.points).max() <= 1e-12


def test_nesterov_convex_growing_steps(quad19, x0_quad19):
    L = quad19.L
    n = 12
    t = op.nesterov_convex(quad19, L, x0_quad19, n)
    np.testing.assert_array_equal(
        t.h_list, [(k + 2) / (3.0 * L) for k in range(n)]
    )
    # accumulated time is quadratic in the iteration count
    k = np.arange(n + 1)
    np.testing.assert_allclose(t.times, (k * k + 3 * k) / (6.0 * L), atol=1e-12)
    # and the gap actually shrinks
    assert quad19.value(t.final()) < quad19.value(x0_quad19)


def test_proximal_gradient_one_step_by_hand():
    # forward step then soft threshold: x0=5, grad=2x -> 5-0.5*10=0,
    # next coordinate 3 -> 3-0.5*6=0; with weight 1, h=0.5 nothing survives
    c = gf.CompositeProblem(gf.scalar_quadratic(2.0), gf.L1Norm(1.0))
    t = op.proximal_gradient(c, 0.25, np.array([6.0]), 1)
    # forward: 6 - 0.25*12 = 3, threshold 0.25 -> 2.75
    np.testing.assert_allclose(t.points[1], [2.75])


def test_mirror_descent_entropy_stays_positive(quad19):
    x0 = np.full(quad19.dim, 1.0 / quad19.dim)
    t = op.mirror_descent(quad19, gf.entropy_geometry(), 0.05, x0, 25)
    assert np.all(t.points > 0.0)


def test_mirror_descent_is_negf_discretization(quad19):
    x0 = np.full(quad19.dim, 1.0 / quad19.dim)
    tm = op.mirror_descent(quad19, gf.entropy_geometry(), 0.05, x0, 12)
    tn = ig.run_negf_euler(quad19, gf.entropy_geometry(), 0.05, x0, 12)
    assert np.abs(tm.points - tn.points).max() <= 1e-14


def test_universal_gradient_collapses_to_gd(quad19, x0_quad19):
    c = gf.CompositeProblem(quad19, gf.ZeroOmega())
    tu = op.universal_gradient(c, gf.euclidean_geometry(), 0.1, x0_quad19, 12)
    tg = op.gradient_descent(quad19, 0.1, x0_quad19, 12)
    np.testing.assert_array_equal(tu.points, tg.points)


# -------------------------------------------------------------- identify_lmm


def test_identify_gd_is_explicit_euler():
    idm = op.identify_lmm("gradient_descent", h=0.2)
    np.testing.assert_array_equal(idm.method.rho.coeffs, [-1.0, 1.0])
    np.testing.assert_array_equal(idm.method.sigma.coeffs, [1.0])
    assert idm.method.h == 0.2
    assert idm.source == "gradient_descent"


def test_identify_heavy_ball_coefficients():
    idm = op.identify_lmm("heavy_ball", mu=1.0, L=9.0)
    np.testing.assert_allclose(idm.method.rho.coeffs, [0.25, -1.25, 1.0], atol=1e-14)
    np.testing.assert_allclose(idm.method.sigma.coeffs, [0.0, 0.75], atol=1e-14)
    assert idm.method.h == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_identify_nesterov_sc_coefficients():
    beta = (1.0 - np.sqrt(1.0 / 9.0)) / (1.0 + np.sqrt(1.0 / 9.0))
    idm = op.identify_lmm("nesterov_sc", mu=1.0, L=9.0)
    np.testing.assert_allclose(
        idm.method.rho.coeffs, [beta, -(1.0 + beta), 1.0], atol=1e-14
    )
    np.testing.assert_allclose(
        idm.method.sigma.coeffs, [-beta * (1.0 - beta), 1.0 - beta * beta],
        atol=1e-14,
    )
    assert idm.method.h == pytest.approx(1.0 / (9.0 * (1.0 - beta)), abs=1e-14)


def test_identified_methods_pass_consistency():
    for algo, kw in (
        ("gradient_descent", {"h": 0.1}),
        ("heavy_ball", {"mu": 0.5, "L": 7.0}),
        ("nesterov_sc", {"mu": 0.5, "L": 7.0}),
    ):
        idm = op.identify_lmm(algo, **kw)
        assert max(idm.residuals) < 1e-12
        assert ms.is_consistent(idm.method)
        assert ms.is_zero_stable(idm.method)


def test_identify_error_cases():
    with pytest.raises(UnknownAlgorithm):
        op.identify_lmm("adam", h=0.1)
    with pytest.raises(InvalidInterval):
        op.identify_lmm("heavy_ball", h=0.1)  # needs the interval
    with pytest.raises(NonPositiveValue):
        op.identify_lmm("gradient_descent")  # needs a step


def test_identifiable_listing():
    assert set(op.IDENTIFIABLE) == {
        "gradient_descent",
        "heavy_ball",
        "nesterov_sc",
    }


def test_smooth_optimizers_are_translation_equivariant(quad19, x0_quad19):
    # shifting b by A d moves the minimizer by d; every iterate follows
    delta = np.linspace(-1.0, 1.0, quad19.dim)
    shifted = gf.QuadraticProblem(quad19.A, quad19.b + quad19.A @ delta)
    runs = [
        lambda p, x0: op.gradient_descent(p, 0.15, x0, 25),
        lambda p, x0: op.heavy_ball(p, 1.0, 9.0, x0, 25),
        lambda p, x0: op.nesterov_sc(p, 1.0, 9.0, x0, 25),
        lambda p, x0: op.nesterov_convex(p, 9.0, x0, 25),
    ]
    for make in runs:
        base = make(quad19, x0_quad19).points
        moved = make(shifted, x0_quad19 + delta).points
        assert np.max(np.linalg.norm(moved - (base + delta), axis=1)) <= 1e-10
