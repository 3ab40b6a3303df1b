"""Two-step design: change of variables, optimal roots, named methods."""

import numpy as np
import pytest

import gradflow as gf
from gradflow.design import (
    complex_root_conditions,
    design_from_coefficients,
    design_m1,
    design_m2,
    from_change_of_variables,
)
from gradflow.errors import InfeasibleHhat, InvalidInterval


def test_beta_value():
    assert gf.beta(1.0, 9.0) == pytest.approx(0.5, abs=1e-15)
    assert gf.beta(1.0, 1.0) == 0.0


def test_interval_validation():
    for bad in ((0.0, 1.0), (-1.0, 2.0), (3.0, 1.0)):
        with pytest.raises(InvalidInterval):
            gf.beta(*bad)


def test_euler_optimal_step_and_rate():
    m, rate = gf.euler_optimal(1.0, 9.0)
    assert m.h == pytest.approx(0.2, abs=1e-15)
    assert rate == pytest.approx(0.8, abs=1e-15)
    np.testing.assert_allclose(m.rho.coeffs, [-1.0, 1.0])
    np.testing.assert_allclose(m.sigma.coeffs, [1.0])


def test_feasible_window():
    lo, hi = gf.feasible_window(1.0, 9.0)
    assert lo == 0.0
    # (sqrt(1) + sqrt(9))^2 / 9 = 16/9
    assert hi == pytest.approx(16.0 / 9.0, rel=1e-15)


def test_balancing_step_is_always_feasible():
    rng = np.random.default_rng(12)
    for _ in range(30):
        mu = float(np.exp(rng.uniform(-2, 2)))
        L = mu * float(np.exp(rng.uniform(0.05, 9)))
        b = gf.beta(mu, L)
        lo, hi = gf.feasible_window(mu, L)
        assert lo < (1.0 + b) ** 2 / L < hi


def test_optimal_roots_closed_form():
    c_mu, c_L = gf.optimal_roots(1.0 / 9.0, 1.0, 9.0)
    assert c_mu == pytest.approx(4.0 / 9.0, abs=1e-14)
    assert c_L == pytest.approx(0.0, abs=1e-14)


def test_optimal_roots_balance_at_special_step():
    b = gf.beta(1.0, 9.0)
    c_mu, c_L = gf.optimal_roots((1.0 + b) ** 2 / 9.0, 1.0, 9.0)
    assert abs(c_mu - c_L) <= 1e-12
    assert c_mu == pytest.approx(b * b, abs=1e-12)


def test_optimal_roots_window_is_open():
    with pytest.raises(InfeasibleHhat):
        gf.optimal_roots(0.0, 1.0, 9.0)
    with pytest.raises(InfeasibleHhat):
        gf.optimal_roots(16.0 / 9.0, 1.0, 9.0)
    with pytest.raises(InfeasibleHhat):
        gf.optimal_roots(2.0, 1.0, 9.0)


def test_method_m1_coefficients():
    m = gf.method_m1(1.0, 9.0)
    np.testing.assert_allclose(m.rho.coeffs, [0.5, -1.5, 1.0], atol=1e-14)
    np.testing.assert_allclose(m.sigma.coeffs, [-0.25, 0.75], atol=1e-14)
    assert m.h == pytest.approx(2.0 / 9.0, abs=1e-15)


def test_method_m2_coefficients():
    m = gf.method_m2(1.0, 9.0)
    np.testing.assert_allclose(m.rho.coeffs, [0.25, -1.25, 1.0], atol=1e-14)
    np.testing.assert_allclose(m.sigma.coeffs, [0.0, 0.75], atol=1e-14)
    assert m.h == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_named_rates():
    assert gf.m1_rate(1.0, 9.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert gf.m2_rate(1.0, 9.0) == pytest.approx(0.5, abs=1e-15)
    assert gf.m2_rate(2.0, 2.0) == 0.0


def test_degenerate_interval_reduces_to_single_step():
    # mu = L collapses both designs to a one-step recurrence in disguise
    m = gf.method_m2(2.0, 2.0)
    assert m.h == pytest.approx(0.5)
    np.testing.assert_allclose(m.rho.coeffs, [0.0, -1.0, 1.0], atol=1e-14)
    p = gf.scalar_quadratic(2.0)
    traj = gf.run(m, p, gf.bootstrap_starts(m, p, np.ones(1), "exact-flow"), 3)
    # h lambda = 1 reaches the minimizer immediately
    assert abs(traj.points[-1, 0]) < 1e-14


def test_design_m1_change_of_variables():
    d = design_m1(1.0, 9.0)
    assert d.rho0 == pytest.approx(0.5, abs=1e-14)
    assert d.sigma0 == pytest.approx(-0.25, abs=1e-14)
    assert d.h == pytest.approx(2.0 / 9.0, abs=1e-15)
    assert d.h_hat == pytest.approx(1.0 / 9.0, abs=1e-15)
    assert d.c_mu == pytest.approx(4.0 / 9.0, abs=1e-13)
    assert d.c_L == pytest.approx(0.0, abs=1e-13)


def test_design_m2_is_the_balanced_member():
    d = design_m2(1.0, 9.0)
    assert abs(d.c_mu - d.c_L) <= 1e-12
    assert d.sigma0 == pytest.approx(0.0, abs=1e-14)
    m = d.method("m2")
    ref = gf.method_m2(1.0, 9.0)
    np.testing.assert_allclose(m.rho.coeffs, ref.rho.coeffs, atol=1e-13)
    np.testing.assert_allclose(m.sigma.coeffs, ref.sigma.coeffs, atol=1e-13)
    assert m.h == pytest.approx(ref.h, rel=1e-13)


def test_change_of_variables_roundtrip():
    d = design_from_coefficients(0.25, 0.0, 1.0 / 3.0, 1.0, 9.0)
    back = from_change_of_variables(d.h_hat, d.c_mu, d.c_L, 1.0, 9.0)
    assert back.rho0 == pytest.approx(d.rho0, abs=1e-13)
    assert back.sigma0 == pytest.approx(d.sigma0, abs=1e-13)
    assert back.h == pytest.approx(d.h, rel=1e-13)


def test_change_of_variables_random_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(100):
        mu = float(np.exp(rng.uniform(-1, 1)))
        L = mu * float(np.exp(rng.uniform(0.2, 6)))
        lo, hi = gf.feasible_window(mu, L)
        h_hat = float(rng.uniform(0.1, 0.9)) * hi
        c_mu, c_L = gf.optimal_roots(h_hat, mu, L)
        d = from_change_of_variables(h_hat, c_mu, c_L, mu, L)
        assert d.c_mu == pytest.approx(d.rho0 + mu * d.h * d.sigma0, abs=1e-12)
        assert d.c_L == pytest.approx(d.rho0 + L * d.h * d.sigma0, abs=1e-12)
        assert d.h_hat == pytest.approx(d.h * (1.0 - d.rho0), rel=1e-11)


def test_equal_curvatures_need_equal_roots():
    d = from_change_of_variables(0.4, 0.2, 0.2, 2.0, 2.0)
    assert d.sigma0 == 0.0
    assert d.rho0 == pytest.approx(0.2)
    with pytest.raises(InfeasibleHhat):
        from_change_of_variables(0.4, 0.2, 0.5, 2.0, 2.0)


def test_complex_root_conditions_on_designed_methods():
    ok, cmax = complex_root_conditions(design_m2(1.0, 9.0), 1.0, 9.0)
    assert ok
    assert cmax == pytest.approx(0.25, abs=1e-12)
    ok, cmax = complex_root_conditions(design_m1(1.0, 9.0), 1.0, 9.0)
    assert ok
    assert cmax == pytest.approx(4.0 / 9.0, abs=1e-12)


def test_complex_root_conditions_reject_real_root_design():
    # rho0 = sigma0 = 0 is gradient descent written as two steps; its
    # characteristic roots are real and separated across the interval
    d = design_from_coefficients(0.0, 0.0, 1.0 / 9.0, 1.0, 9.0)
    ok, cmax = complex_root_conditions(d, 1.0, 9.0)
    assert not ok
    assert cmax is None


def test_normalized_triple_roundtrips():
    d = design_m1(1.0, 9.0)
    h_hat, c_mu, c_L = d.normalized_triple()
    assert h_hat == pytest.approx(d.h_hat, rel=1e-13)
    assert c_mu == pytest.approx(d.c_mu, abs=1e-13)
    assert c_L == pytest.approx(d.c_L, abs=1e-13)


def test_named_methods_meet_every_design_condition():
    rng = np.random.default_rng(9)
    for _ in range(15):
        mu = float(10 ** rng.uniform(-1, 0.5))
        L = mu * float(10 ** rng.uniform(0.2, 3))
        for m in (gf.method_m1(mu, L), gf.method_m2(mu, L)):
            assert m.rho.is_monic
            assert m.is_explicit
            r_rho, r_mix = gf.consistency_residuals(m)
            assert abs(r_rho) <= 1e-10 and abs(r_mix) <= 1e-10
            assert gf.is_zero_stable(m)
            pred = gf.rate_prediction(m, mu, L)
            assert pred.rate <= 1.0 + 1e-9


def test_rate_ordering_across_the_family():
    # two-step designs beat tuned one-step descent, and the balanced
    # design beats the momentum-normalized one, strictly once mu < L
    rng = np.random.default_rng(10)
    for _ in range(25):
        mu = float(np.exp(rng.uniform(-1, 1)))
        L = mu * float(np.exp(rng.uniform(0.1, 7)))
        _, r_euler = gf.euler_optimal(mu, L)
        r1 = gf.rate_prediction(gf.method_m1(mu, L), mu, L).rate
        r2 = gf.rate_prediction(gf.method_m2(mu, L), mu, L).rate
        assert r2 < r1 < r_euler
