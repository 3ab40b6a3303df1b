"""Backend selection and numba/numpy kernel parity."""

import os
import subprocess
import sys

import numpy as np

from gradflow import kernels as kn


def random_spd(dim, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((dim, dim))
    return M @ M.T + np.eye(dim), rng.standard_normal(dim)


def test_backend_reports_a_known_value():
    assert kn.backend() in ("numba", "numpy")


def test_warm_up_idempotent():
    kn.warm_up()
    kn.warm_up()


def test_lmm_kernel_parity():
    A, b = random_spd(4, 0)
    rho = np.array([0.25, -1.25, 1.0])
    sigma = np.array([0.0, 0.75])
    rng = np.random.default_rng(1)
    starts = rng.standard_normal((2, 4))
    a1, i1 = kn.lmm_quadratic(rho, sigma, 0.1, A, b, starts, 50, 1e100)
    a2, i2 = kn.lmm_quadratic_numpy(rho, sigma, 0.1, A, b, starts, 50, 1e100)
    assert i1 == i2 == -1
    assert np.abs(a1 - a2).max() <= 1e-13
    assert a1.shape == (52, 4)


def test_rk4_kernel_parity():
    A, b = random_spd(5, 2)
    x0 = np.linspace(-1.0, 1.0, 5)
    r1 = kn.rk4_quadratic(A, b, x0, 0.05, 40)
    r2 = kn.rk4_quadratic_numpy(A, b, x0, 0.05, 40)
    assert np.abs(r1 - r2).max() <= 1e-13


def test_divergence_index_agrees_across_backends():
    # Euler at h*lambda = 3 doubles with a sign flip; 2^34 > 1e10
    rho = np.array([-1.0, 1.0])
    sigma = np.array([1.0])
    A = np.array([[3.0]])
    b = np.array([0.0])
    starts = np.array([[1.0]])
    _, bad = kn.lmm_quadratic(rho, sigma, 1.0, A, b, starts, 60, 1e10)
    _, bad2 = kn.lmm_quadratic_numpy(rho, sigma, 1.0, A, b, starts, 60, 1e10)
    assert bad == bad2 == 34


def _run_probe(env_value):
    env = dict(os.environ)
    env["GRADFLOW_BACKEND"] = env_value
    return subprocess.run(
        [sys.executable, "-c", "from gradflow import kernels; print(kernels.backend())"],
        capture_output=True,
        text=True,
        env=env,
    )


def test_env_flag_forces_numpy():
    out = _run_probe("numpy")
    assert out.returncode == 0
    assert out.stdout.strip() == "numpy"


def test_env_flag_rejects_unknown_value():
    out = _run_probe("cuda")
    assert out.returncode != 0
    assert "GRADFLOW_BACKEND" in out.stderr
