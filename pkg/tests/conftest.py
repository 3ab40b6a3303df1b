"""Shared fixtures and the acceptance-summary reporter."""

import numpy as np
import pytest

import gradflow as gf
from gradflow import kernels

# acceptance tests register one line each; printed at the end of the run
_ACCEPTANCE = {}


def record_criterion(number, name, passed, detail):
    _ACCEPTANCE[number] = (name, bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        name, ok, detail = _ACCEPTANCE[n]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {n} ({name}): {status}  [{detail}]")


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    # jit compilation happens here, not inside timed tests
    kernels.warm_up()


@pytest.fixture(scope="session")
def quad19():
    """mu=1, L=9 quadratic with both extreme eigenvalues in the spectrum."""
    return gf.random_spd_quadratic(6, 1.0, 9.0, seed=5)


@pytest.fixture(scope="session")
def x0_quad19(quad19):
    rng = np.random.default_rng(11)
    return quad19.minimizer + rng.standard_normal(quad19.dim)
