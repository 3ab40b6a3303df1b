"""Trajectory container and its CSV export."""

import csv

import numpy as np
import pytest

import gradflow as gf
from gradflow.trajectory import Trajectory


def fixed_step_traj():
    pts = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    return Trajectory(pts, h=0.5, method_info={"name": "demo"})


def test_times_fixed_step():
    t = fixed_step_traj()
    np.testing.assert_allclose(t.times, [0.0, 0.5, 1.0, 1.5])
    assert len(t) == 4
    assert t.dim == 2


def test_times_variable_step():
    pts = np.zeros((4, 1))
    t = Trajectory(pts, h_list=np.array([0.1, 0.2, 0.4]))
    np.testing.assert_allclose(t.times, [0.0, 0.1, 0.3, 0.7])


def test_h_list_length_must_match():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((4, 1)), h_list=np.array([0.1, 0.2]))


def test_needs_some_step_information():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 1)))


def test_final_and_errors_to():
    t = fixed_step_traj()
    np.testing.assert_array_equal(t.final(), [3.0, 6.0])
    errs = t.errors_to(np.array([3.0, 6.0]))
    np.testing.assert_allclose(errs, [np.hypot(3, 6), np.hypot(2, 4), np.hypot(1, 2), 0.0])


def test_csv_schema(tmp_path):
    """Columns k, t_k, h_k, coordinates, then the two gap columns."""
    p = gf.random_spd_quadratic(2, 1.0, 4.0, seed=0)
    t = Trajectory(
        np.array([[1.0, 1.0], [0.5, 0.25]]),
        h=0.1,
        method_info={"name": "demo"},
        problem_info=p.info,
    )
    out = tmp_path / "traj.csv"
    t.to_csv(out, problem=p)
    lines = out.read_text().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    assert any("method=" in ln for ln in comments)
    assert any("problem=" in ln for ln in comments)
    rows = list(csv.reader(ln for ln in lines if not ln.startswith("#")))
    assert rows[0] == ["k", "t_k", "h_k", "x_1", "x_2", "f_gap", "dist_to_opt"]
    assert rows[1][0] == "0" and float(rows[1][1]) == 0.0
    assert float(rows[1][2]) == 0.1
    # last row has no outgoing step
    assert rows[2][2] == ""
    # gap columns agree with the problem
    fstar = p.value(p.minimizer)
    assert float(rows[1][5]) == pytest.approx(p.value(np.array([1.0, 1.0])) - fstar)
    assert float(rows[1][6]) == pytest.approx(
        np.linalg.norm(np.array([1.0, 1.0]) - p.minimizer)
    )


def test_csv_gap_columns_blank_without_problem(tmp_path):
    t = fixed_step_traj()
    out = tmp_path / "t.csv"
    t.to_csv(out)
    rows = list(
        csv.reader(
            ln for ln in out.read_text().splitlines() if not ln.startswith("#")
        )
    )
    assert rows[1][5] == "" and rows[1][6] == ""


def test_csv_reproducible_is_byte_identical(tmp_path):
    t = fixed_step_traj()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    t.to_csv(a, reproducible=True)
    t.to_csv(b, reproducible=True)
    assert a.read_bytes() == b.read_bytes()
    assert "written" not in a.read_text()


def test_csv_default_records_a_timestamp(tmp_path):
    t = fixed_step_traj()
    out = tmp_path / "t.csv"
    t.to_csv(out)
    assert any(ln.startswith("# written") for ln in out.read_text().splitlines())
