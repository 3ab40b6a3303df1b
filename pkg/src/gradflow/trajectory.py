"""Discrete trajectory container shared by the integrator and optimizer runs."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """Iterates of a run, with enough metadata to reconstruct time stamps.

    points : (n_points, dim) array, first rows are the starting values.
    h : constant step size, or None when steps vary.
    h_list : per-step sizes when they vary (length n_points - 1), else None.
    method_info / problem_info : plain dicts describing where the run came from.
    """

    points: np.ndarray
    h: float | None = None
    h_list: np.ndarray | None = None
    method_info: dict = field(default_factory=dict)
    problem_info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.h is None and self.h_list is None:
            raise ValueError("need h or h_list")
        if self.h_list is not None:
            self.h_list = np.asarray(self.h_list, dtype=float)
            if self.h_list.size != len(self.points) - 1:
                raise ValueError("h_list must have one entry per transition")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def times(self) -> np.ndarray:
        """t_k for each stored point; t_0 = 0."""
        if self.h_list is not None:
            return np.concatenate([[0.0], np.cumsum(self.h_list)])
        return self.h * np.arange(len(self.points))

    def final(self) -> np.ndarray:
        return self.points[-1]

    def errors_to(self, target: np.ndarray) -> np.ndarray:
        """Euclidean distance of every iterate to a fixed target point."""
        return np.linalg.norm(self.points - np.asarray(target, dtype=float), axis=1)

    def to_csv(self, path, problem=None, reproducible: bool = False) -> None:
        """Write columns k, t_k, h_k, x_1..x_d, f_gap, dist_to_opt.

        h_k is the step taken from x_k (blank on the last row); f_gap and
        dist_to_opt are blank unless a problem with a known minimizer is
        given.  Header comments record the method and problem metadata; with
        reproducible=True the timestamp line is suppressed so reruns produce
        byte-identical files.
        """
        t = self.times
        steps = self.h_list if self.h_list is not None else np.full(len(self) - 1, self.h)
        fgap = dist = None
        if problem is not None:
            xstar = getattr(problem, "minimizer", None)
            if xstar is not None:
                xstar = np.asarray(xstar, dtype=float)
                fstar = problem.value(xstar)
                fgap = np.array([problem.value(x) - fstar for x in self.points])
                dist = np.linalg.norm(self.points - xstar, axis=1)
        with open(path, "w", newline="") as fh:
            if not reproducible:
                import datetime

                fh.write(f"# written {datetime.datetime.now().isoformat()}\n")
            if self.method_info:
                fh.write(f"# method={json.dumps(self.method_info, sort_keys=True)}\n")
            if self.problem_info:
                fh.write(f"# problem={json.dumps(self.problem_info, sort_keys=True)}\n")
            w = csv.writer(fh)
            header = ["k", "t_k", "h_k"] + [f"x_{i + 1}" for i in range(self.dim)]
            header += ["f_gap", "dist_to_opt"]
            w.writerow(header)
            for k in range(len(self.points)):
                hk = repr(float(steps[k])) if k < len(steps) else ""
                row = [k, repr(float(t[k])), hk]
                row += [repr(float(v)) for v in self.points[k]]
                if fgap is not None:
                    row += [repr(float(fgap[k])), repr(float(dist[k]))]
                else:
                    row += ["", ""]
                w.writerow(row)
