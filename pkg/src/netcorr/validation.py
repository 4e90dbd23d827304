"""Input coercion shared by the estimator wrappers and the CLI."""
from __future__ import annotations

import os

import numpy as np

from .correlation import CorrCurve, CorrMatrix
from .exceptions import LagRangeError, ParameterError, TrajectoryError
from .trajectory import Snapshot, Trajectory, build_trajectory


def check_trajectory(X, symmetric: bool | None = None) -> Trajectory:
    """Accept a Trajectory, a list of Snapshots, an ``(N, m, m)`` array or a file path."""
    if isinstance(X, Trajectory):
        return X
    if isinstance(X, (str, os.PathLike)):
        from .formats import read_trajectory

        return read_trajectory(X)
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], Snapshot):
        return build_trajectory(X)
    arr = np.asarray(X)
    if arr.ndim == 3:
        return Trajectory.from_dense(arr, symmetric=symmetric)
    raise TrajectoryError(
        f"expected a Trajectory, a list of Snapshots or an (N, m, m) array, got {type(X).__name__}"
    )


def check_curve(curve) -> CorrCurve:
    """Accept a CorrCurve, an ``(n_lags, 3)`` array (tau, c_raw, c_centered) or a file path."""
    if isinstance(curve, CorrCurve):
        return curve
    if isinstance(curve, (str, os.PathLike)):
        from .formats import read_curve

        return read_curve(curve)
    arr = np.asarray(curve, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 3:
        lags = arr[:, 0]
        if not np.all(lags == np.round(lags)):
            raise LagRangeError("lag column must hold integers")
        return CorrCurve(lags.astype(np.int64), arr[:, 1], arr[:, 2])
    raise ParameterError(f"cannot interpret {type(curve).__name__} as a correlation curve")


def check_matrix(matrix) -> CorrMatrix:
    if isinstance(matrix, CorrMatrix):
        return matrix
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {arr.shape}")
    return CorrMatrix(arr, 0, True)


def check_n_jobs(n_jobs) -> int | None:
    """``None``/``0``/negative mean all cores (returned as ``None``)."""
    if n_jobs is None:
        return None
    n_jobs = int(n_jobs)
    return None if n_jobs <= 0 else n_jobs
