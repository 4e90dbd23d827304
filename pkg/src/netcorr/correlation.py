"""Lagged correlation matrices and scalar correlation functions.

For a trajectory ``A(1..N)`` and lag ``tau``::

    C(tau)  = 1/(N - tau) * sum_t A(t) A(t + tau)^T
    C~(tau) = 1/(N - tau) * sum_t (A(t) - mu) (A(t + tau) - mu)^T
    c(tau)  = tr C(tau),   c~(tau) = tr C~(tau)

with ``mu`` the annealed (time-averaged) adjacency matrix.

Two kernels are available. ``"sparse"`` works on the edge series of the
entries that are ever active and never materialises ``m x m`` matrices
for the scalars; its raw sums are exact integer counts. ``"dense"`` stacks
the adjacency matrices and uses matrix products; it is only chosen
automatically for small inputs.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .exceptions import DimensionMismatchError, LagRangeError, ParameterError
from .trajectory import AnnealedMatrix, Trajectory, annealed_mean

DENSE_THRESHOLD = 2048
# upper bound on N * m * m for the automatic choice of the dense kernel
DENSE_BUDGET = 20_000_000

KERNELS = ("auto", "dense", "sparse")


@dataclass(frozen=True)
class LagRange:
    tau_min: int = 0
    tau_max: int = 0
    step: int = 1

    def __post_init__(self):
        if self.tau_min < 0:
            raise LagRangeError(f"tau_min must be >= 0, got {self.tau_min}")
        if self.step < 1:
            raise LagRangeError(f"step must be >= 1, got {self.step}")
        if self.tau_min > self.tau_max:
            raise LagRangeError(f"empty lag range [{self.tau_min}, {self.tau_max}]")

    def lags(self) -> np.ndarray:
        return np.arange(self.tau_min, self.tau_max + 1, self.step)

    def check(self, n_snapshots: int) -> None:
        if self.tau_max >= n_snapshots:
            raise LagRangeError(f"tau_max={self.tau_max} must be < N={n_snapshots}")


@dataclass(frozen=True)
class CorrMatrix:
    values: np.ndarray
    lag: int
    centered: bool

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.values))


@dataclass(frozen=True)
class CorrCurve:
    """Raw and centered correlation functions over a set of lags."""

    lags: np.ndarray
    c_raw: np.ndarray
    c_centered: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        if lags.ndim != 1 or len(lags) == 0:
            raise LagRangeError("a curve needs at least one lag")
        if len(self.c_raw) != len(lags) or len(self.c_centered) != len(lags):
            raise DimensionMismatchError("curve columns must have the same length as lags")
        if np.any(np.diff(lags) <= 0):
            raise LagRangeError("curve lags must be strictly increasing")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "c_raw", np.asarray(self.c_raw, dtype=np.float64))
        object.__setattr__(self, "c_centered", np.asarray(self.c_centered, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.lags)

    def _pos(self, tau: int) -> int:
        pos = np.searchsorted(self.lags, tau)
        if pos >= len(self.lags) or self.lags[pos] != tau:
            raise LagRangeError(f"lag {tau} is not in the curve")
        return int(pos)

    def has(self, tau: int) -> bool:
        pos = np.searchsorted(self.lags, tau)
        return bool(pos < len(self.lags) and self.lags[pos] == tau)

    def centered_at(self, tau: int) -> float:
        return float(self.c_centered[self._pos(tau)])

    def raw_at(self, tau: int) -> float:
        return float(self.c_raw[self._pos(tau)])

    def centered_over(self, lags) -> np.ndarray:
        return np.array([self.centered_at(int(t)) for t in lags])

    def as_array(self) -> np.ndarray:
        """``(n_lags, 3)`` array with columns tau, c_raw, c_centered."""
        return np.column_stack([self.lags, self.c_raw, self.c_centered])


def _check_lag(traj: Trajectory, tau: int) -> int:
    tau = int(tau)
    if tau < 0 or tau >= traj.n_snapshots:
        raise LagRangeError(f"lag {tau} out of range for N={traj.n_snapshots} (need 0 <= tau < N)")
    return tau


def _check_mu(traj: Trajectory, mu: AnnealedMatrix | None) -> AnnealedMatrix:
    if mu is None:
        return annealed_mean(traj)
    if isinstance(mu, np.ndarray):
        mu = AnnealedMatrix.from_array(mu)
    if mu.m != traj.m:
        raise DimensionMismatchError(f"mean matrix has m={mu.m}, trajectory has m={traj.m}")
    return mu


def _resolve_kernel(traj: Trajectory, kernel: str) -> str:
    if kernel not in KERNELS:
        raise ParameterError(f"kernel must be one of {KERNELS}, got {kernel!r}")
    if kernel != "auto":
        return kernel
    m, n = traj.m, traj.n_snapshots
    return "dense" if m <= DENSE_THRESHOLD and n * m * m <= DENSE_BUDGET else "sparse"


# sparse kernel -------------------------------------------------------------


class _SeriesKernel:
    """Scalar correlation functions from the edge series of a trajectory."""

    def __init__(self, traj: Trajectory, mu: AnnealedMatrix, states: np.ndarray | None = None):
        series = traj.edge_series()
        self.n = traj.n_snapshots
        self.states = series.states if states is None else states
        self.weight = series.multiplicity
        keys = series.keys.astype(np.int64)
        # a mirrored column contributes mu_ij + mu_ji to the cross term
        mu_cols = mu.lookup(keys)
        if traj.symmetric:
            i, j = np.divmod(keys, traj.m)
            mu_cols = mu_cols + mu.lookup(j * traj.m + i)
        self.mu_cols = mu_cols
        self.mu_sq = mu.frobenius_sq()
        self.totals = self.states.sum(axis=0, dtype=np.int64)

    def raw_count(self, tau: int) -> int:
        x = self.states
        return int(np.count_nonzero(x[: self.n - tau] & x[tau:]))

    def raw(self, tau: int) -> float:
        return self.weight * self.raw_count(tau) / (self.n - tau)

    def both(self, tau: int) -> tuple[float, float]:
        n, x = self.n, self.states
        count = self.weight * self.raw_count(tau)
        head = self.totals - x[n - tau:].sum(axis=0, dtype=np.int64)
        tail = self.totals - x[:tau].sum(axis=0, dtype=np.int64)
        cross = float(np.dot(self.mu_cols, (head + tail).astype(np.float64)))
        raw = count / (n - tau)
        return raw, (count - cross) / (n - tau) + self.mu_sq


def _sparse_blocks(traj: Trajectory) -> sp.csc_matrix:
    """``B[i, t*m + k] = A_ik(t)`` as a sparse matrix."""
    m, n = traj.m, traj.n_snapshots
    codes = traj.codes.astype(np.int64)
    rows_t = np.repeat(np.arange(n, dtype=np.int64), traj.edge_counts())
    i, k = np.divmod(codes, m)
    if traj.symmetric:
        i, k, rows_t = np.concatenate([i, k]), np.concatenate([k, i]), np.concatenate([rows_t, rows_t])
    data = np.ones(len(i), dtype=np.float64)
    return sp.csc_matrix((data, (i, rows_t * m + k)), shape=(m, n * m))


def _window_sums(traj: Trajectory, tau: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``sum_{t < N-tau} A(t)`` and ``sum_{t >= tau} A(t)``."""
    series = traj.edge_series()
    m, n, x = traj.m, traj.n_snapshots, series.states
    keys = series.keys.astype(np.int64)
    head = x[: n - tau].sum(axis=0, dtype=np.int64).astype(np.float64)
    tail = x[tau:].sum(axis=0, dtype=np.int64).astype(np.float64)
    out = []
    for v in (head, tail):
        s = np.zeros(m * m)
        s[keys] = v
        if traj.symmetric:
            i, j = np.divmod(keys, m)
            s[j * m + i] = v
        out.append(s.reshape(m, m))
    return out[0], out[1]


def _sparse_matrix(traj: Trajectory, tau: int, mu: AnnealedMatrix | None) -> np.ndarray:
    m, n = traj.m, traj.n_snapshots
    b = _sparse_blocks(traj)
    prod = (b[:, : (n - tau) * m] @ b[:, tau * m:].T).toarray()
    if mu is None:
        return prod / (n - tau)
    head, tail = _window_sums(traj, tau)
    mu_a = mu.toarray()
    centered = prod - head @ mu_a.T - mu_a @ tail.T + (n - tau) * (mu_a @ mu_a.T)
    return centered / (n - tau)


# dense kernel --------------------------------------------------------------


def _dense_matrix(a: np.ndarray, tau: int) -> np.ndarray:
    n, m, _ = a.shape
    p = a[: n - tau].transpose(1, 0, 2).reshape(m, -1)
    q = a[tau:].transpose(1, 0, 2).reshape(m, -1)
    return (p @ q.T) / (n - tau)


def _dense_scalar(a: np.ndarray, tau: int) -> float:
    n = a.shape[0]
    return float(np.einsum("tij,tij->", a[: n - tau], a[tau:])) / (n - tau)


# public operations -----------------------------------------------------------


def corr_matrix(traj: Trajectory, tau: int, kernel: str = "auto") -> CorrMatrix:
    """Raw lagged correlation matrix ``C(tau)``."""
    tau = _check_lag(traj, tau)
    if _resolve_kernel(traj, kernel) == "dense":
        values = _dense_matrix(traj.to_dense(), tau)
    else:
        values = _sparse_matrix(traj, tau, None)
    return CorrMatrix(values, tau, centered=False)


def centered_corr_matrix(
    traj: Trajectory, tau: int, mu: AnnealedMatrix | np.ndarray | None = None, kernel: str = "auto"
) -> CorrMatrix:
    """Centered lagged correlation matrix ``C~(tau)``.

    ``mu`` defaults to the trajectory's own annealed mean; a different one
    may be passed for null-model experiments.
    """
    tau = _check_lag(traj, tau)
    mu = _check_mu(traj, mu)
    if _resolve_kernel(traj, kernel) == "dense":
        values = _dense_matrix(traj.to_dense() - mu.toarray(), tau)
    else:
        values = _sparse_matrix(traj, tau, mu)
    return CorrMatrix(values, tau, centered=True)


def corr_scalar(traj: Trajectory, tau: int, kernel: str = "auto") -> float:
    """``c(tau)``, the trace of ``C(tau)``."""
    tau = _check_lag(traj, tau)
    if _resolve_kernel(traj, kernel) == "dense":
        return _dense_scalar(traj.to_dense(), tau)
    return _SeriesKernel(traj, annealed_mean(traj)).raw(tau)


def centered_corr_scalar(
    traj: Trajectory, tau: int, mu: AnnealedMatrix | np.ndarray | None = None, kernel: str = "auto"
) -> float:
    """``c~(tau)``, the trace of ``C~(tau)``."""
    tau = _check_lag(traj, tau)
    mu = _check_mu(traj, mu)
    if _resolve_kernel(traj, kernel) == "dense":
        return _dense_scalar(traj.to_dense() - mu.toarray(), tau)
    return _SeriesKernel(traj, mu).both(tau)[1]


def shortcut_gap(traj: Trajectory, tau: int) -> float:
    """Difference between ``c~(tau)`` and the shortcut ``c(tau) - <mu, mu>_F``.

    The shortcut ignores that the head and tail windows of the lag sum have
    their own averages; the gap vanishes when both windows average to
    ``mu``.
    """
    tau = _check_lag(traj, tau)
    mu = annealed_mean(traj)
    raw, centered = _SeriesKernel(traj, mu).both(tau)
    return centered - (raw - mu.frobenius_sq())


def _as_lags(traj: Trajectory, lags) -> np.ndarray:
    if lags is None:
        lags = LagRange(0, min(traj.n_snapshots - 1, 20))
    if isinstance(lags, LagRange):
        lags.check(traj.n_snapshots)
        return lags.lags()
    if isinstance(lags, (int, np.integer)):
        rng = LagRange(0, int(lags))
        rng.check(traj.n_snapshots)
        return rng.lags()
    lags = np.asarray(lags, dtype=np.int64)
    if lags.ndim != 1 or len(lags) == 0:
        raise LagRangeError("empty lag range")
    if np.any(np.diff(lags) <= 0):
        raise LagRangeError("lags must be strictly increasing")
    for tau in (lags[0], lags[-1]):
        _check_lag(traj, tau)
    return lags


def corr_curve(
    traj: Trajectory,
    lags: LagRange | int | None = None,
    mu: AnnealedMatrix | np.ndarray | None = None,
    kernel: str = "auto",
    n_jobs: int | None = 1,
    diagnostics: bool = False,
) -> CorrCurve:
    """Evaluate ``c`` and ``c~`` over a range of lags.

    ``lags`` is a :class:`LagRange`, a maximum lag (giving ``0..tau_max``)
    or an increasing sequence. Lags are independent, so with ``n_jobs > 1``
    they are spread over a thread pool; the result does not depend on it.
    With ``diagnostics`` the curve carries ``shortcut_gap``, the per-lag gap to
    the ``c - <mu, mu>_F`` shortcut.
    """
    lags = _as_lags(traj, lags)
    mu = _check_mu(traj, mu)
    if _resolve_kernel(traj, kernel) == "dense":
        a = traj.to_dense()
        ac = a - mu.toarray()

        def one(tau):
            return _dense_scalar(a, tau), _dense_scalar(ac, tau)
    else:
        sk = _SeriesKernel(traj, mu)
        one = sk.both

    lag_list = [int(t) for t in lags]
    if n_jobs is not None and n_jobs == 1 or len(lag_list) == 1:
        values = [one(t) for t in lag_list]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(one, lag_list))
    raw = np.array([v[0] for v in values])
    cen = np.array([v[1] for v in values])
    diag = {}
    if diagnostics:
        diag["shortcut_gap"] = cen - (raw - mu.frobenius_sq())
    return CorrCurve(lags, raw, cen, diag)


def centered_curve_from_states(
    states: np.ndarray, traj: Trajectory, lags, mu: AnnealedMatrix | None = None
) -> np.ndarray:
    """``c~`` over ``lags`` for a replacement edge-series matrix.

    ``states`` must have the same shape as ``traj.edge_series().states``;
    used by the shuffle null models, which reorder it.
    """
    mu = _check_mu(traj, mu)
    sk = _SeriesKernel(traj, mu, states=states)
    return np.array([sk.both(int(t))[1] for t in lags])
