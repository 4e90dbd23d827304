"""Statistics on correlation curves and matrices."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .correlation import CorrCurve, CorrMatrix, centered_curve_from_states, corr_curve
from .exceptions import (
    DegenerateError,
    LagRangeError,
    LogDomainError,
    NonMonotonePeakError,
    ParameterError,
    TrajectoryError,
)
from .trajectory import Trajectory, annealed_mean

DETECTION_THRESHOLD = 4.0


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, np.generic):
            v = v.item()
        elif isinstance(v, list):
            v = [list(x) if isinstance(x, tuple) else x for x in v]
        out[k] = v
    return out


class _Report:
    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


# periodicity -----------------------------------------------------------------


@dataclass(frozen=True)
class ZScoreReport(_Report):
    period: int
    z: float
    mean_baseline: float
    sd_baseline: float
    value_at_period: float
    threshold: float = DETECTION_THRESHOLD

    @property
    def detected(self) -> bool:
        return self.z > self.threshold

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["detected"] = self.detected
        return d

    def summary(self) -> str:
        verdict = "DETECTED" if self.detected else "NOT-DETECTED"
        return f"z={self.z:.2f} T={self.period} verdict={verdict} threshold={self.threshold:g}"


def period_zscore(curve: CorrCurve, period: int, threshold: float = DETECTION_THRESHOLD) -> ZScoreReport:
    """Z-score of ``c~(T)`` against the in-between lags ``c~(1..T-1)``.

    The baseline standard deviation uses the population convention
    (``ddof=0``).
    """
    period = int(period)
    if period < 3:
        raise ParameterError(f"period must be >= 3 so the baseline has two points, got {period}")
    base = curve.centered_over(range(1, period))
    value = curve.centered_at(period)
    mean, sd = float(base.mean()), float(base.std())
    if not sd > 0:
        raise DegenerateError(f"degenerate baseline: c~(1..{period - 1}) has zero spread")
    return ZScoreReport(period, (value - mean) / sd, mean, sd, value, threshold)


# memory ----------------------------------------------------------------------


def plateau_detect(curve: CorrCurve, tol: float = 0.1, floor: float | None = None) -> int:
    """Last lag of the initial plateau of ``c~``.

    Returns the largest ``tau*`` such that every ``c~(1..tau*)`` lies within
    ``tol * |c~(1)|`` of ``c~(1)``. Returns 0 when ``c~(1)`` does not rise
    above ``floor * c~(0)`` (``floor`` defaults to ``tol``), i.e. when there
    is nothing above the noise to call a plateau.
    """
    if len(curve) < 3:
        raise LagRangeError("plateau detection needs at least three lags")
    floor = tol if floor is None else floor
    c0, c1 = curve.centered_at(0), curve.centered_at(1)
    if c1 <= floor * c0 or c1 <= 0:
        return 0
    tau = 1
    while curve.has(tau + 1) and abs(curve.centered_at(tau + 1) - c1) <= tol * abs(c1):
        tau += 1
    return tau


@dataclass(frozen=True)
class DecayFit(_Report):
    beta: float
    amplitude: float
    fit_window: tuple[int, int]
    r_squared: float
    plateau_end: int

    @property
    def reliable(self) -> bool:
        return self.r_squared >= 0.9

    def predict(self, lags) -> np.ndarray:
        return self.amplitude * np.exp(-self.beta * np.asarray(lags, dtype=float))


def default_decay_window(order: int) -> tuple[int, int]:
    """Fit window ``[p + 1, 3p]`` after a plateau ending at ``p`` (``p >= 1``)."""
    order = max(int(order), 1)
    return order + 1, max(3 * order, order + 2)


def decay_fit(
    curve: CorrCurve,
    window: tuple[int, int] | None = None,
    order: int | None = None,
    tol: float = 0.1,
) -> DecayFit:
    """Least-squares fit of ``log c~(tau) = log A - beta * tau`` over a lag window.

    Without an explicit window the plateau end ``p`` (``order`` if given,
    else :func:`plateau_detect`) selects ``[p + 1, 3p]``.
    """
    plateau = plateau_detect(curve, tol) if order is None else int(order)
    lo, hi = default_decay_window(plateau) if window is None else (int(window[0]), int(window[1]))
    if lo >= hi:
        raise LagRangeError(f"fit window [{lo}, {hi}] must satisfy lo < hi")
    lags = np.arange(lo, hi + 1)
    for tau in (lo, hi):
        if not curve.has(tau):
            raise LagRangeError(f"fit window [{lo}, {hi}] exceeds the curve's lag range")
    values = curve.centered_over(lags)
    bad = lags[values <= 0]
    if len(bad):
        raise LogDomainError(f"log-domain violation: c~ <= 0 at lags {bad.tolist()}")
    logs = np.log(values)
    slope, intercept = np.polyfit(lags, logs, 1)
    resid = logs - (intercept + slope * lags)
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(float(-slope), float(np.exp(intercept)), (lo, hi), r2, plateau)


def power_law_exponent(x, y) -> float:
    """Slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise LogDomainError("power-law fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# cross-correlation -------------------------------------------------------------


def offdiag_ratio(matrix: CorrMatrix | np.ndarray) -> float:
    """``sum_{i != j} |C_ij| / sum_i |C_ii|``."""
    values = matrix.values if isinstance(matrix, CorrMatrix) else np.asarray(matrix, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 2:
        raise ParameterError("need a square matrix with m >= 2")
    diag = float(np.abs(np.diag(values)).sum())
    if diag == 0:
        raise DegenerateError("degenerate diagonal: zero autocorrelation mass")
    return (float(np.abs(values).sum()) - diag) / diag


# lifetimes -------------------------------------------------------------------


NULL_MODELS = ("snapshot", "edge")


@dataclass(frozen=True)
class LifetimeReport(_Report):
    tau_clt: int | None
    tau_aclt: int | None
    lags: np.ndarray
    null_mean: np.ndarray
    null_sd: np.ndarray
    n_shuffles: int
    null_model: str
    decaying: bool

    def summary(self) -> str:
        fmt = lambda v: "undefined" if v is None else str(v)
        return (
            f"tau_clt={fmt(self.tau_clt)} tau_aclt={fmt(self.tau_aclt)} "
            f"shuffles={self.n_shuffles} null={self.null_model}"
        )


def _first_at_or_below(lags, values, reference) -> int | None:
    hit = np.flatnonzero(values <= reference)
    return None if len(hit) == 0 else int(lags[hit[0]])


def shuffle_null(
    traj: Trajectory,
    lags,
    n_shuffles: int,
    seed=None,
    null_model: str = "snapshot",
    n_jobs: int | None = 1,
) -> np.ndarray:
    """Centered curves of ``n_shuffles`` reshuffled copies, shape ``(n_shuffles, len(lags))``.

    ``"snapshot"`` permutes whole snapshots, keeping every snapshot (and so
    its activity and the annealed mean) intact. ``"edge"`` permutes each
    edge series independently in time.
    """
    if null_model not in NULL_MODELS:
        raise ParameterError(f"null model must be one of {NULL_MODELS}, got {null_model!r}")
    mu = annealed_mean(traj)
    states = traj.edge_series().states
    seeds = np.random.SeedSequence(seed).spawn(n_shuffles)

    def one(ss):
        rng = np.random.default_rng(ss)
        if null_model == "snapshot":
            shuffled = states[rng.permutation(len(states))]
        else:
            shuffled = rng.permuted(states, axis=0)
        return centered_curve_from_states(shuffled, traj, lags, mu)

    if n_jobs == 1:
        rows = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(one, seeds))
    return np.array(rows).reshape(n_shuffles, len(lags))


def lifetimes(
    traj: Trajectory,
    curve: CorrCurve | None = None,
    n_shuffles: int = 50,
    seed=None,
    tau_max: int | None = None,
    null_model: str = "snapshot",
    revival: float = 0.5,
    n_jobs: int | None = 1,
) -> LifetimeReport:
    """Correlation lifetime and activity-preserved correlation lifetime.

    ``tau_clt`` is the first lag ``>= 1`` with ``c~ <= 0``; ``tau_aclt`` the
    first lag with ``c~`` at or below the mean shuffled curve. Both are
    ``None`` (undefined) when there is no such lag, or when the curve is not
    decaying: after its first zero crossing it climbs back above
    ``revival * c~(0)``, as periodic curves do at their harmonics.
    """
    if traj.n_snapshots < 3:
        raise TrajectoryError(f"need N >= 3 snapshots to shuffle, got {traj.n_snapshots}")
    if n_shuffles < 1:
        raise ParameterError("n_shuffles must be >= 1")
    if curve is None:
        tau_max = min(traj.n_snapshots - 1, 100) if tau_max is None else tau_max
        curve = corr_curve(traj, tau_max, n_jobs=n_jobs)
    c0 = curve.centered_at(0) if curve.has(0) else corr_curve(traj, [0]).c_centered[0]
    keep = curve.lags >= 1
    lags = curve.lags[keep]
    if len(lags) == 0:
        raise LagRangeError("lifetimes need lags >= 1 in the curve")
    values = curve.c_centered[keep]

    null = shuffle_null(traj, lags, n_shuffles, seed, null_model, n_jobs)
    null_mean = null.mean(axis=0)
    null_sd = null.std(axis=0, ddof=1) if n_shuffles > 1 else np.zeros(len(lags))

    clt = _first_at_or_below(lags, values, 0.0)
    aclt = _first_at_or_below(lags, values, null_mean)
    first = min((v for v in (clt, aclt) if v is not None), default=None)
    decaying = True
    if first is not None:
        later = values[lags > first]
        decaying = not (len(later) and later.max() > revival * c0)
    if not decaying:
        clt = aclt = None
    return LifetimeReport(clt, aclt, lags, null_mean, null_sd, n_shuffles, null_model, decaying)


# edge of chaos -----------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit(_Report):
    alpha: float
    periods: np.ndarray
    gaps: np.ndarray
    k_range: tuple[int, int]

    def summary(self) -> str:
        return f"alpha={self.alpha:.3f} k={self.k_range[0]}..{self.k_range[1]}"


def peak_scaling(curve: CorrCurve, k_range: tuple[int, int] = (1, 5)) -> ScalingFit:
    """Fit ``c~(0) - c~(T) ~ T^-alpha`` over the periods ``T = 2^k``."""
    k_min, k_max = int(k_range[0]), int(k_range[1])
    ks = np.arange(k_min, k_max + 1)
    if len(ks) < 3:
        raise ParameterError(f"need at least 3 peaks for a scaling fit, got k={k_min}..{k_max}")
    periods = 2**ks
    if not curve.has(int(periods[-1])):
        raise LagRangeError(f"curve does not reach lag 2^{k_max}={periods[-1]}")
    gaps = curve.centered_at(0) - curve.centered_over(periods)
    bad = ks[gaps <= 0]
    if len(bad):
        raise NonMonotonePeakError(f"non-monotone peak: c~(0) - c~(2^k) <= 0 for k={bad.tolist()}")
    alpha = -power_law_exponent(periods, gaps)
    return ScalingFit(alpha, periods, gaps, (k_min, k_max))


def local_maxima(curve: CorrCurve) -> np.ndarray:
    """Lags whose ``c~`` exceeds both neighbours (consecutive lags only)."""
    c, lags = curve.c_centered, curve.lags
    out = []
    for k in range(1, len(lags) - 1):
        if lags[k - 1] == lags[k] - 1 and lags[k + 1] == lags[k] + 1 and c[k] > c[k - 1] and c[k] > c[k + 1]:
            out.append(int(lags[k]))
    return np.array(out, dtype=np.int64)
