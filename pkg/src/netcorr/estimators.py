"""scikit-learn style wrappers.

``TrajectoryCorrelation`` is a transformer: ``fit`` learns the annealed
mean of a trajectory and ``transform`` returns the correlation functions of
any trajectory on the same nodes, centered with that mean. The other
estimators fit a single correlation curve.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import analysis
from .correlation import CorrCurve, centered_corr_matrix, corr_curve
from .exceptions import DimensionMismatchError
from .trajectory import annealed_mean
from .validation import check_curve, check_n_jobs, check_trajectory


class TrajectoryCorrelation(TransformerMixin, BaseEstimator):
    """Correlation functions ``c(tau)``, ``c~(tau)`` for ``tau = 0..tau_max``.

    Parameters
    ----------
    tau_max : int
        Largest lag.
    kernel : {"auto", "dense", "sparse"}
    n_jobs : int or None
        Threads for the lag sweep; ``None`` uses every core.

    Attributes
    ----------
    annealed_mean_ : AnnealedMatrix
    n_nodes_ : int
    n_snapshots_ : int
    lags_ : ndarray
    """

    def __init__(self, tau_max=20, kernel="auto", n_jobs=1):
        self.tau_max = tau_max
        self.kernel = kernel
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        traj = check_trajectory(X)
        self.annealed_mean_ = annealed_mean(traj)
        self.n_nodes_ = traj.m
        self.n_snapshots_ = traj.n_snapshots
        self.lags_ = np.arange(self.tau_max + 1)
        return self

    def curve(self, X) -> CorrCurve:
        check_is_fitted(self, "annealed_mean_")
        traj = check_trajectory(X)
        if traj.m != self.n_nodes_:
            raise DimensionMismatchError(f"fitted on m={self.n_nodes_} nodes, got m={traj.m}")
        return corr_curve(
            traj, int(self.tau_max), mu=self.annealed_mean_, kernel=self.kernel,
            n_jobs=check_n_jobs(self.n_jobs),
        )

    def transform(self, X):
        """Array of shape ``(tau_max + 1, 2)``: columns ``c`` and ``c~``."""
        c = self.curve(X)
        return np.column_stack([c.c_raw, c.c_centered])

    def matrix(self, X, tau):
        """Centered matrix ``C~(tau)`` of ``X`` using the fitted mean."""
        check_is_fitted(self, "annealed_mean_")
        return centered_corr_matrix(check_trajectory(X), tau, mu=self.annealed_mean_, kernel=self.kernel)


class PeriodicityDetector(BaseEstimator):
    """Flags a period ``T`` when the z-score of ``c~(T)`` exceeds ``threshold``."""

    def __init__(self, period=30, threshold=analysis.DETECTION_THRESHOLD):
        self.period = period
        self.threshold = threshold

    def fit(self, curve, y=None):
        self.report_ = analysis.period_zscore(check_curve(curve), self.period, self.threshold)
        self.z_score_ = self.report_.z
        return self

    def predict(self, curves):
        """Detection verdict for each curve in ``curves``."""
        return np.array([
            analysis.period_zscore(check_curve(c), self.period, self.threshold).detected for c in curves
        ])


class ExponentialDecay(RegressorMixin, BaseEstimator):
    """``c~(tau) ~ A exp(-beta tau)`` fitted past the plateau.

    ``fit`` takes a curve; ``predict`` maps lags to fitted values.
    """

    def __init__(self, window=None, order=None, tol=0.1):
        self.window = window
        self.order = order
        self.tol = tol

    def fit(self, curve, y=None):
        fit = analysis.decay_fit(check_curve(curve), self.window, self.order, self.tol)
        self.fit_ = fit
        self.beta_ = fit.beta
        self.amplitude_ = fit.amplitude
        self.window_ = fit.fit_window
        self.r_squared_ = fit.r_squared
        self.plateau_end_ = fit.plateau_end
        return self

    def predict(self, lags):
        check_is_fitted(self, "beta_")
        return self.fit_.predict(np.ravel(lags))


class PeakScaling(BaseEstimator):
    """Exponent ``alpha`` of ``c~(0) - c~(2^k) ~ (2^k)^-alpha``."""

    def __init__(self, k_min=1, k_max=5):
        self.k_min = k_min
        self.k_max = k_max

    def fit(self, curve, y=None):
        fit = analysis.peak_scaling(check_curve(curve), (self.k_min, self.k_max))
        self.fit_ = fit
        self.alpha_ = fit.alpha
        return self

    def predict(self, periods):
        """Fitted gap ``c~(0) - c~(T)`` at the given periods."""
        check_is_fitted(self, "alpha_")
        f = self.fit_
        log_c = np.mean(np.log(f.gaps) + f.alpha * np.log(f.periods))
        return np.exp(log_c) * np.asarray(periods, dtype=float) ** (-f.alpha)
