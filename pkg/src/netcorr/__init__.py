"""Correlation functions of network trajectories.

A temporal network is treated as a trajectory ``A(1..N)`` in graph space.
The package computes its lagged correlation matrices and scalar
correlation functions, generates benchmark graph dynamics, analyses the
resulting curves, and bins timestamped contact lists into trajectories.
"""
from .analysis import (
    DecayFit,
    LifetimeReport,
    ScalingFit,
    ZScoreReport,
    decay_fit,
    lifetimes,
    local_maxima,
    offdiag_ratio,
    peak_scaling,
    period_zscore,
    plateau_detect,
)
from .correlation import (
    CorrCurve,
    CorrMatrix,
    LagRange,
    centered_corr_matrix,
    centered_corr_scalar,
    corr_curve,
    corr_matrix,
    corr_scalar,
    shortcut_gap,
)
from .estimators import ExponentialDecay, PeakScaling, PeriodicityDetector, TrajectoryCorrelation
from .exceptions import NetcorrError
from .formats import export_curve, export_matrix, read_curve, read_matrix, read_trajectory, write_trajectory
from .generators import (
    R_INFINITY,
    DarnCrossParams,
    DarnParams,
    Dictionary,
    LogisticParams,
    PeriodicParams,
    WhiteParams,
    build_dictionary,
    gen_darn,
    gen_darn_cross,
    gen_logistic,
    gen_periodic,
    gen_white,
)
from .ingest import BinningSpec, ContactEvents, bin_to_trajectory, parse_contacts
from .trajectory import AnnealedMatrix, Snapshot, Trajectory, annealed_mean, build_trajectory

__version__ = "0.1.0"


def sample_contacts_path() -> str:
    """Path of the bundled miniature contact list (``t i j``, 20 s resolution)."""
    from importlib.resources import files

    return str(files(__name__) / "data" / "mini_contacts.tij")
