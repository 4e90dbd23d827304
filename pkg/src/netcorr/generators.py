"""Synthetic network trajectories with known correlation structure.

All generators draw from an explicit ``numpy.random.Generator`` seeded per
call, so identical parameters and seed give identical trajectories. The
per-edge dynamics run on unordered node pairs and are mirrored into
symmetric snapshots (the white model can optionally be directed).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import InfeasibleDictionaryError, ParameterError
from .trajectory import Snapshot, Trajectory, pair_codes

R_INFINITY = 3.5699456


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")


def _check_count(name, value, minimum=1):
    if int(value) != value or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value}")


def _n_pairs(m: int, symmetric: bool = True) -> int:
    return m * (m - 1) // 2 if symmetric else m * (m - 1)


def _finish(states, m, params, symmetric=True) -> Trajectory:
    meta = {"model": type(params).__name__, "params": params.record()}
    return Trajectory.from_pair_states(states, m, symmetric, metadata=meta)


class _Params:
    def record(self) -> dict:
        return {k: v for k, v in asdict(self).items()}


@dataclass(frozen=True)
class WhiteParams(_Params):
    m: int
    n: int
    p: float
    seed: int | None = None
    directed: bool = False

    def __post_init__(self):
        _check_count("m", self.m)
        _check_count("n", self.n)
        _check_prob("p", self.p)


@dataclass(frozen=True)
class PeriodicParams(_Params):
    m: int
    n: int
    period: int
    p: float
    q: float
    seed: int | None = None

    def __post_init__(self):
        _check_count("m", self.m)
        _check_count("n", self.n)
        _check_count("period", self.period)
        _check_prob("p", self.p)
        _check_prob("q", self.q)
        if self.period > self.n:
            raise ParameterError(f"period T={self.period} exceeds N={self.n}")


@dataclass(frozen=True)
class DarnParams(_Params):
    """DARN(p): copy one of the last ``order`` states w.p. ``q``, else draw Bernoulli(``y``)."""

    m: int
    n: int
    order: int
    q: float
    y: float
    seed: int | None = None
    burn_in: int | None = None

    def __post_init__(self):
        _check_count("m", self.m)
        _check_count("n", self.n)
        _check_count("order", self.order)
        _check_prob("q", self.q)
        _check_prob("y", self.y)
        if self.burn_in is not None:
            _check_count("burn_in", self.burn_in, 0)

    @property
    def effective_burn_in(self) -> int:
        return 10 * self.order if self.burn_in is None else self.burn_in


@dataclass(frozen=True)
class DarnCrossParams(_Params):
    """DARN(1) where a copy comes, w.p. ``w``, from the donor pair ``{i, (j + shift) mod m}``."""

    m: int
    n: int
    q: float
    y: float
    w: float
    shift: int = 2
    seed: int | None = None
    burn_in: int | None = None

    def __post_init__(self):
        _check_count("m", self.m, 2)
        _check_count("n", self.n)
        _check_prob("q", self.q)
        _check_prob("y", self.y)
        _check_prob("w", self.w)
        if self.shift % self.m == 0:
            raise ParameterError(f"shift={self.shift} is a multiple of m={self.m}: every donor is the edge itself")
        if self.burn_in is not None:
            _check_count("burn_in", self.burn_in, 0)

    @property
    def effective_burn_in(self) -> int:
        return 10 if self.burn_in is None else self.burn_in


def gen_white(params: WhiteParams) -> Trajectory:
    """I.i.d. sequence of Erdos-Renyi graphs ER(p)."""
    rng = np.random.default_rng(params.seed)
    symmetric = not params.directed
    states = rng.random((params.n, _n_pairs(params.m, symmetric))) < params.p
    return _finish(states, params.m, params, symmetric)


def gen_periodic(params: PeriodicParams) -> Trajectory:
    """Tiled block of ``T`` ER(p) graphs, with per-entry resampling noise.

    Each pair of each snapshot is, with probability ``q``, overwritten by a
    fresh Bernoulli(p) draw.
    """
    rng = np.random.default_rng(params.seed)
    n_pairs = _n_pairs(params.m)
    base = rng.random((params.period, n_pairs)) < params.p
    states = base[np.arange(params.n) % params.period]
    hit = rng.random((params.n, n_pairs)) < params.q
    fresh = rng.random((params.n, n_pairs)) < params.p
    states = np.where(hit, fresh, states)
    return _finish(states, params.m, params)


def _darn_states(n_keep, n_pairs, order, q, y, burn_in, rng, donors=None, w=0.0):
    total = n_keep + burn_in
    states = np.zeros((total, n_pairs), dtype=bool)
    head = min(order, total)
    states[:head] = rng.random((head, n_pairs)) < y
    own = np.arange(n_pairs)
    for t in range(head, total):
        copy = rng.random(n_pairs) < q
        innovation = rng.random(n_pairs) < y
        lag = rng.integers(1, order + 1, size=n_pairs)
        src = own
        if donors is not None:
            src = np.where(rng.random(n_pairs) < w, donors, own)
        states[t] = np.where(copy, states[t - lag, src], innovation)
    return states[burn_in:]


def gen_darn(params: DarnParams) -> Trajectory:
    """Discrete autoregressive network of memory order ``params.order``.

    The first ``order`` states are Bernoulli(y); ``burn_in`` further steps
    (default ``10 * order``) are simulated and discarded.
    """
    rng = np.random.default_rng(params.seed)
    states = _darn_states(
        params.n, _n_pairs(params.m), params.order, params.q, params.y,
        params.effective_burn_in, rng,
    )
    return _finish(states, params.m, params)


def donor_pairs(m: int, shift: int) -> np.ndarray:
    """Column index of the donor of every unordered pair.

    Pair ``{i, j}`` (``i < j``) borrows from ``{i, (j + shift) mod m}``.
    Pairs whose donor would be themselves or a self-loop keep their own
    past.
    """
    i, j = np.triu_indices(m, 1)
    dj = (j + shift) % m
    a, b = np.minimum(i, dj), np.maximum(i, dj)
    codes = pair_codes(m, True).astype(np.int64)
    donor = np.searchsorted(codes, a * m + b)
    own = np.arange(len(codes))
    return np.where(a == b, own, donor)


def gen_darn_cross(params: DarnCrossParams) -> Trajectory:
    """DARN(1) with cross-sampling from a cyclically shifted donor pair."""
    rng = np.random.default_rng(params.seed)
    donors = donor_pairs(params.m, params.shift)
    states = _darn_states(
        params.n, _n_pairs(params.m), 1, params.q, params.y,
        params.effective_burn_in, rng, donors=donors, w=params.w,
    )
    return _finish(states, params.m, params)


class Dictionary:
    """Sequence of graphs ``G_1..G_L`` with ``dist(G_a, G_b) = |a - b|``.

    ``G_1`` is ER(p). ``G_{l+1}`` is ``G_l`` with the original edge
    ``removed[l-1]`` deleted and the never-occupied slot ``inserted[l-1]``
    filled, so no link is rewired twice and no slot is reused. Pairs are
    column indices into :func:`~netcorr.trajectory.pair_codes`.
    """

    def __init__(self, m: int, base: np.ndarray, removed: np.ndarray, inserted: np.ndarray,
                 p: float | None = None, seed: int | None = None):
        self.m = m
        self.base = np.asarray(base, dtype=bool)
        self.removed = np.asarray(removed, dtype=np.int64)
        self.inserted = np.asarray(inserted, dtype=np.int64)
        self.p = p
        self.seed = seed

    @property
    def size(self) -> int:
        return len(self.removed) + 1

    def __len__(self) -> int:
        return self.size

    def states(self, index) -> np.ndarray:
        """Pair states of ``G_index`` (1-based; arrays allowed)."""
        index = np.asarray(index, dtype=np.int64)
        if np.any(index < 1) or np.any(index > self.size):
            raise IndexError(f"dictionary index outside 1..{self.size}")
        scalar = index.ndim == 0
        index = np.atleast_1d(index)
        # step s (0-based) has been applied to G_index iff s < index - 1
        steps = np.arange(self.size - 1)
        applied = steps[None, :] < (index[:, None] - 1)
        out = np.repeat(self.base[None, :], len(index), axis=0)
        out[:, self.removed] = ~applied
        out[:, self.inserted] = applied
        return out[0] if scalar else out

    def graph(self, index: int) -> Snapshot:
        codes = pair_codes(self.m, True).astype(np.int64)[np.flatnonzero(self.states(index))]
        i, j = np.divmod(codes, self.m)
        return Snapshot.from_pairs(self.m, zip(i.tolist(), j.tolist()), True)

    def distance(self, a: int, b: int) -> float:
        """``|E_a ^ E_b| / 2`` over unordered edges, so one rewiring counts 1."""
        return np.count_nonzero(self.states(a) != self.states(b)) / 2

    def record(self) -> dict:
        return {"m": self.m, "L": self.size, "p": self.p, "seed": self.seed}


def build_dictionary(m: int, L: int, p: float, seed: int | None = None, max_attempts: int = 20) -> Dictionary:
    """Sample ``G_1 ~ ER(p)`` and a rewiring sequence of length ``L - 1``.

    ``G_1`` is resampled up to ``max_attempts`` times when it has too few
    edges or too few empty slots for ``L - 1`` rewirings.
    """
    _check_count("m", m, 2)
    _check_count("L", L)
    _check_prob("p", p)
    rng = np.random.default_rng(seed)
    n_pairs = _n_pairs(m)
    need = L - 1
    for _ in range(max_attempts):
        base = rng.random(n_pairs) < p
        edges = np.flatnonzero(base)
        empty = np.flatnonzero(~base)
        if len(edges) >= need and len(empty) >= need:
            removed = rng.permutation(edges)[:need]
            inserted = rng.permutation(empty)[:need]
            return Dictionary(m, base, removed, inserted, p=p, seed=seed)
    raise InfeasibleDictionaryError(
        f"cannot build a dictionary of L={L} graphs on m={m} nodes with p={p} after {max_attempts} "
        f"attempts: need L-1={need} <= |E(G_1)| (expected {p * n_pairs:.0f}) and "
        f"L-1={need} <= m(m-1)/2 - |E(G_1)| (expected {(1 - p) * n_pairs:.0f})"
    )


@dataclass(frozen=True)
class LogisticParams(_Params):
    r: float
    n: int
    dictionary: Dictionary = field(compare=False)
    x0: float = 0.3
    transient: int = 1000

    def __post_init__(self):
        if not 0.0 < self.r <= 4.0:
            raise ParameterError(f"r must lie in (0, 4], got {self.r}")
        if not 0.0 < self.x0 < 1.0:
            raise ParameterError(f"x0 must lie in (0, 1), got {self.x0}")
        _check_count("n", self.n)
        _check_count("transient", self.transient, 0)

    def record(self) -> dict:
        return {
            "r": self.r, "n": self.n, "x0": self.x0, "transient": self.transient,
            "dictionary": self.dictionary.record(),
        }


def dictionary_index(x: np.ndarray, L: int) -> np.ndarray:
    """1-based index ``l + 1`` of the interval ``(l/L, (l+1)/L]`` containing ``x``; ``x = 0`` maps to 1."""
    idx = np.ceil(np.asarray(x, dtype=np.float64) * L).astype(np.int64)
    return np.clip(idx, 1, L)


def logistic_orbit(r: float, x0: float, n: int, transient: int = 0) -> np.ndarray:
    """``n`` iterates of ``x -> r x (1 - x)`` after ``transient`` discarded steps."""
    x = float(x0)
    out = np.empty(n)
    for t in range(transient + n):
        if t >= transient:
            out[t - transient] = x
        x = r * x * (1.0 - x)
        if not 0.0 <= x <= 1.0:
            raise ParameterError(f"logistic iterate left [0, 1] at step {t}: x={x}")
    return out


def gen_logistic(params: LogisticParams) -> Trajectory:
    """Network trajectory driven by the logistic map through a dictionary."""
    d = params.dictionary
    xs = logistic_orbit(params.r, params.x0, params.n, params.transient)
    idx = dictionary_index(xs, d.size)
    states = d.states(idx)
    traj = _finish(states, d.m, params)
    traj.metadata["orbit_head"] = [float(v) for v in xs[:5]]
    return traj


def seed_to_x0(seed: int | None) -> float:
    """A generic initial condition in (0, 1) derived from ``seed``."""
    rng = np.random.default_rng(seed)
    return float(rng.uniform(0.05, 0.95))


def expected_white_variance(m: int, p: float, directed: bool = False) -> float:
    """``sum_ij p(1 - p)`` over admissible entries: the population value of ``c~(0)``."""
    return m * (m - 1) * p * (1 - p)


__all__ = [
    "R_INFINITY", "WhiteParams", "PeriodicParams", "DarnParams", "DarnCrossParams", "LogisticParams",
    "Dictionary", "gen_white", "gen_periodic", "gen_darn", "gen_darn_cross", "build_dictionary",
    "gen_logistic", "dictionary_index", "logistic_orbit", "donor_pairs", "seed_to_x0",
    "expected_white_variance",
]
