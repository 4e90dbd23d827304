"""Snapshots, trajectories and the annealed adjacency matrix.

Networks are held sparsely. A trajectory stores, for every snapshot, the
sorted integer codes ``i * m + j`` of its active entries; undirected
trajectories store each edge once with ``i < j``. Everything here is
immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import DimensionMismatchError, TrajectoryError

INDEX_SEMANTICS = ("time", "space", "other")


def _code_dtype(m: int):
    return np.int32 if m * m < 2**31 else np.int64


def pair_codes(m: int, symmetric: bool = True) -> np.ndarray:
    """Canonical codes of every admissible entry, in ascending order.

    Column ``k`` of a pair-state matrix (see :meth:`Trajectory.from_pair_states`)
    refers to ``pair_codes(m, symmetric)[k]``.
    """
    if symmetric:
        i, j = np.triu_indices(m, 1)
    else:
        i, j = np.nonzero(~np.eye(m, dtype=bool))
    return (i.astype(np.int64) * m + j).astype(_code_dtype(m))


class Snapshot:
    """A single binary adjacency matrix without self-loops.

    ``edges`` holds ordered pairs ``(i, j)`` meaning ``A[i, j] = 1``. For a
    symmetric snapshot the set is closed under swapping.
    """

    __slots__ = ("m", "edges", "symmetric")

    def __init__(self, m: int, edges: Iterable[tuple[int, int]] = (), symmetric: bool = True):
        m = int(m)
        if m < 1:
            raise TrajectoryError(f"node count must be positive, got {m}")
        edges = frozenset((int(i), int(j)) for i, j in edges)
        for i, j in edges:
            if i == j:
                raise TrajectoryError(f"self-loop ({i},{i}) is not allowed")
            if not (0 <= i < m and 0 <= j < m):
                raise TrajectoryError(f"edge ({i},{j}) out of range for m={m}")
            if symmetric and (j, i) not in edges:
                raise TrajectoryError(f"edge ({i},{j}) has no mirror in a symmetric snapshot")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "symmetric", bool(symmetric))

    def __setattr__(self, name, value):
        raise AttributeError("Snapshot is immutable")

    @classmethod
    def from_pairs(cls, m: int, pairs: Iterable[tuple[int, int]], symmetric: bool = True) -> "Snapshot":
        """Build a snapshot, mirroring every pair when ``symmetric``."""
        pairs = [(int(i), int(j)) for i, j in pairs]
        if symmetric:
            pairs = pairs + [(j, i) for i, j in pairs]
        return cls(m, pairs, symmetric)

    @classmethod
    def from_dense(cls, a: np.ndarray, symmetric: bool | None = None) -> "Snapshot":
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise TrajectoryError(f"adjacency matrix must be square, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise TrajectoryError("adjacency matrix must be binary")
        if symmetric is None:
            symmetric = bool((a == a.T).all())
        i, j = np.nonzero(a)
        return cls(a.shape[0], zip(i.tolist(), j.tolist()), symmetric)

    def codes(self) -> np.ndarray:
        """Sorted canonical codes (``i < j`` only when symmetric)."""
        m = self.m
        vals = [i * m + j for i, j in self.edges if not self.symmetric or i < j]
        return np.array(sorted(vals), dtype=_code_dtype(m))

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.m, self.m), dtype=np.uint8)
        for i, j in self.edges:
            a[i, j] = 1
        return a

    def __len__(self) -> int:
        return len(self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Snapshot):
            return NotImplemented
        return (self.m, self.symmetric, self.edges) == (other.m, other.symmetric, other.edges)

    def __hash__(self) -> int:
        return hash((self.m, self.symmetric, self.edges))

    def __repr__(self) -> str:
        return f"Snapshot(m={self.m}, n_edges={len(self.edges)}, symmetric={self.symmetric})"


@dataclass(frozen=True)
class EdgeSeries:
    """Time series of every entry that is active at least once.

    ``keys`` are canonical codes and ``states[t, e]`` is the state of entry
    ``keys[e]`` in snapshot ``t``. In a symmetric trajectory each column
    stands for the two mirrored matrix entries.
    """

    m: int
    symmetric: bool
    keys: np.ndarray
    states: np.ndarray

    @property
    def multiplicity(self) -> int:
        return 2 if self.symmetric else 1


class Trajectory:
    """Ordered sequence of snapshots over a fixed labelled node set."""

    def __init__(
        self,
        m: int,
        codes: np.ndarray,
        offsets: np.ndarray,
        symmetric: bool = True,
        index: str = "time",
        resolution: float | None = None,
        labels: Sequence | None = None,
        metadata: dict | None = None,
        validate: bool = True,
    ):
        self.m = int(m)
        self.symmetric = bool(symmetric)
        self._codes = np.ascontiguousarray(codes, dtype=_code_dtype(self.m))
        self._offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        if index not in INDEX_SEMANTICS:
            raise TrajectoryError(f"index semantics must be one of {INDEX_SEMANTICS}, got {index!r}")
        self.index = index
        self.resolution = None if resolution is None else float(resolution)
        self.labels = None if labels is None else list(labels)
        self.metadata = dict(metadata or {})
        self._series: EdgeSeries | None = None
        self._codes.setflags(write=False)
        self._offsets.setflags(write=False)
        if validate:
            self._validate()

    def _validate(self) -> None:
        m, codes, offsets = self.m, self._codes, self._offsets
        if m < 1:
            raise TrajectoryError(f"node count must be positive, got {m}")
        if offsets.ndim != 1 or len(offsets) < 2:
            raise TrajectoryError("a trajectory needs at least one snapshot")
        if offsets[0] != 0 or offsets[-1] != len(codes) or np.any(np.diff(offsets) < 0):
            raise TrajectoryError("snapshot offsets are inconsistent with the edge codes")
        if self.labels is not None and len(self.labels) != m:
            raise TrajectoryError(f"{len(self.labels)} labels given for m={m} nodes")
        if len(codes) == 0:
            return
        if codes.min() < 0 or codes.max() >= m * m:
            raise TrajectoryError(f"edge index out of range for m={m}")
        i, j = np.divmod(codes.astype(np.int64), m)
        loops = np.flatnonzero(i == j)
        if len(loops):
            t = int(np.searchsorted(offsets, loops[0], side="right") - 1)
            raise TrajectoryError(f"self-loop ({i[loops[0]]},{i[loops[0]]}) in snapshot {t}")
        if self.symmetric and np.any(i > j):
            raise TrajectoryError("symmetric trajectories store each edge once with i < j")
        step = np.diff(codes.astype(np.int64))
        starts = np.zeros(len(codes), dtype=bool)
        starts[offsets[1:-1][offsets[1:-1] < len(codes)]] = True
        if np.any((step <= 0) & ~starts[1:]):
            raise TrajectoryError("edge codes within a snapshot must be sorted and unique")

    # construction ---------------------------------------------------------

    @classmethod
    def from_snapshots(cls, snapshots: Sequence[Snapshot], **kwargs) -> "Trajectory":
        return build_trajectory(snapshots, **kwargs)

    @classmethod
    def from_pair_states(cls, states: np.ndarray, m: int, symmetric: bool = True, **kwargs) -> "Trajectory":
        """Build from a boolean matrix of shape ``(N, n_pairs)``.

        Columns follow :func:`pair_codes`.
        """
        states = np.asarray(states, dtype=bool)
        keys = pair_codes(m, symmetric)
        if states.ndim != 2 or states.shape[1] != len(keys):
            raise DimensionMismatchError(
                f"pair-state matrix must have shape (N, {len(keys)}) for m={m}, got {states.shape}"
            )
        _, cols = np.nonzero(states)
        offsets = np.concatenate([[0], np.cumsum(states.sum(axis=1))])
        return cls(m, keys[cols], offsets, symmetric=symmetric, validate=False, **kwargs)

    @classmethod
    def from_dense(cls, a: np.ndarray, symmetric: bool | None = None, **kwargs) -> "Trajectory":
        """Build from a stacked adjacency array of shape ``(N, m, m)``."""
        a = np.asarray(a)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise TrajectoryError(f"expected an array of shape (N, m, m), got {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise TrajectoryError("adjacency matrices must be binary")
        if np.any(np.diagonal(a, axis1=1, axis2=2)):
            raise TrajectoryError("self-loop present on the diagonal")
        if symmetric is None:
            symmetric = bool((a == a.transpose(0, 2, 1)).all())
        elif symmetric and not (a == a.transpose(0, 2, 1)).all():
            raise TrajectoryError("adjacency matrices are not symmetric")
        n, m, _ = a.shape
        flat = a.reshape(n, m * m).astype(bool)
        if symmetric:
            flat = flat[:, pair_codes(m, True)]
            return cls.from_pair_states(flat, m, True, **kwargs)
        rows, cols = np.nonzero(flat)
        offsets = np.concatenate([[0], np.cumsum(flat.sum(axis=1))])
        return cls(m, cols, offsets, symmetric=False, **kwargs)

    # access ----------------------------------------------------------------

    @property
    def n_snapshots(self) -> int:
        return len(self._offsets) - 1

    def __len__(self) -> int:
        return self.n_snapshots

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def offsets(self) -> np.ndarray:
        return self._offsets

    def snapshot_codes(self, t: int) -> np.ndarray:
        return self._codes[self._offsets[t]:self._offsets[t + 1]]

    def edge_counts(self) -> np.ndarray:
        """Number of stored entries per snapshot (undirected edges counted once)."""
        return np.diff(self._offsets)

    def __getitem__(self, t: int) -> Snapshot:
        n = self.n_snapshots
        if t < 0:
            t += n
        if not 0 <= t < n:
            raise IndexError(f"snapshot index {t} out of range for N={n}")
        i, j = np.divmod(self.snapshot_codes(t).astype(np.int64), self.m)
        pairs = zip(i.tolist(), j.tolist())
        if self.symmetric:
            return Snapshot.from_pairs(self.m, pairs, True)
        return Snapshot(self.m, pairs, False)

    def __iter__(self) -> Iterator[Snapshot]:
        for t in range(self.n_snapshots):
            yield self[t]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.m == other.m
            and self.symmetric == other.symmetric
            and np.array_equal(self._offsets, other._offsets)
            and np.array_equal(self._codes, other._codes)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"Trajectory(m={self.m}, N={self.n_snapshots}, symmetric={self.symmetric}, "
            f"index={self.index!r})"
        )

    def to_dense(self, dtype=np.float64) -> np.ndarray:
        """Stacked adjacency array of shape ``(N, m, m)``."""
        n, m = self.n_snapshots, self.m
        a = np.zeros((n, m * m), dtype=dtype)
        rows = np.repeat(np.arange(n), self.edge_counts())
        codes = self._codes.astype(np.int64)
        a[rows, codes] = 1
        if self.symmetric:
            i, j = np.divmod(codes, m)
            a[rows, j * m + i] = 1
        return a.reshape(n, m, m)

    def edge_series(self) -> EdgeSeries:
        """Boolean state matrix of the entries that are ever active (cached)."""
        if self._series is None:
            keys = np.unique(self._codes)
            states = np.zeros((self.n_snapshots, len(keys)), dtype=bool)
            rows = np.repeat(np.arange(self.n_snapshots), self.edge_counts())
            states[rows, np.searchsorted(keys, self._codes)] = True
            states.setflags(write=False)
            self._series = EdgeSeries(self.m, self.symmetric, keys, states)
        return self._series

    # derived trajectories ----------------------------------------------------

    def _with(self, codes, offsets) -> "Trajectory":
        return Trajectory(
            self.m, codes, offsets, self.symmetric, self.index, self.resolution,
            self.labels, self.metadata, validate=False,
        )

    def permuted(self, order: Sequence[int]) -> "Trajectory":
        """Reorder snapshots: snapshot ``k`` of the result is ``self[order[k]]``."""
        order = np.asarray(order, dtype=np.int64)
        if order.ndim != 1 or len(order) != self.n_snapshots:
            raise DimensionMismatchError("order must list every snapshot index once")
        counts = self.edge_counts()[order]
        offsets = np.concatenate([[0], np.cumsum(counts)])
        src = np.repeat(self._offsets[order] - offsets[:-1], counts) + np.arange(offsets[-1])
        return self._with(self._codes[src], offsets)

    def relabeled(self, perm: Sequence[int]) -> "Trajectory":
        """Rename node ``i`` to ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.m)):
            raise DimensionMismatchError("perm must be a permutation of range(m)")
        i, j = np.divmod(self._codes.astype(np.int64), self.m)
        a, b = perm[i], perm[j]
        if self.symmetric:
            a, b = np.minimum(a, b), np.maximum(a, b)
        codes = a * self.m + b
        rows = np.repeat(np.arange(self.n_snapshots), self.edge_counts())
        order = np.lexsort((codes, rows))
        out = self._with(codes[order], self._offsets)
        if self.labels is not None:
            labels = [None] * self.m
            for old, new in enumerate(perm):
                labels[new] = self.labels[old]
            out.labels = labels
        return out


def build_trajectory(
    snapshots: Sequence[Snapshot],
    index: str = "time",
    resolution: float | None = None,
    labels: Sequence | None = None,
    metadata: dict | None = None,
) -> Trajectory:
    """Assemble validated snapshots into a trajectory.

    Raises :class:`~netcorr.exceptions.DimensionMismatchError` naming the
    first snapshot whose node count or symmetry differs from snapshot 0.
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise TrajectoryError("a trajectory needs at least one snapshot")
    first = snapshots[0]
    for k, snap in enumerate(snapshots):
        if not isinstance(snap, Snapshot):
            raise TrajectoryError(f"item {k} is not a Snapshot")
        if snap.m != first.m:
            raise DimensionMismatchError(f"dimension mismatch at index {k}: m={snap.m}, expected {first.m}")
        if snap.symmetric != first.symmetric:
            raise DimensionMismatchError(f"symmetry flag mismatch at index {k}")
    parts = [s.codes() for s in snapshots]
    offsets = np.concatenate([[0], np.cumsum([len(p) for p in parts])])
    codes = np.concatenate(parts) if offsets[-1] else np.zeros(0, dtype=_code_dtype(first.m))
    return Trajectory(
        first.m, codes, offsets, first.symmetric, index=index, resolution=resolution,
        labels=labels, metadata=metadata,
    )


class AnnealedMatrix:
    """Sparse real ``m x m`` matrix, normally the time-averaged adjacency.

    ``keys`` are ordered-entry codes ``i * m + j`` (both directions stored
    for symmetric inputs) and ``values`` the matching entries.
    """

    __slots__ = ("m", "keys", "values")

    def __init__(self, m: int, keys: np.ndarray, values: np.ndarray):
        keys = np.asarray(keys, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        order = np.argsort(keys, kind="stable")
        self.m = int(m)
        self.keys = keys[order]
        self.values = values[order]
        if len(self.keys) and (self.keys[0] < 0 or self.keys[-1] >= self.m * self.m):
            raise DimensionMismatchError(f"matrix entry out of range for m={m}")
        if np.any(np.diff(self.keys) == 0):
            raise DimensionMismatchError("duplicate matrix entries")

    @classmethod
    def from_array(cls, a: np.ndarray) -> "AnnealedMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
        flat = a.ravel()
        keys = np.flatnonzero(flat)
        return cls(a.shape[0], keys, flat[keys])

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.m * self.m)
        out[self.keys] = self.values
        return out.reshape(self.m, self.m)

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        """Entries at ordered codes ``codes`` (zero where absent)."""
        codes = np.asarray(codes, dtype=np.int64)
        pos = np.searchsorted(self.keys, codes)
        pos = np.minimum(pos, max(len(self.keys) - 1, 0))
        hit = (self.keys[pos] == codes) if len(self.keys) else np.zeros(len(codes), dtype=bool)
        return np.where(hit, self.values[pos] if len(self.keys) else 0.0, 0.0)

    def frobenius_sq(self) -> float:
        """``<mu, mu>_F``."""
        return float(np.dot(self.values, self.values))

    def __repr__(self) -> str:
        return f"AnnealedMatrix(m={self.m}, nnz={len(self.keys)})"


def annealed_mean(traj: Trajectory) -> AnnealedMatrix:
    """Entrywise time average ``mu = (1/N) sum_t A(t)``."""
    series = traj.edge_series()
    mean = series.states.sum(axis=0) / traj.n_snapshots
    keys = series.keys.astype(np.int64)
    if traj.symmetric:
        i, j = np.divmod(keys, traj.m)
        keys = np.concatenate([keys, j * traj.m + i])
        mean = np.concatenate([mean, mean])
    return AnnealedMatrix(traj.m, keys, mean)
