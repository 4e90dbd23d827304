"""Timestamped contact lists and their binning into trajectories.

A contact is an event ``(t, a, b)``. Binning at resolution ``R`` puts the
unweighted, undirected edge ``{a, b}`` into snapshot ``k`` when at least
one contact between them falls in ``[t_start + k R, t_start + (k+1) R)``.
"""
from __future__ import annotations

import gzip
import logging
import math
import os
from dataclasses import dataclass
from typing import BinaryIO, Sequence

import numpy as np

from .exceptions import EmptyWindowError, ParameterError, ParseError
from .trajectory import Trajectory

logger = logging.getLogger(__name__)

ROLES = ("t", "i", "j")
FORMATS = ("tij", "csv")


@dataclass(frozen=True)
class ContactEvents:
    """Cleaned contacts sorted by time; ``a``/``b`` index into ``labels``."""

    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    labels: list
    n_self_dropped: int = 0
    fixed_nodes: bool = False

    def __len__(self) -> int:
        return len(self.times)

    @property
    def id_map(self) -> dict:
        return {label: k for k, label in enumerate(self.labels)}

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class BinningSpec:
    """Snapshot width in seconds plus an optional ``[t_start, t_end)`` window.

    Either window bound may be ``None``: ``t_start`` then defaults to the
    first event and the last snapshot is the one holding the last event.
    """

    resolution: float
    window: tuple[float | None, float | None] | None = None

    def __post_init__(self):
        if not self.resolution > 0:
            raise ParameterError(f"resolution must be positive, got {self.resolution}")
        if self.window is not None:
            lo, hi = self.window
            if lo is not None and hi is not None and not hi > lo:
                raise ParameterError(f"window end {hi} must exceed start {lo}")


def _read_bytes(source) -> bytes:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            data = data.encode()
    else:
        raise ParseError(f"unsupported source type {type(source).__name__}")
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def parse_cols(cols: str | Sequence[str] | None) -> tuple[str, ...] | None:
    """Positional roles, e.g. ``"t,i,j"`` or ``"i,j,t,_"`` (``_`` skips a column)."""
    if cols is None:
        return None
    if isinstance(cols, str):
        cols = [c.strip() for c in cols.split(",")]
    cols = tuple(cols)
    for role in ROLES:
        if cols.count(role) != 1:
            raise ParseError(f"column spec {','.join(cols)!r} must name each of t, i, j exactly once")
    return cols


def _natural_order(labels) -> list:
    try:
        return sorted(labels, key=int)
    except ValueError:
        return sorted(labels)


def parse_contacts(
    source: bytes | str | os.PathLike | BinaryIO,
    fmt: str = "tij",
    cols: str | Sequence[str] | None = None,
    delimiter: str | None = None,
    nodes: Sequence | None = None,
) -> ContactEvents:
    """Parse a contact list.

    ``fmt="tij"`` reads whitespace separated columns, ``t i j`` by default.
    ``fmt="csv"`` expects a header row and requires ``cols``. Gzip input is
    detected automatically; lines starting with ``#`` are ignored.

    Node labels are ordered numerically when they are all integers and
    lexicographically otherwise, unless ``nodes`` fixes the node universe
    and its order. Self-contacts are dropped and counted.
    """
    if fmt not in FORMATS:
        raise ParseError(f"format must be one of {FORMATS}, got {fmt!r}")
    text = _read_bytes(source).decode("utf-8")
    lines = text.splitlines()
    if fmt == "csv":
        delimiter = delimiter or ","
        header_at = next((k for k, ln in enumerate(lines) if ln.strip() and not ln.startswith("#")), None)
        if header_at is None:
            raise ParseError("empty input")
        header = [h.strip() for h in lines[header_at].split(delimiter)]
        if cols is None:
            raise ParseError(
                f"CSV input needs a column spec; header is {header}. "
                f"Pass e.g. --cols {','.join((['t', 'i', 'j'] + ['_'] * len(header))[:len(header)])}"
            )
        start = header_at + 1
    else:
        start = 0
    roles = parse_cols(cols) or ROLES
    pos = {role: roles.index(role) for role in ROLES}
    width = len(roles)

    times, ends = [], []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(delimiter)
        if len(parts) < width:
            raise ParseError(f"line {lineno}: expected {width} columns, got {len(parts)}: {line!r}")
        try:
            t = float(parts[pos["t"]])
        except ValueError:
            raise ParseError(f"line {lineno}: bad timestamp {parts[pos['t']]!r}") from None
        if not math.isfinite(t):
            raise ParseError(f"line {lineno}: non-finite timestamp")
        times.append(t)
        ends.append((parts[pos["i"]].strip(), parts[pos["j"]].strip()))
    if not times:
        raise ParseError("empty input: no contact lines")

    keep = [k for k, (u, v) in enumerate(ends) if u != v]
    dropped = len(ends) - len(keep)
    if dropped:
        logger.warning("dropped %d self-contact(s)", dropped)
    if not keep:
        raise ParseError("no contacts left after dropping self-contacts")

    if nodes is not None:
        labels = [str(n) for n in nodes]
        index = {lab: k for k, lab in enumerate(labels)}
        unknown = {u for k in keep for u in ends[k] if u not in index}
        if unknown:
            raise ParseError(f"contacts mention nodes outside the given node list: {sorted(unknown)[:5]}")
    else:
        labels = _natural_order({u for k in keep for u in ends[k]})
        index = {lab: k for k, lab in enumerate(labels)}

    t = np.array([times[k] for k in keep])
    a = np.array([index[ends[k][0]] for k in keep], dtype=np.int64)
    b = np.array([index[ends[k][1]] for k in keep], dtype=np.int64)
    order = np.argsort(t, kind="stable")
    return ContactEvents(t[order], a[order], b[order], labels, dropped, nodes is not None)


def bin_to_trajectory(events: ContactEvents, spec: BinningSpec) -> Trajectory:
    """Presence-threshold binning into a symmetric trajectory.

    Empty bins are kept as empty snapshots. Unless the node universe was
    fixed at parse time, the nodes are those contacting within the window.
    """
    if len(events) == 0:
        raise EmptyWindowError("no events to bin")
    res = float(spec.resolution)
    lo, hi = spec.window if spec.window is not None else (None, None)
    t_start = events.t_min if lo is None else float(lo)
    mask = events.times >= t_start
    if hi is not None:
        mask &= events.times < float(hi)
    if not mask.any():
        raise EmptyWindowError(f"window [{t_start}, {hi}) contains no events")
    times, a, b = events.times[mask], events.a[mask], events.b[mask]
    if hi is not None:
        n = math.ceil((float(hi) - t_start) / res)
    else:
        n = int(math.floor((times[-1] - t_start) / res)) + 1

    labels = events.labels
    if not events.fixed_nodes:
        used = np.unique(np.concatenate([a, b]))
        remap = np.full(len(labels), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        a, b = remap[a], remap[b]
        labels = [labels[k] for k in used]
    m = len(labels)

    k = np.floor((times - t_start) / res).astype(np.int64)
    k = np.minimum(k, n - 1)
    lo_node, hi_node = np.minimum(a, b), np.maximum(a, b)
    key = np.unique(k * (m * m) + lo_node * m + hi_node)
    bins, codes = np.divmod(key, m * m)
    offsets = np.searchsorted(bins, np.arange(n + 1), side="left")
    meta = {"t_start": t_start, "resolution": res, "n_self_dropped": events.n_self_dropped}
    return Trajectory(
        m, codes, offsets, symmetric=True, index="time", resolution=res, labels=labels, metadata=meta,
    )


def trajectory_to_events(traj: Trajectory, t_start: float = 0.0, resolution: float = 1.0,
                         rng: np.random.Generator | None = None) -> str:
    """Emit a ``t i j`` contact list that bins back to ``traj``.

    Each active edge of snapshot ``k`` becomes one contact at a time inside
    ``[t_start + k R, t_start + (k+1) R)``, jittered when ``rng`` is given.
    """
    lines = []
    m = traj.m
    for k in range(traj.n_snapshots):
        for code in traj.snapshot_codes(k).tolist():
            i, j = divmod(code, m)
            offset = 0.0 if rng is None else float(rng.integers(0, max(int(resolution), 1)))
            if rng is not None and rng.random() < 0.5:
                i, j = j, i
            lines.append(f"{t_start + k * resolution + offset!r} {i} {j}")
    return "\n".join(lines) + "\n"


__all__ = [
    "ContactEvents", "BinningSpec", "parse_contacts", "bin_to_trajectory", "parse_cols",
    "trajectory_to_events",
]
