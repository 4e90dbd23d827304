"""Text formats for trajectories, correlation curves and matrices.

Trajectory files::

    # metadata: {...json...}
    # labels: [...json...]
    m=<int> n=<int> symmetric=<0|1>
    t=0
    0 1
    t=1
    ...

Undirected trajectories list each edge once with ``i < j``. Curves are CSV
with header ``tau,c_raw,c_centered``. Matrices are either dense CSV rows or
``i,j,value`` triplets, each with a JSON sidecar ``<path>.json``. Floats are
written with ``repr`` so they parse back bit-exactly. Writes to paths are
atomic.
"""
from __future__ import annotations

import contextlib
import io
import json
import os
import sys
import tempfile

import numpy as np

from .correlation import CorrCurve, CorrMatrix
from .exceptions import ParseError
from .trajectory import Trajectory

CURVE_HEADER = "tau,c_raw,c_centered"


@contextlib.contextmanager
def open_sink(sink):
    """Yield a text stream; paths are written through a temp file and renamed."""
    if sink is None or sink == "-":
        yield sys.stdout
        return
    if hasattr(sink, "write"):
        yield sink
        return
    path = os.fspath(sink)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".netcorr-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _read_text(source) -> str:
    if source == "-":
        return sys.stdin.read()
    if hasattr(source, "read"):
        data = source.read()
        return data.decode() if isinstance(data, bytes) else data
    with open(source, "r") as fh:
        return fh.read()


def write_json(obj, sink) -> None:
    with open_sink(sink) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# trajectories ------------------------------------------------------------------


def format_trajectory(traj: Trajectory) -> str:
    buf = io.StringIO()
    meta = dict(traj.metadata)
    meta.setdefault("index", traj.index)
    if traj.resolution is not None:
        meta.setdefault("resolution", traj.resolution)
    buf.write(f"# metadata: {json.dumps(meta, sort_keys=True, default=_json_default)}\n")
    if traj.labels is not None:
        buf.write(f"# labels: {json.dumps([str(x) for x in traj.labels])}\n")
    buf.write(f"m={traj.m} n={traj.n_snapshots} symmetric={int(traj.symmetric)}\n")
    m = traj.m
    for t in range(traj.n_snapshots):
        buf.write(f"t={t}\n")
        codes = traj.snapshot_codes(t).astype(np.int64)
        if len(codes):
            i, j = np.divmod(codes, m)
            buf.write("\n".join(f"{a} {b}" for a, b in zip(i.tolist(), j.tolist())))
            buf.write("\n")
    return buf.getvalue()


def write_trajectory(traj: Trajectory, sink) -> None:
    text = format_trajectory(traj)
    with open_sink(sink) as fh:
        fh.write(text)


def _parse_header(line: str, lineno: int) -> tuple[int, int, bool]:
    fields = {}
    for part in line.split():
        key, sep, value = part.partition("=")
        if not sep:
            raise ParseError(f"line {lineno}: malformed header {line!r}")
        fields[key] = value
    try:
        m, n, sym = int(fields["m"]), int(fields["n"]), fields["symmetric"]
    except (KeyError, ValueError):
        raise ParseError(f"line {lineno}: header must read 'm=<int> n=<int> symmetric=<0|1>'") from None
    if sym not in ("0", "1"):
        raise ParseError(f"line {lineno}: symmetric must be 0 or 1")
    return m, n, sym == "1"


def read_trajectory(source) -> Trajectory:
    """Parse the canonical trajectory format (path, stream or ``"-"``)."""
    text = _read_text(source)
    meta, labels, header = {}, None, None
    snapshots: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, _, value = body.partition(":")
            try:
                if key == "metadata":
                    meta = json.loads(value)
                elif key == "labels":
                    labels = json.loads(value)
            except json.JSONDecodeError as exc:
                raise ParseError(f"line {lineno}: bad {key} comment: {exc}") from None
            continue
        if header is None:
            header = _parse_header(line, lineno)
            continue
        m, n, sym = header
        if line.startswith("t="):
            try:
                t = int(line[2:])
            except ValueError:
                raise ParseError(f"line {lineno}: bad snapshot marker {line!r}") from None
            if t != len(snapshots):
                raise ParseError(f"line {lineno}: expected t={len(snapshots)}, got t={t}")
            snapshots.append([])
            continue
        if not snapshots:
            raise ParseError(f"line {lineno}: edge before the first 't=' marker")
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'i j', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer node index in {line!r}") from None
        if not (0 <= i < m and 0 <= j < m):
            raise ParseError(f"line {lineno}: node index out of range for m={m}")
        if i == j:
            raise ParseError(f"line {lineno}: self-loop ({i},{i})")
        if sym and i > j:
            i, j = j, i
        snapshots[-1].append(i * m + j)
    if header is None:
        raise ParseError("missing header line 'm=<int> n=<int> symmetric=<0|1>'")
    m, n, sym = header
    if len(snapshots) != n:
        raise ParseError(f"header announces n={n} snapshots, found {len(snapshots)}")
    parts = [np.unique(np.array(s, dtype=np.int64)) for s in snapshots]
    offsets = np.concatenate([[0], np.cumsum([len(p) for p in parts])])
    codes = np.concatenate(parts) if n else np.zeros(0, dtype=np.int64)
    index = meta.pop("index", "time")
    resolution = meta.pop("resolution", None)
    return Trajectory(m, codes, offsets, sym, index=index, resolution=resolution, labels=labels, metadata=meta)


# curves ------------------------------------------------------------------------


def format_curve(curve: CorrCurve) -> str:
    rows = [CURVE_HEADER]
    for tau, raw, cen in zip(curve.lags.tolist(), curve.c_raw.tolist(), curve.c_centered.tolist()):
        rows.append(f"{tau},{raw!r},{cen!r}")
    return "\n".join(rows) + "\n"


def export_curve(curve: CorrCurve, sink) -> None:
    text = format_curve(curve)
    with open_sink(sink) as fh:
        fh.write(text)


def read_curve(source) -> CorrCurve:
    lines = [ln.strip() for ln in _read_text(source).splitlines() if ln.strip()]
    if not lines or lines[0] != CURVE_HEADER:
        raise ParseError(f"curve file must start with header {CURVE_HEADER!r}")
    lags, raw, cen = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 3 fields, got {len(parts)}")
        try:
            lags.append(int(parts[0]))
            raw.append(float(parts[1]))
            cen.append(float(parts[2]))
        except ValueError:
            raise ParseError(f"line {lineno}: malformed number in {line!r}") from None
    if not lags:
        raise ParseError("curve file has no rows")
    return CorrCurve(np.array(lags), np.array(raw), np.array(cen))


# matrices ------------------------------------------------------------------------


def sidecar_path(path) -> str:
    return os.fspath(path) + ".json"


def format_matrix(matrix: CorrMatrix, sparse: bool = True) -> str:
    values = matrix.values
    if sparse:
        i, j = np.nonzero(values)
        rows = [f"{a},{b},{float(values[a, b])!r}" for a, b in zip(i.tolist(), j.tolist())]
    else:
        rows = [",".join(repr(v) for v in row) for row in values.tolist()]
    return "\n".join(rows) + ("\n" if rows else "")


def export_matrix(matrix: CorrMatrix, sink, sparse: bool = True, meta: dict | None = None,
                  sidecar=None) -> dict:
    """Write a matrix and its JSON sidecar; returns the sidecar record.

    The sidecar goes to ``<sink>.json`` when ``sink`` is a path, or to
    ``sidecar`` when given explicitly.
    """
    record = {
        "m": matrix.m,
        "tau": matrix.lag,
        "centered": matrix.centered,
        "format": "sparse" if sparse else "dense",
    }
    record.update(meta or {})
    text = format_matrix(matrix, sparse)
    with open_sink(sink) as fh:
        fh.write(text)
    if sidecar is None and isinstance(sink, (str, os.PathLike)) and sink != "-":
        sidecar = sidecar_path(sink)
    if sidecar is not None:
        write_json(record, sidecar)
    return record


def read_matrix(source, sidecar=None) -> CorrMatrix:
    """Read a matrix written by :func:`export_matrix`.

    The sidecar defaults to ``<source>.json``; it is required for sparse
    files because they do not record ``m``.
    """
    if sidecar is None and isinstance(source, (str, os.PathLike)) and os.path.exists(sidecar_path(source)):
        sidecar = sidecar_path(source)
    record = {}
    if sidecar is not None:
        with open(sidecar) as fh:
            record = json.load(fh)
    lines = [ln.strip() for ln in _read_text(source).splitlines() if ln.strip()]
    fmt = record.get("format", "dense")
    try:
        if fmt == "sparse":
            if "m" not in record:
                raise ParseError("sparse matrix files need a sidecar recording m")
            m = int(record["m"])
            values = np.zeros((m, m))
            for line in lines:
                a, b, v = line.split(",")
                values[int(a), int(b)] = float(v)
        else:
            values = np.array([[float(v) for v in line.split(",")] for line in lines])
            if values.ndim != 2 or values.shape[0] != values.shape[1]:
                raise ParseError(f"dense matrix must be square, got shape {values.shape}")
    except (ValueError, IndexError) as exc:
        raise ParseError(f"malformed matrix file: {exc}") from None
    return CorrMatrix(values, int(record.get("tau", 0)), bool(record.get("centered", True)))


__all__ = [
    "open_sink", "write_json", "format_trajectory", "write_trajectory", "read_trajectory",
    "format_curve", "export_curve", "read_curve", "format_matrix", "export_matrix", "read_matrix",
    "sidecar_path",
]
