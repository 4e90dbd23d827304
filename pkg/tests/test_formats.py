import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcorr import (
    CorrCurve,
    CorrMatrix,
    WhiteParams,
    centered_corr_matrix,
    corr_curve,
    export_curve,
    export_matrix,
    gen_white,
    read_curve,
    read_matrix,
    read_trajectory,
    write_trajectory,
)
from netcorr.exceptions import ParseError, TrajectoryError
from netcorr.formats import format_curve, format_trajectory


def test_two_lag_curve_is_three_lines(tmp_path):
    curve = CorrCurve(np.array([0, 1]), np.array([2.0, 1.0]), np.array([0.5, -0.1]))
    path = tmp_path / "c.csv"
    export_curve(curve, path)
    lines = path.read_text().splitlines()
    assert lines == ["tau,c_raw,c_centered", "0,2.0,0.5", "1,1.0,-0.1"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False),
                          st.floats(allow_nan=False, allow_infinity=False)), min_size=1, max_size=20))
def test_curve_round_trip_exact(rows):
    raw, cen = map(np.array, zip(*rows))
    curve = CorrCurve(np.arange(len(rows)), raw, cen)
    text = format_curve(curve)
    back = read_curve(io.StringIO(text))
    np.testing.assert_array_equal(back.c_raw, raw)
    np.testing.assert_array_equal(back.c_centered, cen)
    assert format_curve(back) == text


def test_sparse_matrix_two_nonzeros(tmp_path):
    values = np.zeros((4, 4))
    values[0, 1] = 0.25
    values[3, 2] = -1.5
    path = tmp_path / "m.csv"
    export_matrix(CorrMatrix(values, 10, True), path)
    assert path.read_text().splitlines() == ["0,1,0.25", "3,2,-1.5"]
    side = json.loads((tmp_path / "m.csv.json").read_text())
    assert side == {"m": 4, "tau": 10, "centered": True, "format": "sparse"}
    back = read_matrix(path)
    np.testing.assert_array_equal(back.values, values)
    assert back.lag == 10


def test_matrix_export_is_idempotent(tmp_path):
    traj = gen_white(WhiteParams(7, 40, 0.3, seed=2))
    mat = centered_corr_matrix(traj, 3)
    for sparse in (True, False):
        first, second = tmp_path / f"a{sparse}.csv", tmp_path / f"b{sparse}.csv"
        export_matrix(mat, first, sparse=sparse)
        export_matrix(read_matrix(first), second, sparse=sparse)
        assert first.read_bytes() == second.read_bytes()
        np.testing.assert_array_equal(read_matrix(second).values, mat.values)


def test_curve_export_is_idempotent(tmp_path):
    curve = corr_curve(gen_white(WhiteParams(7, 40, 0.3, seed=2)), 10)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    export_curve(curve, first)
    export_curve(read_curve(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_trajectory_file_round_trip(tmp_path):
    traj = gen_white(WhiteParams(6, 15, 0.3, seed=3))
    path = tmp_path / "t.traj"
    write_trajectory(traj, path)
    back = read_trajectory(path)
    assert back == traj
    assert back.metadata["params"]["seed"] == 3
    write_trajectory(back, tmp_path / "u.traj")
    assert path.read_bytes() == (tmp_path / "u.traj").read_bytes()


def test_trajectory_header_embeds_params():
    text = format_trajectory(gen_white(WhiteParams(4, 3, 0.5, seed=7)))
    assert text.startswith("# metadata: ")
    assert '"seed": 7' in text.splitlines()[0]


def test_read_trajectory_errors():
    with pytest.raises((ParseError, TrajectoryError)):
        read_trajectory(io.StringIO("m=3 n=1 symmetric=1\nt=0\n1 1\n"))
    with pytest.raises(ParseError):
        read_trajectory(io.StringIO("not a header\n"))


def test_read_curve_errors():
    with pytest.raises(ParseError):
        read_curve(io.StringIO("tau,c\n0,1\n"))
    with pytest.raises(ParseError, match="line 2"):
        read_curve(io.StringIO("tau,c_raw,c_centered\n0,x,1\n"))


def test_failed_write_leaves_no_file(tmp_path):
    class Boom:
        def tolist(self):
            raise RuntimeError("boom")

    path = tmp_path / "x.csv"
    curve = CorrCurve(np.array([0]), np.array([1.0]), np.array([1.0]))
    export_curve(curve, path)
    before = path.read_bytes()
    from netcorr.formats import open_sink
    with pytest.raises(RuntimeError):
        with open_sink(path) as fh:
            fh.write("partial")
            raise RuntimeError("interrupted")
    assert path.read_bytes() == before
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]
