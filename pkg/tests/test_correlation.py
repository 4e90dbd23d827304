import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from netcorr import (
    LagRange,
    Snapshot,
    Trajectory,
    WhiteParams,
    build_trajectory,
    centered_corr_matrix,
    centered_corr_scalar,
    corr_curve,
    corr_matrix,
    corr_scalar,
    shortcut_gap,
    gen_white,
)
from netcorr.exceptions import DimensionMismatchError, LagRangeError
from test_trajectory import dense_trajectories

KERNELS = ["dense", "sparse"]


def hand_built():
    # t1={(0,1)}, t2={(0,1),(1,2)}, t3={(1,2)}
    snaps = [Snapshot.from_pairs(3, e) for e in ([(0, 1)], [(0, 1), (1, 2)], [(1, 2)])]
    return build_trajectory(snaps)


def single_edge(n=5):
    return build_trajectory([Snapshot.from_pairs(3, [(0, 1)])] * n)


@pytest.mark.parametrize("kernel", KERNELS)
def test_single_edge_constant(kernel):
    traj = single_edge()
    c = corr_matrix(traj, 2, kernel=kernel).values
    expected = np.zeros((3, 3))
    expected[0, 0] = expected[1, 1] = 1
    np.testing.assert_array_equal(c, expected)
    for tau in range(5):
        assert corr_scalar(traj, tau, kernel=kernel) == 2.0
        assert centered_corr_scalar(traj, tau, kernel=kernel) == pytest.approx(0, abs=1e-15)
        np.testing.assert_allclose(centered_corr_matrix(traj, tau, kernel=kernel).values, 0, atol=1e-15)


@pytest.mark.parametrize("kernel", KERNELS)
def test_hand_built_frozen(kernel):
    # values produced by tests/oracle.py (quadruple loop)
    traj = hand_built()
    expected_c1 = np.array([[0.5, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]])
    np.testing.assert_allclose(corr_matrix(traj, 1, kernel=kernel).values, expected_c1, atol=1e-15)
    assert corr_scalar(traj, 1, kernel=kernel) == pytest.approx(2.0, abs=1e-15)
    assert centered_corr_scalar(traj, 1, kernel=kernel) == pytest.approx(-2 / 9, abs=1e-14)
    c0 = centered_corr_matrix(traj, 0, kernel=kernel).values
    expected_c0 = np.array([[2 / 9, 0, -1 / 9], [0, 4 / 9, 0], [-1 / 9, 0, 2 / 9]])
    np.testing.assert_allclose(c0, expected_c0, atol=1e-14)


def test_hand_built_variance_diagonal():
    traj = hand_built()
    a = traj.to_dense()
    per_entry_var = a.var(axis=0)  # population variance of each edge series
    diag = np.diag(centered_corr_matrix(traj, 0).values)
    np.testing.assert_allclose(diag, per_entry_var.sum(axis=1), atol=1e-14)


def test_tau0_diagonal_is_mean_degree():
    traj = gen_white(WhiteParams(m=6, n=40, p=0.3, seed=1))
    c = corr_matrix(traj, 0).values
    degrees = traj.to_dense().sum(axis=2).mean(axis=0)
    np.testing.assert_allclose(np.diag(c), degrees)


@settings(max_examples=80, deadline=None)
@given(dense_trajectories())
def test_oracle_equivalence(case):
    a, symmetric = case
    traj = Trajectory.from_dense(a, symmetric=symmetric)
    mu = oracle.brute_mean(a)
    for tau in range(len(a)):
        raw = oracle.brute_corr_matrix(a, tau)
        cen = oracle.brute_corr_matrix(a, tau, mu)
        r, c = oracle.brute_scalars(a, tau)
        for kernel in KERNELS:
            np.testing.assert_allclose(corr_matrix(traj, tau, kernel=kernel).values, raw, atol=1e-12)
            np.testing.assert_allclose(centered_corr_matrix(traj, tau, kernel=kernel).values, cen, atol=1e-12)
            assert abs(corr_scalar(traj, tau, kernel=kernel) - r) <= 1e-12
            assert abs(centered_corr_scalar(traj, tau, kernel=kernel) - c) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(dense_trajectories())
def test_trace_identity_and_exact_counts(case):
    a, symmetric = case
    traj = Trajectory.from_dense(a, symmetric=symmetric)
    n = len(a)
    for tau in range(n):
        mat = corr_matrix(traj, tau, kernel="sparse").values
        assert corr_scalar(traj, tau, kernel="sparse") == pytest.approx(np.trace(mat), abs=1e-12)
        scaled = mat * (n - tau)
        np.testing.assert_allclose(scaled, np.round(scaled), atol=1e-9)
        assert np.all(mat >= 0)
        cen = centered_corr_matrix(traj, tau).values
        assert centered_corr_scalar(traj, tau) == pytest.approx(np.trace(cen), abs=1e-12)
    assert centered_corr_scalar(traj, 0) >= -1e-12
    assert np.all(np.diag(centered_corr_matrix(traj, 0).values) >= -1e-12)


@settings(max_examples=40, deadline=None)
@given(dense_trajectories(), st.randoms(use_true_random=False))
def test_permutation_equivariance(case, rnd):
    a, symmetric = case
    m = a.shape[1]
    traj = Trajectory.from_dense(a, symmetric=symmetric)
    perm = list(range(m))
    rnd.shuffle(perm)
    other = traj.relabeled(perm)
    p = np.zeros((m, m))
    p[perm, np.arange(m)] = 1
    for tau in range(len(a)):
        np.testing.assert_allclose(corr_matrix(other, tau).values, p @ corr_matrix(traj, tau).values @ p.T,
                                   atol=1e-12)
        assert corr_scalar(other, tau) == pytest.approx(corr_scalar(traj, tau), abs=1e-12)
        assert centered_corr_scalar(other, tau) == pytest.approx(centered_corr_scalar(traj, tau), abs=1e-12)


def test_edge_decomposition():
    traj = gen_white(WhiteParams(m=5, n=30, p=0.4, seed=3))
    a = traj.to_dense()
    for tau in (0, 1, 4):
        per_edge = sum(
            np.dot(a[: 30 - tau, i, j], a[tau:, i, j]) / (30 - tau) for i in range(5) for j in range(5)
        )
        assert corr_scalar(traj, tau) == pytest.approx(per_edge, abs=1e-12)


def test_offdiagonal_is_two_path_cross_correlation():
    # only edges (0,2) and (1,2) are ever active; node 2 is the unique intermediate
    rng = np.random.default_rng(4)
    n, tau = 25, 3
    x = (rng.random(n) < 0.5).astype(int)
    y = (rng.random(n) < 0.5).astype(int)
    snaps = [Snapshot.from_pairs(3, [e for e, on in (((0, 2), x[t]), ((1, 2), y[t])) if on]) for t in range(n)]
    traj = build_trajectory(snaps)
    c = corr_matrix(traj, tau).values
    assert c[0, 1] == pytest.approx(np.dot(x[: n - tau], y[tau:]) / (n - tau))
    assert c[1, 0] == pytest.approx(np.dot(y[: n - tau], x[tau:]) / (n - tau))


def test_lag_out_of_range():
    traj = single_edge(4)
    for f in (corr_matrix, corr_scalar, centered_corr_matrix, centered_corr_scalar):
        with pytest.raises(LagRangeError):
            f(traj, 4)
        with pytest.raises(LagRangeError):
            f(traj, -1)
    with pytest.raises(LagRangeError):
        corr_curve(traj, 4)
    with pytest.raises(LagRangeError):
        LagRange(3, 2)


def test_mu_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        centered_corr_matrix(single_edge(), 0, mu=np.zeros((4, 4)))


def test_external_mu_matches_dense_formula():
    traj = gen_white(WhiteParams(m=5, n=20, p=0.3, seed=8))
    mu = np.full((5, 5), 0.25)
    np.fill_diagonal(mu, 0)
    mu[0, 4] = 0.9  # deliberately asymmetric
    a = traj.to_dense()
    for tau in (0, 2):
        expected = oracle.brute_corr_matrix(a, tau, mu)
        for kernel in KERNELS:
            np.testing.assert_allclose(centered_corr_matrix(traj, tau, mu=mu, kernel=kernel).values,
                                       expected, atol=1e-12)
            assert centered_corr_scalar(traj, tau, mu=mu, kernel=kernel) == pytest.approx(np.trace(expected))


def test_curve_constant_single_point():
    traj = build_trajectory([Snapshot.from_pairs(4, [(0, 1), (1, 2)])] * 3)
    curve = corr_curve(traj, LagRange(0, 0))
    assert curve.lags.tolist() == [0]
    assert curve.c_raw.tolist() == [4.0]
    assert curve.c_centered[0] == pytest.approx(0.0, abs=1e-15)


def test_curve_parallel_is_bit_identical():
    traj = gen_white(WhiteParams(m=30, n=300, p=0.1, seed=5))
    for kernel in KERNELS:
        serial = corr_curve(traj, 40, kernel=kernel, n_jobs=1)
        threaded = corr_curve(traj, 40, kernel=kernel, n_jobs=4)
        np.testing.assert_array_equal(serial.c_raw, threaded.c_raw)
        np.testing.assert_array_equal(serial.c_centered, threaded.c_centered)


def test_curve_kernels_agree_and_lag_forms():
    traj = gen_white(WhiteParams(m=8, n=50, p=0.3, seed=2))
    a = corr_curve(traj, LagRange(0, 30, 3), kernel="dense")
    b = corr_curve(traj, list(range(0, 31, 3)), kernel="sparse")
    np.testing.assert_array_equal(a.lags, b.lags)
    np.testing.assert_allclose(a.c_raw, b.c_raw, atol=1e-12)
    np.testing.assert_allclose(a.c_centered, b.c_centered, atol=1e-12)


def test_white_raw_correlation_expectation():
    # E[c(tau >= 1)] = m(m-1)p^2 for independent Bernoulli entries
    vals = np.array([corr_scalar(gen_white(WhiteParams(10, 100, 0.2, seed=s)), 5) for s in range(40)])
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    assert abs(vals.mean() - 10 * 9 * 0.2**2) < 3 * se


def test_white_centered_delta_shape():
    vals = np.array([corr_curve(gen_white(WhiteParams(10, 100, 0.2, seed=s)), 10).c_centered
                     for s in range(40)])
    assert vals[:, 0].mean() == pytest.approx(14.4, rel=0.05)
    assert np.all(np.abs(vals[:, 1:].mean(axis=0)) < 0.05 * 14.4)


def test_shortcut_gap_diagnostic():
    traj = gen_white(WhiteParams(m=6, n=30, p=0.3, seed=9))
    curve = corr_curve(traj, 5, diagnostics=True)
    gap = curve.diagnostics["shortcut_gap"]
    assert gap[0] == pytest.approx(0.0, abs=1e-12)  # both windows are the whole trajectory at tau=0
    assert shortcut_gap(traj, 3) == pytest.approx(gap[3])
    # constant trajectory: window means equal mu, gap vanishes at every lag
    assert shortcut_gap(single_edge(), 2) == pytest.approx(0.0, abs=1e-12)
