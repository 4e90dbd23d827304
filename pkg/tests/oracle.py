"""Brute-force reference implementations, kept free of any netcorr kernel code.

Inputs are plain nested lists / numpy arrays of shape (N, m, m).
"""
import numpy as np


def brute_corr_matrix(a, tau, mu=None):
    a = np.asarray(a, dtype=float)
    n, m, _ = a.shape
    if mu is None:
        mu = np.zeros((m, m))
    out = np.zeros((m, m))
    for t in range(n - tau):
        for i in range(m):
            for j in range(m):
                s = 0.0
                for k in range(m):
                    s += (a[t, i, k] - mu[i, k]) * (a[t + tau, j, k] - mu[j, k])
                out[i, j] += s
    return out / (n - tau)


def brute_mean(a):
    a = np.asarray(a, dtype=float)
    n, m, _ = a.shape
    mu = np.zeros((m, m))
    for t in range(n):
        for i in range(m):
            for j in range(m):
                mu[i, j] += a[t, i, j]
    return mu / n


def brute_scalars(a, tau):
    """(c, c~) via per-edge lagged product sums, independent of matrix code."""
    a = np.asarray(a, dtype=float)
    n, m, _ = a.shape
    mu = brute_mean(a)
    raw = cen = 0.0
    for i in range(m):
        for j in range(m):
            series = [a[t, i, j] for t in range(n)]
            for t in range(n - tau):
                raw += series[t] * series[t + tau]
                cen += (series[t] - mu[i, j]) * (series[t + tau] - mu[i, j])
    return raw / (n - tau), cen / (n - tau)


def symmetric_difference(edges_a, edges_b):
    return len(set(edges_a) ^ set(edges_b))
