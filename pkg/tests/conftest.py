"""Shared fixtures and independent scalar-loop oracles.

The oracles below deliberately use plain Python loops over lists so they
share no code path with the vectorised library implementation.
"""
import math

import mpmath as mp
import numpy as np
import pytest


def oracle_distances(rows):
    n = len(rows)
    return [
        [math.sqrt(sum((a - b) ** 2 for a, b in zip(rows[i], rows[j])))
         for j in range(n)]
        for i in range(n)
    ]


def oracle_u_center(d):
    n = len(d)
    row = [sum(d[i][k] for k in range(n)) for i in range(n)]
    col = [sum(d[k][j] for k in range(n)) for j in range(n)]
    tot = sum(row)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                out[i][j] = (d[i][j] - row[i] / (n - 2) - col[j] / (n - 2)
                             + tot / ((n - 1) * (n - 2)))
    return out


def oracle_dcov(a, b):
    n = len(a)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += a[i][j] * b[i][j]
    return total / (n * (n - 3))


def _rows(m):
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    return m.tolist()


def oracle_dcor(x, y):
    a = oracle_u_center(oracle_distances(_rows(x)))
    b = oracle_u_center(oracle_distances(_rows(y)))
    return oracle_dcov(a, b) / math.sqrt(oracle_dcov(a, a) * oracle_dcov(b, b))


def oracle_chisq_cdf(x, k):
    """Chi-square CDF by adaptive quadrature of the density (mpmath)."""
    with mp.workdps(30):
        half = mp.mpf(k) / 2
        logc = -half * mp.log(2) - mp.loggamma(half)

        def density(t):
            return mp.exp(logc + (half - 1) * mp.log(t) - t / 2)

        mode = max(k - 2, 0)
        sd = math.sqrt(2 * k)
        knots = sorted({0.0, float(x)} | {
            v for v in (mode - 4 * sd, mode - sd, mode, mode + sd, mode + 4 * sd)
            if 0 < v < x
        })
        return float(mp.quad(density, knots))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
