"""Compiled O(n log n) kernels for univariate unbiased distance covariance.

Every unbiased distance covariance between two univariate samples reduces to
three sums over the pairwise absolute differences ``a_ij = |x_i - x_j|`` and
``b_ij = |y_i - y_j|``::

    S_ab   = sum_{i != j} a_ij * b_ij
    S_row  = sum_i a_i. * b_i.
    a.., b..  (grand totals)

Row sums come from one sort and a prefix sum.  ``S_ab`` is accumulated by
walking the sample in ascending ``x`` order while four Fenwick trees, keyed
by the rank of ``y``, hold the running count and the sums of ``x``, ``y`` and
``x*y`` of the points already visited.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _neumaier_add(total, comp, value):
    t = total + value
    if abs(total) >= abs(value):
        comp += (total - t) + value
    else:
        comp += (value - t) + total
    return t, comp


@njit(cache=True, nogil=True)
def row_distance_sums(v, order):
    """``sum_j |v_i - v_j|`` for every ``i``; ``order`` sorts ``v`` ascending."""
    n = v.shape[0]
    sorted_v = v[order]
    prefix = np.zeros(n + 1)
    for k in range(n):
        prefix[k + 1] = prefix[k] + sorted_v[k]
    out = np.empty(n)
    for k in range(n):
        val = sorted_v[k]
        below = val * k - prefix[k]
        above = (prefix[n] - prefix[k + 1]) - val * (n - k - 1)
        out[order[k]] = below + above
    return out


@njit(cache=True, nogil=True)
def dense_ranks(v, order):
    """1-based ranks of ``v`` where tied values share a rank."""
    n = v.shape[0]
    ranks = np.empty(n, dtype=np.int64)
    r = 0
    prev = 0.0
    for k in range(n):
        val = v[order[k]]
        if k == 0 or val != prev:
            r += 1
            prev = val
        ranks[order[k]] = r
    return ranks


@njit(cache=True, nogil=True)
def cross_distance_sum(x, y, x_order, y_ranks, n_ranks):
    """``sum_{i != j} |x_i - x_j| * |y_i - y_j|`` in O(n log n)."""
    n = x.shape[0]
    size = n_ranks + 1
    t_cnt = np.zeros(size)
    t_x = np.zeros(size)
    t_y = np.zeros(size)
    t_xy = np.zeros(size)
    tot_cnt = 0.0
    tot_x = 0.0
    tot_y = 0.0
    tot_xy = 0.0
    total = 0.0
    comp = 0.0
    for k in range(n):
        j = x_order[k]
        xj = x[j]
        yj = y[j]
        r = y_ranks[j]

        # prefix over ranks < r
        lo_c = 0.0
        lo_x = 0.0
        lo_y = 0.0
        lo_xy = 0.0
        i = r - 1
        while i > 0:
            lo_c += t_cnt[i]
            lo_x += t_x[i]
            lo_y += t_y[i]
            lo_xy += t_xy[i]
            i -= i & (-i)
        # prefix over ranks <= r
        le_c = 0.0
        le_x = 0.0
        le_y = 0.0
        le_xy = 0.0
        i = r
        while i > 0:
            le_c += t_cnt[i]
            le_x += t_x[i]
            le_y += t_y[i]
            le_xy += t_xy[i]
            i -= i & (-i)
        up_c = tot_cnt - le_c
        up_x = tot_x - le_x
        up_y = tot_y - le_y
        up_xy = tot_xy - le_xy

        # points with y_i < y_j contribute +(x_j - x_i)(y_j - y_i),
        # points with y_i > y_j contribute -(x_j - x_i)(y_j - y_i)
        lo = xj * yj * lo_c - xj * lo_y - yj * lo_x + lo_xy
        up = xj * yj * up_c - xj * up_y - yj * up_x + up_xy
        total, comp = _neumaier_add(total, comp, lo - up)

        i = r
        xy = xj * yj
        while i < size:
            t_cnt[i] += 1.0
            t_x[i] += xj
            t_y[i] += yj
            t_xy[i] += xy
            i += i & (-i)
        tot_cnt += 1.0
        tot_x += xj
        tot_y += yj
        tot_xy += xy
    return 2.0 * (total + comp)


@njit(cache=True, nogil=True)
def self_distance_sum(v):
    """``sum_{i != j} (v_i - v_j)**2`` for a centred ``v``."""
    n = v.shape[0]
    total = 0.0
    comp = 0.0
    for i in range(n):
        total, comp = _neumaier_add(total, comp, v[i] * v[i])
    return 2.0 * n * (total + comp)


@njit(cache=True, nogil=True)
def unbiased_from_terms(s_ab, s_row, a_tot, b_tot, n):
    """Combine the pair sums into the unbiased distance covariance."""
    value = (
        s_ab
        - 2.0 * s_row / (n - 2)
        + a_tot * b_tot / ((n - 1.0) * (n - 2.0))
    )
    return value / (n * (n - 3.0))


@njit(cache=True, nogil=True)
def fast_dcov_terms(x, y):
    """Return ``(dcov, dvar_x, dvar_y)`` for two centred univariate samples."""
    n = x.shape[0]
    x_order = np.argsort(x, kind="mergesort")
    y_order = np.argsort(y, kind="mergesort")
    a_row = row_distance_sums(x, x_order)
    b_row = row_distance_sums(y, y_order)
    y_ranks = dense_ranks(y, y_order)
    n_ranks = y_ranks.max()
    a_tot = a_row.sum()
    b_tot = b_row.sum()

    s_ab = cross_distance_sum(x, y, x_order, y_ranks, n_ranks)
    dcov = unbiased_from_terms(s_ab, np.dot(a_row, b_row), a_tot, b_tot, n)
    dvar_x = unbiased_from_terms(
        self_distance_sum(x), np.dot(a_row, a_row), a_tot, a_tot, n
    )
    dvar_y = unbiased_from_terms(
        self_distance_sum(y), np.dot(b_row, b_row), b_tot, b_tot, n
    )
    return dcov, dvar_x, dvar_y


@njit(cache=True, nogil=True)
def grid_dcov_block(xs, x_orders, x_rows, x_tots, ys, y_ranks, y_nranks,
                    y_rows, y_tots, row_start, row_stop, out):
    """Fill rows ``row_start:row_stop`` of ``out`` with marginal dcov values.

    Column-wise arrays are stored as rows: ``xs[i]`` is column ``i`` of X.
    """
    n = xs.shape[1]
    q = ys.shape[0]
    for i in range(row_start, row_stop):
        for j in range(q):
            s_ab = cross_distance_sum(xs[i], ys[j], x_orders[i], y_ranks[j],
                                      y_nranks[j])
            out[i, j] = unbiased_from_terms(
                s_ab, np.dot(x_rows[i], y_rows[j]), x_tots[i], y_tots[j], n
            )


@njit(cache=True, nogil=True)
def fisher_yates(draws):
    """Apply Fisher-Yates swaps: position ``k`` (from the top) swaps with
    ``draws[n - 1 - k]`` which must lie in ``[0, k]``."""
    n = draws.shape[0] + 1
    perm = np.arange(n)
    for k in range(n - 1, 0, -1):
        j = draws[n - 1 - k]
        tmp = perm[k]
        perm[k] = perm[j]
        perm[j] = tmp
    return perm
