"""Marginal correlation grids and their maximum / average aggregates.

A marginal statistic maps two univariate samples to a real number.  The grid
holds the statistic for every (column of X, column of Y) pair; the test
statistics are its signed maximum and its mean.

Grid evaluation may run on several threads.  Rows of the grid are split into
contiguous blocks whose boundaries depend only on the grid shape, and every
cell is computed independently, so the result is bit-identical for any
thread count.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from . import _kernels
from .dcor import DEGENERATE_RTOL, check_paired, fast_univariate_dcor
from .errors import DegenerateSample, InvalidGrid, InvalidParameter

#: Environment variable consulted for the default thread cap.
THREADS_ENV = "MAXMARGINAL_THREADS"

#: Rows of the grid evaluated per work item.
_ROWS_PER_BLOCK = 8


def default_threads(threads=None):
    """Resolve a thread cap: explicit value, then env var, then CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise InvalidParameter(
                    f"{THREADS_ENV} must be an integer, got {env!r}"
                ) from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise InvalidParameter(f"threads must be >= 1, got {threads}")
    return threads


class MarginalStatistic(Protocol):
    """Anything that maps two equal-length vectors to a real statistic.

    Implementations should satisfy the usual requirements on a marginal
    dependence measure: consistency, an O(1/n^2) null variance and a
    population value that is zero exactly under independence.
    """

    name: str

    def __call__(self, x: np.ndarray, y: np.ndarray) -> float:
        ...


class UnbiasedDcor:
    """Unbiased distance correlation, evaluated with the O(n log n) kernel."""

    name = "unbiased_dcor"

    def __call__(self, x, y):
        return fast_univariate_dcor(x, y).dcor

    def __repr__(self):
        return "UnbiasedDcor()"


@dataclass(frozen=True)
class MarginalGrid:
    """p x q matrix of marginal statistics.

    ``valid`` marks the cells that enter the maximum; it is all-True unless
    the grid was computed in permissive mode and some column was constant
    (such cells hold 0).
    """

    values: np.ndarray
    statistic_id: str = UnbiasedDcor.name
    valid: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidGrid(f"grid must be 2-D, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        valid = self.valid
        if valid is None:
            valid = np.ones(values.shape, dtype=bool)
        else:
            valid = np.array(valid, dtype=bool)
            if valid.shape != values.shape:
                raise InvalidGrid("valid mask does not match the grid shape")
        valid.setflags(write=False)
        object.__setattr__(self, "valid", valid)

    @property
    def p(self):
        return self.values.shape[0]

    @property
    def q(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class Aggregate:
    max_value: float
    argmax: tuple
    avg_value: float


class _ColumnTerms:
    """Per-column quantities reused by every cell of a dcor grid."""

    def __init__(self, m):
        self.n = m.shape[0]
        # per-column contiguous rows keep every cell independent of layout
        cols = np.ascontiguousarray(m.T)
        self.centred = cols - cols.mean(axis=1, keepdims=True)
        self.orders = np.ascontiguousarray(
            np.argsort(self.centred, axis=1, kind="mergesort")
        )
        d = self.centred.shape[0]
        self.row_sums = np.empty_like(self.centred)
        self.ranks = np.empty(self.centred.shape, dtype=np.int64)
        self.n_ranks = np.empty(d, dtype=np.int64)
        self.dvar = np.empty(d)
        for k in range(d):
            v = self.centred[k]
            self.row_sums[k] = _kernels.row_distance_sums(v, self.orders[k])
            self.ranks[k] = _kernels.dense_ranks(v, self.orders[k])
            self.n_ranks[k] = self.ranks[k].max()
        self.totals = self.row_sums.sum(axis=1)
        for k in range(d):
            self.dvar[k] = _kernels.unbiased_from_terms(
                _kernels.self_distance_sum(self.centred[k]),
                np.dot(self.row_sums[k], self.row_sums[k]),
                self.totals[k],
                self.totals[k],
                self.n,
            )
        scale = np.ptp(m, axis=0)
        self.degenerate = (scale == 0) | (self.dvar <= DEGENERATE_RTOL * scale * scale)


def _row_blocks(p):
    return [
        (start, min(start + _ROWS_PER_BLOCK, p))
        for start in range(0, p, _ROWS_PER_BLOCK)
    ]


def _run_blocks(func, blocks, threads):
    if threads == 1 or len(blocks) == 1:
        for block in blocks:
            func(block)
        return
    with ThreadPoolExecutor(max_workers=min(threads, len(blocks))) as pool:
        # list() re-raises the first worker exception
        list(pool.map(func, blocks))


def _degenerate_error(xs, ys):
    bad_x = [int(i) for i in np.flatnonzero(xs.degenerate)]
    bad_y = [int(j) for j in np.flatnonzero(ys.degenerate)]
    parts = []
    if bad_x:
        parts.append("X column(s) " + ", ".join(str(i + 1) for i in bad_x))
    if bad_y:
        parts.append("Y column(s) " + ", ".join(str(j + 1) for j in bad_y))
    cells = [(i, j) for i in bad_x for j in range(len(ys.dvar))]
    cells += [(i, j) for j in bad_y for i in range(len(xs.dvar)) if i not in bad_x]
    return DegenerateSample(
        "constant (zero distance variance) " + " and ".join(parts),
        columns=sorted(cells),
    )


def _dcor_grid(x, y, permissive, threads):
    xs = _ColumnTerms(x)
    ys = _ColumnTerms(y)
    if not permissive and (xs.degenerate.any() or ys.degenerate.any()):
        raise _degenerate_error(xs, ys)
    p, q = x.shape[1], y.shape[1]
    dcov = np.empty((p, q))

    def work(block):
        _kernels.grid_dcov_block(
            xs.centred, xs.orders, xs.row_sums, xs.totals,
            ys.centred, ys.ranks, ys.n_ranks, ys.row_sums, ys.totals,
            block[0], block[1], dcov,
        )

    _run_blocks(work, _row_blocks(p), threads)
    valid = ~xs.degenerate[:, np.newaxis] & ~ys.degenerate[np.newaxis, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        values = dcov / np.sqrt(np.outer(xs.dvar, ys.dvar))
    values = np.where(valid, np.clip(values, -1.0, 1.0), 0.0)
    return values, valid


def _generic_grid(x, y, stat, permissive, threads):
    p, q = x.shape[1], y.shape[1]
    values = np.zeros((p, q))
    valid = np.ones((p, q), dtype=bool)
    failures = []

    def work(block):
        for i in range(*block):
            for j in range(q):
                try:
                    values[i, j] = float(stat(x[:, i], y[:, j]))
                except DegenerateSample:
                    valid[i, j] = False
                    failures.append((i, j))

    _run_blocks(work, _row_blocks(p), threads)
    if failures and not permissive:
        failures.sort()
        i, j = failures[0]
        raise DegenerateSample(
            f"degenerate marginal sample at X column {i + 1}, "
            f"Y column {j + 1}",
            columns=failures,
        )
    return values, valid


def marginal_grid(x, y, stat=None, *, permissive=False, threads=None):
    """Evaluate ``stat`` on every (column of X, column of Y) pair.

    ``stat`` defaults to the unbiased distance correlation.  In the default
    strict mode a constant column raises :class:`DegenerateSample` naming
    the column; with ``permissive=True`` the affected cells are set to 0 and
    excluded from the maximum.
    """
    x, y = check_paired(x, y)
    threads = default_threads(threads)
    if stat is None or isinstance(stat, UnbiasedDcor):
        stat = stat or UnbiasedDcor()
        values, valid = _dcor_grid(x, y, permissive, threads)
    else:
        values, valid = _generic_grid(x, y, stat, permissive, threads)
    if not valid.any():
        raise DegenerateSample(
            "every marginal cell is degenerate",
            columns=[(i, j) for i in range(x.shape[1]) for j in range(y.shape[1])],
        )
    name = getattr(stat, "name", type(stat).__name__)
    return MarginalGrid(values, name, valid)


def _as_grid(grid):
    if not isinstance(grid, MarginalGrid):
        grid = MarginalGrid(np.atleast_2d(np.asarray(grid, dtype=np.float64)))
    if grid.values.size == 0:
        raise InvalidGrid("aggregate of an empty grid")
    return grid


def avg_marginal(grid):
    """Mean of all p*q cells (degenerate cells count as 0)."""
    grid = _as_grid(grid)
    return float(np.mean(grid.values))


def max_marginal(grid):
    """Signed maximum of the grid, its 1-based ``(i, j)`` and the average.

    Ties go to the lexicographically smallest cell.
    """
    grid = _as_grid(grid)
    masked = np.where(grid.valid, grid.values, -np.inf)
    # argmax returns the first maximal cell in row-major order
    flat = int(np.argmax(masked))
    i, j = np.unravel_index(flat, masked.shape)
    return Aggregate(
        max_value=float(grid.values[i, j]),
        argmax=(int(i) + 1, int(j) + 1),
        avg_value=avg_marginal(grid),
    )
