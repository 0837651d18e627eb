"""P-values for the maximum, average and full-dimensional statistics.

Two families of tests are available:

* ``permutation``: the null distribution is rebuilt by permuting the rows
  of X and recomputing the statistic, ``r`` times;
* ``chisquare``: closed-form p-values from the upper-tail domination of the
  null distribution of ``n * dcor`` by ``chi2_1 - 1``.  Valid for
  ``alpha <= 0.05``; the guarantee is not claimed beyond that.

Random permutations
-------------------
Replicate ``s`` of a test seeded with ``seed`` draws its permutation from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(s,))))``: the
``n - 1`` swap positions come from one ``Generator.integers`` call with upper
bounds ``n, n-1, ..., 2`` and are applied as Fisher-Yates swaps from the top
of the array down.  Replicates never share a stream, so results do not
depend on how replicates are distributed over threads.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import special

from . import _kernels
from .dcor import DEGENERATE_RTOL, check_paired, pairwise_distances, u_center, unbiased_dcor
from .errors import DegenerateSample, InvalidParameter
from .marginal import UnbiasedDcor, default_threads, marginal_grid, max_marginal

METHODS = ("max", "avg", "full")
TEST_KINDS = ("permutation", "chisquare")

#: Default number of permutations.
DEFAULT_PERMUTATIONS = 1000
#: Default seed for permutation tests.
DEFAULT_SEED = 0

# Memory cap (bytes) for the per-column U-centred matrices kept during a
# permutation test; larger problems recompute the grid per replicate.
_STACK_BYTES = 256 * 2**20
# Memory cap (bytes) for one chunk of permuted matrices.
_CHUNK_BYTES = 32 * 2**20


@dataclass(frozen=True)
class TestOutcome:
    """Result of one independence test.

    Keys of :meth:`to_dict` follow the field order below, which is part of
    the public output format.
    """

    __test__ = False  # not a pytest class

    method: str
    test_kind: str
    statistic: float
    p_value: float
    n: int
    p: int
    q: int
    permutations_used: Optional[int] = None
    seed: Optional[int] = None

    def to_dict(self):
        return asdict(self)


def _check_method(method):
    if method not in METHODS:
        raise InvalidParameter(
            f"method must be one of {', '.join(METHODS)}; got {method!r}"
        )


def _check_dims(n, p=1, q=1):
    for name, value, low in (("n", n, 4), ("p", p, 1), ("q", q, 1)):
        if isinstance(value, (bool, np.bool_)) or not isinstance(
            value, (int, np.integer)
        ):
            raise InvalidParameter(f"{name} must be an integer, got {value!r}")
        if value < low:
            raise InvalidParameter(f"{name} must be >= {low}, got {value}")


def _check_stat(value, name):
    value = float(value)
    if not np.isfinite(value):
        raise InvalidParameter(f"{name} must be finite, got {value}")
    return value


# ---------------------------------------------------------------------------
# chi-square tests


def chisq_cdf(x, k):
    """CDF of the chi-square distribution with ``k`` degrees of freedom."""
    _check_dims(4, k)
    x = float(x)
    if np.isnan(x):
        raise InvalidParameter("x must not be NaN")
    if x <= 0.0:
        return 0.0
    return float(special.gammainc(0.5 * k, 0.5 * x))


def _chisq_sf(x, k):
    if x <= 0.0:
        return 1.0
    return float(special.gammaincc(0.5 * k, 0.5 * x))


def chisq_max_pvalue(c_max, n, p, q):
    """``1 - P(chi2_1 < n*c_max + 1) ** (p*q)``.

    The power is taken in log space so the result keeps full relative
    accuracy for tiny p-values and very large ``p*q``.
    """
    c_max = _check_stat(c_max, "c_max")
    _check_dims(n, p, q)
    t = n * c_max + 1.0
    if t <= 0.0:
        return 1.0
    tail = _chisq_sf(t, 1)
    if tail >= 1.0:
        return 1.0
    pq = float(p) * float(q)
    value = -np.expm1(pq * np.log1p(-tail))
    return float(min(1.0, max(0.0, value)))


def chisq_avg_pvalue(c_avg, n, p, q):
    """``1 - P(chi2_pq < pq * (n*c_avg + 1))``."""
    c_avg = _check_stat(c_avg, "c_avg")
    _check_dims(n, p, q)
    pq = int(p) * int(q)
    t = pq * (n * c_avg + 1.0)
    return _chisq_sf(t, pq)


def chisq_full_pvalue(c_full, n):
    """Chi-square test of the statistic computed on all dimensions at once."""
    return chisq_max_pvalue(c_full, n, 1, 1)


# ---------------------------------------------------------------------------
# statistics


def compute_statistic(x, y, method, *, stat=None, permissive=False, threads=None):
    """Observed statistic for ``method``; also returns the grid when one is built."""
    _check_method(method)
    x, y = check_paired(x, y)
    if method == "full":
        return unbiased_dcor(x, y).dcor, None
    grid = marginal_grid(x, y, stat, permissive=permissive, threads=threads)
    agg = max_marginal(grid)
    value = agg.max_value if method == "max" else agg.avg_value
    return value, grid


def chisquare_test(x, y, method="max", *, permissive=False, threads=None):
    """Closed-form chi-square test (unbiased distance correlation only)."""
    _check_method(method)
    x, y = check_paired(x, y)
    n, p, q = x.shape[0], x.shape[1], y.shape[1]
    value, _ = compute_statistic(
        x, y, method, permissive=permissive, threads=threads
    )
    if method == "max":
        pval = chisq_max_pvalue(value, n, p, q)
    elif method == "avg":
        pval = chisq_avg_pvalue(value, n, p, q)
    else:
        pval = chisq_full_pvalue(value, n)
    return TestOutcome(method, "chisquare", value, pval, n, p, q)


# ---------------------------------------------------------------------------
# permutations


def replicate_permutation(n, seed, index):
    """Permutation of ``range(n)`` used by replicate ``index`` of a seeded test."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    rng = np.random.Generator(np.random.PCG64(ss))
    if n < 2:
        return np.arange(n)
    draws = rng.integers(0, np.arange(n, 1, -1), dtype=np.int64)
    return _kernels.fisher_yates(draws)


def _u_centred_stack(m):
    """U-centred absolute-difference matrices of every column of ``m``,
    each scaled to unit distance variance; shape ``(d, n, n)``."""
    n, d = m.shape
    cols = m.T
    dist = np.abs(cols[:, :, np.newaxis] - cols[:, np.newaxis, :])
    row = dist.sum(axis=2)
    total = row.sum(axis=1)
    stack = (
        dist
        - row[:, :, np.newaxis] / (n - 2)
        - row[:, np.newaxis, :] / (n - 2)
        + (total / ((n - 1) * (n - 2)))[:, np.newaxis, np.newaxis]
    )
    idx = np.arange(n)
    stack[:, idx, idx] = 0.0
    dvar = np.einsum("kij,kij->k", stack, stack) / (n * (n - 3))
    scale = np.ptp(m, axis=0)
    degenerate = (scale == 0) | (dvar <= DEGENERATE_RTOL * scale * scale)
    norm = np.where(degenerate, 0.0, 1.0 / np.sqrt(np.where(degenerate, 1.0, dvar)))
    stack *= norm[:, np.newaxis, np.newaxis]
    return stack, degenerate


class _StackEngine:
    """Evaluates the statistic on row-permuted data by re-indexing U-centred
    matrices that are computed once.

    Permuting the rows of X by ``pi`` gives the same cells as permuting the
    rows of Y by the inverse of ``pi``; the side with fewer columns is the
    one that is re-indexed.  Only the strict upper triangle is used since
    every matrix is symmetric with a zero diagonal.
    """

    def __init__(self, x, y, method, permissive):
        self.n = n = x.shape[0]
        self.method = method
        if method == "full":
            a = u_center(pairwise_distances(x))[np.newaxis]
            b = u_center(pairwise_distances(y))[np.newaxis]
            va = np.sum(a * a) / (n * (n - 3))
            vb = np.sum(b * b) / (n * (n - 3))
            a = a / np.sqrt(va)
            b = b / np.sqrt(vb)
            self.valid = np.ones((1, 1), dtype=bool)
        else:
            a, bad_a = _u_centred_stack(x)
            b, bad_b = _u_centred_stack(y)
            self.valid = ~bad_a[:, np.newaxis] & ~bad_b[np.newaxis, :]
            if not permissive and not self.valid.all():
                cells = [tuple(int(v) for v in c) for c in np.argwhere(~self.valid)]
                raise DegenerateSample(
                    "constant column in the paired sample", columns=cells
                )
        self.permute_x = a.shape[0] <= b.shape[0]
        moving, fixed = (a, b) if self.permute_x else (b, a)
        self.iu, self.ju = np.triu_indices(n, k=1)
        self.moving_flat = moving.reshape(moving.shape[0], n * n)
        self.fixed_triu = np.ascontiguousarray(fixed[:, self.iu, self.ju])
        self.k_moving = moving.shape[0]
        per_perm = self.k_moving * len(self.iu) * 8
        self.chunk = max(1, min(256, _CHUNK_BYTES // per_perm))

    def statistics(self, perms):
        """Statistic for each permutation (rows of ``perms``) of X's rows."""
        n = self.n
        n_perm = perms.shape[0]
        if self.permute_x:
            sigma = perms
        else:
            sigma = np.argsort(perms, axis=1)
        flat = sigma[:, self.iu] * n + sigma[:, self.ju]
        moved = self.moving_flat[:, flat]  # (k_moving, n_perm, m)
        moved = moved.transpose(1, 0, 2).reshape(n_perm * self.k_moving, -1)
        prod = self.fixed_triu @ moved.T  # (k_fixed, n_perm * k_moving)
        scale = 2.0 / (n * (n - 3))
        prod = prod.reshape(self.fixed_triu.shape[0], n_perm, self.k_moving)
        grids = prod.transpose(1, 2, 0) * scale  # (n_perm, k_moving, k_fixed)
        if not self.permute_x:
            grids = grids.transpose(0, 2, 1)
        grids = np.clip(grids, -1.0, 1.0)  # (n_perm, p, q)
        if self.method == "max":
            masked = np.where(self.valid[np.newaxis], grids, -np.inf)
            return masked.reshape(n_perm, -1).max(axis=1)
        if self.method == "avg":
            grids = np.where(self.valid[np.newaxis], grids, 0.0)
            return grids.reshape(n_perm, -1).mean(axis=1)
        return grids[:, 0, 0]


def _use_stack(x, y, method, stat):
    if stat is not None and not isinstance(stat, UnbiasedDcor):
        return False
    n = x.shape[0]
    k = 2 if method == "full" else x.shape[1] + y.shape[1]
    return k * n * n * 8 <= _STACK_BYTES


def _stat_value(x, y, method, stat, permissive, threads):
    value, _ = compute_statistic(
        x, y, method, stat=stat, permissive=permissive, threads=threads
    )
    return value


def permutation_test(
    x,
    y,
    method="max",
    r=DEFAULT_PERMUTATIONS,
    seed=DEFAULT_SEED,
    *,
    stat=None,
    raw_pvalue=False,
    permissive=False,
    threads=None,
):
    """Permutation test of independence.

    The default p-value is ``(1 + #{replicate >= observed}) / (r + 1)``.
    ``raw_pvalue=True`` returns ``#{replicate > observed} / r`` instead,
    which can be exactly 0.
    """
    _check_method(method)
    if isinstance(r, (bool, np.bool_)) or not isinstance(r, (int, np.integer)) or r < 1:
        raise InvalidParameter(f"r must be an integer >= 1, got {r!r}")
    if method == "full" and stat is not None and not isinstance(stat, UnbiasedDcor):
        raise InvalidParameter("the full method is defined for unbiased dcor only")
    x, y = check_paired(x, y)
    threads = default_threads(threads)
    n, p, q = x.shape[0], x.shape[1], y.shape[1]
    reported = _stat_value(x, y, method, stat, permissive, threads)

    if _use_stack(x, y, method, stat):
        engine = _StackEngine(x, y, method, permissive)
        observed = float(engine.statistics(np.arange(n)[np.newaxis])[0])
        chunks = [
            range(start, min(start + engine.chunk, r))
            for start in range(0, r, engine.chunk)
        ]

        def work(indices):
            perms = np.stack([replicate_permutation(n, seed, s) for s in indices])
            return engine.statistics(perms)

        if threads == 1 or len(chunks) == 1:
            parts = [work(c) for c in chunks]
        else:
            with ThreadPoolExecutor(max_workers=min(threads, len(chunks))) as pool:
                parts = list(pool.map(work, chunks))
        null = np.concatenate(parts)
    else:
        observed = reported
        null = np.empty(r)
        for s in range(r):
            perm = replicate_permutation(n, seed, s)
            null[s] = _stat_value(x[perm], y, method, stat, permissive, threads)

    if raw_pvalue:
        pval = float(np.count_nonzero(null > observed)) / r
    else:
        pval = (1.0 + np.count_nonzero(null >= observed)) / (r + 1.0)
    return TestOutcome(method, "permutation", reported, pval, n, p, q, int(r), int(seed))


def run_test(x, y, method="max", test_kind="chisquare", *, r=DEFAULT_PERMUTATIONS,
             seed=DEFAULT_SEED, raw_pvalue=False, permissive=False, threads=None):
    """Dispatch to :func:`chisquare_test` or :func:`permutation_test`."""
    if test_kind == "chisquare":
        return chisquare_test(x, y, method, permissive=permissive, threads=threads)
    if test_kind == "permutation":
        return permutation_test(
            x, y, method, r, seed,
            raw_pvalue=raw_pvalue, permissive=permissive, threads=threads,
        )
    raise InvalidParameter(
        f"test_kind must be one of {', '.join(TEST_KINDS)}; got {test_kind!r}"
    )
