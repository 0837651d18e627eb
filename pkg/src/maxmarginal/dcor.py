"""Unbiased distance covariance and correlation.

Two computational routes are provided:

* a naive O(n^2) route for samples of any dimension, built from the explicit
  Euclidean distance matrix and its U-centred form, and
* an O(n log n) route for univariate samples (:func:`fast_univariate_dcor`),
  which never materialises a distance matrix.

The naive route is kept as the reference the fast route is checked against.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import _kernels
from .errors import (
    DegenerateSample,
    InvalidData,
    SampleTooSmall,
    ShapeMismatch,
)

#: Relative threshold under which a distance variance counts as zero.
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class DcorResult:
    """Unbiased distance covariance, both distance variances and the
    resulting correlation."""

    dcov: float
    dvar_x: float
    dvar_y: float
    dcor: float


def as_data_matrix(values, name="X", min_rows=1):
    """Return ``values`` as a 2-D float64 array (a vector becomes one column).

    Raises :class:`InvalidData` on non-finite entries or a bad shape and
    :class:`SampleTooSmall` when there are fewer than ``min_rows`` rows.
    """
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidData(f"{name} is not a real matrix: {exc}") from None
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        raise InvalidData(f"{name} must be 1-D or 2-D, got {arr.ndim}-D")
    if arr.shape[1] == 0:
        raise InvalidData(f"{name} has no columns")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InvalidData(
            f"{name} has a non-finite entry at row {bad[0]}, column {bad[1]}"
        )
    if arr.shape[0] < min_rows:
        raise SampleTooSmall(
            f"{name} has {arr.shape[0]} samples; at least {min_rows} required"
        )
    return arr


def check_paired(x, y, min_rows=4):
    """Validate a paired sample and return both as 2-D float64 arrays."""
    x = as_data_matrix(x, "X")
    y = as_data_matrix(y, "Y")
    if x.shape[0] != y.shape[0]:
        raise ShapeMismatch(
            f"X has {x.shape[0]} samples but Y has {y.shape[0]}"
        )
    if x.shape[0] < min_rows:
        raise SampleTooSmall(
            f"unbiased distance statistics need n >= {min_rows}, "
            f"got n = {x.shape[0]}"
        )
    return x, y


def pairwise_distances(sample):
    """Euclidean distance matrix between the rows of ``sample``."""
    x = as_data_matrix(sample, "sample", min_rows=2)
    if x.shape[1] == 1:
        col = x[:, 0]
        return np.abs(col[:, np.newaxis] - col[np.newaxis, :])
    return squareform(pdist(x))


def u_center(d):
    """U-centre a distance matrix.

    Off-diagonal entry ``(i, j)`` becomes
    ``d_ij - d_i./(n-2) - d_.j/(n-2) + d../((n-1)(n-2))``; the diagonal is 0.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise ShapeMismatch(f"distance matrix must be square, got {d.shape}")
    if n < 4:
        raise SampleTooSmall(f"U-centering needs n >= 4, got n = {n}")
    row = d.sum(axis=1)
    col = d.sum(axis=0)
    total = row.sum()
    out = (
        d
        - row[:, np.newaxis] / (n - 2)
        - col[np.newaxis, :] / (n - 2)
        + total / ((n - 1) * (n - 2))
    )
    np.fill_diagonal(out, 0.0)
    return out


def unbiased_dcov(a, b):
    """Inner product of two U-centred matrices, ``sum_{i!=j} a_ij b_ij / (n(n-3))``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(
            f"U-centred matrices must be square and equal-sized, "
            f"got {a.shape} and {b.shape}"
        )
    n = a.shape[0]
    if n < 4:
        raise SampleTooSmall(f"unbiased dcov needs n >= 4, got n = {n}")
    # diagonals are zero by construction
    return float(np.sum(a * b)) / (n * (n - 3))


def _checked_variance(dvar, scale, label):
    if scale == 0.0 or dvar <= DEGENERATE_RTOL * scale * scale:
        raise DegenerateSample(
            f"{label} has zero distance variance (constant sample)",
            columns=(label,),
        )
    return dvar


def _finish(dcov, dvar_x, dvar_y, scale_x, scale_y):
    dvar_x = _checked_variance(dvar_x, scale_x, "X")
    dvar_y = _checked_variance(dvar_y, scale_y, "Y")
    dcor = dcov / np.sqrt(dvar_x * dvar_y)
    dcor = min(1.0, max(-1.0, dcor))
    return DcorResult(float(dcov), float(dvar_x), float(dvar_y), float(dcor))


def unbiased_dcor(x, y):
    """Unbiased distance correlation between two (multivariate) samples.

    Uses the O(n^2) U-centred distance matrices.  Raises
    :class:`DegenerateSample` when either sample has zero distance variance.
    """
    x, y = check_paired(x, y)
    dx = pairwise_distances(x)
    dy = pairwise_distances(y)
    a = u_center(dx)
    b = u_center(dy)
    return _finish(
        unbiased_dcov(a, b),
        unbiased_dcov(a, a),
        unbiased_dcov(b, b),
        float(dx.max()),
        float(dy.max()),
    )


def _univariate(v, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InvalidData(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidData(f"{name} has non-finite entries")
    return arr


def fast_univariate_dcor(x, y):
    """Unbiased distance correlation of two vectors in O(n log n) time."""
    x = _univariate(x, "x")
    y = _univariate(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"x has {x.shape[0]} samples but y has {y.shape[0]}")
    n = x.shape[0]
    if n < 4:
        raise SampleTooSmall(f"unbiased dcor needs n >= 4, got n = {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    dcov, dvar_x, dvar_y = _kernels.fast_dcov_terms(xc, yc)
    return _finish(dcov, dvar_x, dvar_y, float(np.ptp(x)), float(np.ptp(y)))
