"""Synthetic paired samples for the power studies.

Two families are generated, both with X columns i.i.d. Uniform(-1, 1):

``fixed_dep``
    q = 1 and ``Y = f(X) @ w`` with ``w = [1, 1/2, 1/3, 1/4, 1/5, 0, ...]``,
    so exactly five X columns drive Y whatever ``p`` is.
``increasing_dep``
    ``Y^i = X^i`` (linear) or ``(X^i)**2`` (quadratic) for ``i <= d``; the
    remaining Y columns are fresh uniform noise.

``sum_diagnostic`` additionally builds ``Y = sum_i X^i``, whose per-column
dependence vanishes as ``p`` grows.  It is not a high-dimensional dependence
scenario and is only meant for diagnostics.

Uniform variates
----------------
:func:`uniform_stream` reads 64-bit words from
``PCG64(SeedSequence(seed))``, keeps the top 53 bits ``k`` and returns
``(2k + 1 - 2**53) / 2**53``.  The values are symmetric about 0 and lie
strictly inside (-1, 1).
"""
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidParameter

FAMILIES = ("fixed_dep", "increasing_dep")
FIXED_RELATIONSHIPS = ("linear", "quadratic", "fourth_root", "independent")
INCREASING_RELATIONSHIPS = ("linear", "quadratic")
N_WEIGHTED = 5

_TWO53 = 2**53


class PairedSample(NamedTuple):
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class Scenario:
    """A generator configuration together with its dependence ground truth.

    ``d`` is only meaningful for ``increasing_dep``.
    """

    family: str
    relationship: str
    n: int
    p: int
    q: int = 1
    d: Optional[int] = None

    def __post_init__(self):
        _check_int("n", self.n, 4)
        if self.family == "fixed_dep":
            if self.relationship not in FIXED_RELATIONSHIPS:
                raise InvalidParameter(
                    f"fixed_dep relationship must be one of "
                    f"{', '.join(FIXED_RELATIONSHIPS)}; got {self.relationship!r}"
                )
            _check_int("p", self.p, N_WEIGHTED)
            if self.q != 1:
                raise InvalidParameter(f"fixed_dep has q = 1, got q = {self.q}")
        elif self.family == "increasing_dep":
            if self.relationship not in INCREASING_RELATIONSHIPS:
                raise InvalidParameter(
                    f"increasing_dep relationship must be one of "
                    f"{', '.join(INCREASING_RELATIONSHIPS)}; got {self.relationship!r}"
                )
            _check_int("p", self.p, 1)
            _check_int("q", self.q, 1)
            if self.d is None:
                raise InvalidParameter("increasing_dep needs d")
            _check_int("d", self.d, 0)
            if self.d > min(self.p, self.q):
                raise InvalidParameter(
                    f"d = {self.d} exceeds min(p, q) = {min(self.p, self.q)}"
                )
        else:
            raise InvalidParameter(
                f"family must be one of {', '.join(FAMILIES)}; got {self.family!r}"
            )

    @property
    def d_xy_truth(self):
        """Number of dependent dimension pairs built into the generator."""
        if self.family == "fixed_dep":
            return 0 if self.relationship == "independent" else N_WEIGHTED
        return self.d * self.d

    def generate(self, seed):
        if self.family == "fixed_dep":
            return gen_fixed_dep(self.relationship, self.n, self.p, seed)
        return gen_increasing_dep(
            self.relationship, self.n, self.p, self.q, self.d, seed
        )

    def to_dict(self):
        return asdict(self)


def _check_int(name, value, low):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, np.integer)):
        raise InvalidParameter(f"{name} must be an integer, got {value!r}")
    if value < low:
        raise InvalidParameter(f"{name} must be >= {low}, got {value}")


def uniform_stream(seed, count):
    """``count`` Uniform(-1, 1) variates from the documented PCG64 stream."""
    _check_int("count", count, 0)
    bitgen = np.random.PCG64(np.random.SeedSequence(int(seed)))
    words = bitgen.random_raw(count)
    k = (words >> np.uint64(11)).astype(np.int64)
    return (2 * k + 1 - _TWO53).astype(np.float64) / _TWO53


def weight_vector(p):
    """``[1, 1/2, 1/3, 1/4, 1/5, 0, ..., 0]`` of length ``p``."""
    _check_int("p", p, N_WEIGHTED)
    w = np.zeros(p)
    w[:N_WEIGHTED] = 1.0 / np.arange(1, N_WEIGHTED + 1)
    return w


def gen_fixed_dep(relationship, n, p, seed):
    """Sample with five weighted X columns feeding a univariate Y."""
    Scenario("fixed_dep", relationship, n, p)
    w = weight_vector(p)
    stream = uniform_stream(seed, 2 * n * p if relationship == "independent" else n * p)
    x = stream[: n * p].reshape(n, p)
    if relationship == "linear":
        source = x
    elif relationship == "quadratic":
        source = x * x
    elif relationship == "fourth_root":
        source = np.abs(x) ** 0.25
    else:
        source = stream[n * p :].reshape(n, p)
    # fixed left-to-right accumulation, independent of BLAS
    y = np.zeros(n)
    for i in range(N_WEIGHTED):
        y += source[:, i] * w[i]
    return PairedSample(x, y[:, np.newaxis])


def gen_increasing_dep(relationship, n, p, q, d, seed):
    """Sample whose first ``d`` Y columns are functions of the matching X columns."""
    Scenario("increasing_dep", relationship, n, p, q, d)
    stream = uniform_stream(seed, n * p + n * q)
    x = stream[: n * p].reshape(n, p)
    y = stream[n * p :].reshape(n, q).copy()
    if relationship == "linear":
        y[:, :d] = x[:, :d]
    else:
        y[:, :d] = x[:, :d] ** 2
    return PairedSample(x, y)


def sum_diagnostic(n, p, seed):
    """``Y = sum_i X^i``: dependence per column fades as ``p`` grows."""
    _check_int("n", n, 4)
    _check_int("p", p, 1)
    x = uniform_stream(seed, n * p).reshape(n, p)
    return PairedSample(x, x.sum(axis=1, keepdims=True))
