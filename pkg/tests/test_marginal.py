import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maxmarginal import (
    DegenerateSample,
    InvalidGrid,
    MarginalGrid,
    avg_marginal,
    fast_univariate_dcor,
    marginal_grid,
    max_marginal,
    unbiased_dcor,
)

from conftest import oracle_dcor


def test_single_cell_equals_dcor(rng):
    x = rng.normal(size=(30, 1))
    y = x**2 + rng.normal(size=(30, 1))
    grid = marginal_grid(x, y)
    assert grid.values.shape == (1, 1)
    assert grid.values[0, 0] == pytest.approx(unbiased_dcor(x, y).dcor, abs=1e-12)
    assert grid.statistic_id == "unbiased_dcor"


def test_copy_and_noise_columns(rng):
    n = 100
    y = rng.uniform(-1, 1, size=n)
    x = np.column_stack([y, rng.uniform(-1, 1, size=n)])
    grid = marginal_grid(x, y)
    # per-cell oracle
    for i in range(2):
        assert grid.values[i, 0] == pytest.approx(oracle_dcor(x[:, i], y), abs=1e-12)
    assert grid.values[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert abs(grid.values[1, 0]) < 0.1


def test_thread_count_invariance(rng):
    x = rng.normal(size=(60, 37))
    y = rng.normal(size=(60, 5)) + x[:, :5] ** 2
    one = marginal_grid(x, y, threads=1).values
    for t in (2, 3, 8):
        np.testing.assert_array_equal(marginal_grid(x, y, threads=t).values, one)


def test_env_thread_cap(monkeypatch, rng):
    x = rng.normal(size=(20, 10))
    y = rng.normal(size=(20, 2))
    monkeypatch.setenv("MAXMARGINAL_THREADS", "3")
    np.testing.assert_array_equal(
        marginal_grid(x, y).values, marginal_grid(x, y, threads=1).values
    )


class TestAggregates:
    def test_single_cell(self):
        agg = max_marginal([[0.5]])
        assert (agg.max_value, agg.argmax, agg.avg_value) == (0.5, (1, 1), 0.5)

    def test_tie_break(self):
        agg = max_marginal([[0.1, 0.4], [0.4, 0.2]])
        assert agg.max_value == 0.4
        assert agg.argmax == (1, 2)
        assert agg.avg_value == pytest.approx(0.275, abs=1e-15)

    def test_signed_max(self):
        agg = max_marginal([[-0.3, -0.05], [-0.2, -0.6]])
        assert agg.max_value == -0.05
        assert agg.argmax == (1, 2)

    def test_avg(self):
        assert avg_marginal([[0.5]]) == 0.5
        assert avg_marginal([[1.0, -1.0]]) == 0.0

    def test_avg_matches_loop(self, rng):
        g = rng.uniform(-1, 1, size=(3, 2))
        total = 0.0
        for i in range(3):
            for j in range(2):
                total += g[i, j]
        assert abs(avg_marginal(g) - total / 6) <= 1e-15

    def test_empty(self):
        with pytest.raises(InvalidGrid):
            max_marginal(MarginalGrid(np.zeros((0, 3))))
        with pytest.raises(InvalidGrid):
            avg_marginal(np.zeros((2, 0)))


class TestDegenerateColumns:
    def make(self, rng):
        x = rng.normal(size=(25, 4))
        x[:, 2] = 3.0
        y = rng.normal(size=(25, 2)) + x[:, :2]
        return x, y

    def test_strict_names_column(self, rng):
        x, y = self.make(rng)
        with pytest.raises(DegenerateSample, match="X column\\(s\\) 3") as info:
            marginal_grid(x, y)
        assert info.value.columns == ((2, 0), (2, 1))

    def test_permissive(self, rng):
        x, y = self.make(rng)
        grid = marginal_grid(x, y, permissive=True)
        assert not grid.valid[2].any() and grid.valid[[0, 1, 3]].all()
        np.testing.assert_array_equal(grid.values[2], 0.0)
        agg = max_marginal(grid)
        assert agg.argmax[0] != 3
        ok = np.delete(np.arange(4), 2)
        expected = marginal_grid(x[:, ok], y).values
        np.testing.assert_allclose(grid.values[ok], expected, atol=1e-15)
        assert agg.avg_value == pytest.approx(expected.sum() / 8, abs=1e-15)

    def test_all_degenerate(self):
        with pytest.raises(DegenerateSample):
            marginal_grid(np.ones((10, 2)), np.arange(10.0), permissive=True)


class _NegPearson:
    name = "neg_pearson"

    def __call__(self, x, y):
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            raise DegenerateSample("constant")
        return -float(np.corrcoef(x, y)[0, 1])


def test_pluggable_statistic(rng):
    x = rng.normal(size=(40, 3))
    y = np.column_stack([-x[:, 1], rng.normal(size=40)])
    grid = marginal_grid(x, y, _NegPearson())
    assert grid.statistic_id == "neg_pearson"
    assert max_marginal(grid).argmax == (2, 1)
    assert grid.values[1, 0] == pytest.approx(1.0)
    x[:, 0] = 1.0
    with pytest.raises(DegenerateSample, match="X column 1"):
        marginal_grid(x, y, _NegPearson())


@settings(max_examples=40, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(5, 30), st.integers(1, 6)),
           elements=st.floats(-100, 100, allow_nan=False)),
    st.integers(1, 4),
    st.integers(0, 2**32 - 1),
)
def test_grid_properties(x, q, seed):
    rng = np.random.default_rng(seed)
    n = x.shape[0]
    x = x + rng.normal(size=x.shape)  # avoid constant columns
    y = rng.normal(size=(n, q)) + x[:, :1]
    grid = marginal_grid(x, y)
    v = grid.values
    assert np.all(np.isfinite(v)) and np.all(np.abs(v) <= 1)
    agg = max_marginal(grid)
    assert v.min() <= agg.avg_value + 1e-15 and agg.avg_value <= agg.max_value + 1e-15
    assert v[agg.argmax[0] - 1, agg.argmax[1] - 1] == agg.max_value
    # cells agree with the standalone fast kernel
    i, j = rng.integers(x.shape[1]), rng.integers(q)
    assert v[i, j] == pytest.approx(fast_univariate_dcor(x[:, i], y[:, j]).dcor, abs=1e-12)
    # column permutations permute rows / columns of the grid
    px = rng.permutation(x.shape[1])
    py = rng.permutation(q)
    permuted = marginal_grid(x[:, px], y[:, py]).values
    np.testing.assert_array_equal(permuted, v[np.ix_(px, py)])
    pagg = max_marginal(permuted)
    assert pagg.max_value == agg.max_value
    assert pagg.avg_value == pytest.approx(agg.avg_value, abs=1e-15)
