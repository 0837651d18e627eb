from fractions import Fraction

import numpy as np
import pytest

from maxmarginal import (
    InvalidParameter,
    Scenario,
    chisquare_test,
    gen_fixed_dep,
    gen_increasing_dep,
    marginal_grid,
    max_marginal,
    sum_diagnostic,
    uniform_stream,
    weight_vector,
)


class TestUniformStream:
    def test_empty(self):
        assert uniform_stream(0, 0).shape == (0,)

    def test_support_and_moments(self):
        u = uniform_stream(123, 1_000_000)
        assert u.min() > -1 and u.max() < 1
        assert abs(u.mean()) < 0.005
        assert abs(u.var() - 1 / 3) < 0.01

    def test_construction(self):
        words = np.random.PCG64(np.random.SeedSequence(5)).random_raw(10)
        expected = [(2 * (int(w) >> 11) + 1 - 2**53) / 2**53 for w in words]
        assert uniform_stream(5, 10).tolist() == expected

    def test_prefix_property(self):
        np.testing.assert_array_equal(uniform_stream(9, 50), uniform_stream(9, 200)[:50])

    def test_extremes_stay_inside(self):
        # smallest and largest 53-bit integers
        lo = (2 * 0 + 1 - 2**53) / 2**53
        hi = (2 * (2**53 - 1) + 1 - 2**53) / 2**53
        assert -1 < lo and hi < 1 and lo == -hi


def test_weight_vector():
    w = weight_vector(8)
    assert [Fraction(v).limit_denominator(10) for v in w] == [
        1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), 0, 0, 0
    ]
    with pytest.raises(InvalidParameter):
        weight_vector(4)


class TestFixedDep:
    def test_shapes_and_range(self):
        for rel in ("linear", "quadratic", "fourth_root", "independent"):
            x, y = gen_fixed_dep(rel, 30, 7, 1)
            assert x.shape == (30, 7) and y.shape == (30, 1)
            assert np.all(np.abs(x) < 1)

    def test_linear_identity(self):
        x, y = gen_fixed_dep("linear", 40, 12, 3)
        w = [1.0, 1 / 2, 1 / 3, 1 / 4, 1 / 5]
        expected = np.zeros(40)
        for i in range(5):
            expected += x[:, i] * w[i]
        np.testing.assert_array_equal(y[:, 0], expected)
        assert np.abs(y[:, 0] - x @ weight_vector(12)).max() <= 1e-12

    def test_quadratic_range(self):
        _, y = gen_fixed_dep("quadratic", 500, 5, 4)
        assert y.min() >= 0 and y.max() <= 137 / 60

    def test_fourth_root(self):
        x, y = gen_fixed_dep("fourth_root", 50, 6, 2)
        expected = np.zeros(50)
        for i, w in enumerate(weight_vector(6)[:5]):
            expected += np.abs(x[:, i]) ** 0.25 * w
        np.testing.assert_array_equal(y[:, 0], expected)

    def test_independent_uses_fresh_draws(self):
        x, y = gen_fixed_dep("independent", 50, 6, 2)
        z = uniform_stream(2, 600)[300:].reshape(50, 6)
        np.testing.assert_allclose(y[:, 0], z @ weight_vector(6), atol=1e-12)

    def test_reproducible(self):
        a = gen_fixed_dep("quadratic", 20, 5, 77)
        b = gen_fixed_dep("quadratic", 20, 5, 77)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)
        assert not np.array_equal(a.x, gen_fixed_dep("quadratic", 20, 5, 78).x)

    @pytest.mark.parametrize("args", [("cubic", 20, 5), ("linear", 20, 4), ("linear", 3, 5)])
    def test_invalid(self, args):
        with pytest.raises(InvalidParameter):
            gen_fixed_dep(*args, seed=0)


class TestIncreasingDep:
    def test_linear_columns_equal_x(self):
        x, y = gen_increasing_dep("linear", 30, 10, 10, 3, 0)
        np.testing.assert_array_equal(y[:, :3], x[:, :3])
        assert not np.any(np.all(y[:, 3:] == x[:, 3:], axis=0))

    def test_quadratic_columns(self):
        x, y = gen_increasing_dep("quadratic", 30, 6, 4, 4, 1)
        np.testing.assert_array_equal(y, x[:, :4] ** 2)

    def test_d_zero_independent_blocks(self):
        x, y = gen_increasing_dep("linear", 20, 3, 2, 0, 5)
        stream = uniform_stream(5, 100)
        np.testing.assert_array_equal(x.ravel(), stream[:60])
        np.testing.assert_array_equal(y.ravel(), stream[60:])

    def test_d_too_large(self):
        with pytest.raises(InvalidParameter):
            gen_increasing_dep("linear", 20, 5, 3, 4, 0)
        with pytest.raises(InvalidParameter):
            gen_increasing_dep("linear", 20, 5, 3, -1, 0)

    def test_reproducible(self):
        a = gen_increasing_dep("quadratic", 25, 8, 8, 2, 13)
        b = gen_increasing_dep("quadratic", 25, 8, 8, 2, 13)
        np.testing.assert_array_equal(a.y, b.y)


class TestScenario:
    def test_truth(self):
        assert Scenario("fixed_dep", "linear", 100, 20).d_xy_truth == 5
        assert Scenario("fixed_dep", "independent", 100, 20).d_xy_truth == 0
        assert Scenario("increasing_dep", "quadratic", 50, 50, 50, 3).d_xy_truth == 9
        assert Scenario("increasing_dep", "linear", 50, 50, 50, 0).d_xy_truth == 0

    def test_generate_dispatch(self):
        s = Scenario("increasing_dep", "linear", 20, 4, 3, 2)
        np.testing.assert_array_equal(s.generate(8).y, gen_increasing_dep("linear", 20, 4, 3, 2, 8).y)
        assert s.to_dict() == {"family": "increasing_dep", "relationship": "linear",
                               "n": 20, "p": 4, "q": 3, "d": 2}

    @pytest.mark.parametrize("kwargs", [
        dict(family="other", relationship="linear", n=10, p=5),
        dict(family="fixed_dep", relationship="linear", n=10, p=5, q=2),
        dict(family="increasing_dep", relationship="fourth_root", n=10, p=5, q=5, d=1),
        dict(family="increasing_dep", relationship="linear", n=10, p=5, q=5),
        dict(family="fixed_dep", relationship="linear", n=10.0, p=5),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidParameter):
            Scenario(**kwargs)


def test_sum_diagnostic():
    x, y = sum_diagnostic(40, 6, 3)
    np.testing.assert_allclose(y[:, 0], x.sum(axis=1), atol=1e-14)


def test_independent_chisquare_size():
    rejections = 0
    for s in range(1000):
        x, y = gen_increasing_dep("linear", 50, 10, 10, 0, s)
        rejections += chisquare_test(x, y, "max").p_value < 0.05
    assert rejections / 1000 <= 0.06


def _argmax_rate(relationship, seeds=200):
    hits = 0
    for s in range(seeds):
        x, y = gen_increasing_dep(relationship, 50, 50, 50, 1, s)
        hits += max_marginal(marginal_grid(x, y)).argmax == (1, 1)
    return hits / seeds


def test_argmax_recovers_linear_pair():
    assert _argmax_rate("linear") >= 0.95


@pytest.mark.xfail(
    strict=True,
    reason="at n=50 the quadratic cell's dcor (~0.24) is comparable to the "
    "largest of 2500 null cells; observed recovery rate is about 0.6",
)
def test_argmax_recovers_quadratic_pair():
    assert _argmax_rate("quadratic") >= 0.95
