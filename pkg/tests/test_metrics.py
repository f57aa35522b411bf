import math

import numpy as np
import pytest

from oracles import r2_loop, rmse_loop, rpe_loop, smape_loop
from wahls.benchmark import boxplot_stats, r2, rmse, rpe, smape
from wahls.errors import LengthMismatch


def test_r2_hand_cases():
    assert r2([1, 2, 3], [1, 2, 3]) == 1.0
    y = [1.0, 2.0, 3.0, 10.0]
    assert r2(y, [np.mean(y)] * 4) == pytest.approx(0.0, abs=1e-12)
    assert r2([1, 2, 3], [1, 2, 4]) == pytest.approx(0.5, abs=0)


def test_r2_skip_on_constant_truth():
    assert r2([5, 5, 5], [4, 5, 6]) is None


def test_smape_hand_cases():
    assert smape([1, 2], [1, 2]) == 0.0
    assert smape([0.0], [0.0]) == 0.0  # denominator held at 1
    assert smape([3.0], [1.0]) == pytest.approx(80.0, abs=0)


def test_rmse_hand_cases():
    assert rmse([1, 2], [1, 2]) == 0.0
    assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(math.sqrt(12.5), abs=1e-6)


def test_rmse_translation_invariance():
    rng = np.random.default_rng(0)
    y = rng.normal(size=40)
    p = rng.normal(size=40)
    assert rmse(y + 17.5, p + 17.5) == pytest.approx(rmse(y, p), rel=1e-12)


def test_rpe_hand_cases():
    assert list(rpe([4, 7], [4, 7])) == [0.0, 0.0]
    assert rpe([9.0], [4.0])[0] == pytest.approx(50.0, abs=0)
    assert rpe([0.0], [2.0])[0] == pytest.approx(-200.0, abs=0)


def test_rpe_sign_convention():
    # under-prediction must come out positive
    rng = np.random.default_rng(1)
    y = rng.uniform(1, 100, size=50)
    under = rpe(y, y - 0.5)
    over = rpe(y, y + 0.5)
    assert np.all(under > 0)
    assert np.all(over < 0)


def test_length_mismatch():
    for fn in (r2, smape, rmse, rpe):
        with pytest.raises(LengthMismatch):
            fn([1, 2, 3], [1, 2])


def test_metrics_match_scalar_loops():
    rng = np.random.default_rng(42)
    for _ in range(300):
        n = int(rng.integers(2, 200))
        y = rng.uniform(-1e4, 1e5, size=n)
        p = y + rng.normal(scale=rng.uniform(0.1, 1e3), size=n)
        yl, pl = list(map(float, y)), list(map(float, p))
        got = r2(y, p)
        want = r2_loop(yl, pl)
        assert got == pytest.approx(want, abs=1e-9)
        assert smape(y, p) == pytest.approx(smape_loop(yl, pl), abs=1e-9)
        assert rmse(y, p) == pytest.approx(rmse_loop(yl, pl), abs=1e-9)
        np.testing.assert_allclose(rpe(y, p), rpe_loop(yl, pl), atol=1e-9)


def test_metric_bounds_under_fuzz():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(2, 100))
        y = rng.uniform(-100, 1e4, size=n)
        p = rng.uniform(-100, 1e4, size=n)
        assert 0.0 <= smape(y, p) <= 200.0
        score = r2(y, p)
        assert score is None or score <= 1.0
        value = rmse(y, p)
        assert value >= 0.0
        assert (value == 0.0) == bool(np.array_equal(y, p))


def test_metric_order_invariance():
    rng = np.random.default_rng(3)
    y = rng.uniform(0, 100, size=64)
    p = rng.uniform(0, 100, size=64)
    perm = rng.permutation(64)
    assert r2(y, p) == pytest.approx(r2(y[perm], p[perm]), rel=1e-12)
    assert smape(y, p) == pytest.approx(smape(y[perm], p[perm]), rel=1e-12)
    assert rmse(y, p) == pytest.approx(rmse(y[perm], p[perm]), rel=1e-12)


# ---------------------------------------------------------------------------
# Box statistics
# ---------------------------------------------------------------------------


def test_boxplot_one_through_nine():
    box = boxplot_stats(list(range(1, 10)))
    assert box.median == 5 and box.mean == 5
    assert box.q1 == 3 and box.q3 == 7
    assert box.whisker_low == 1 and box.whisker_high == 9
    assert box.outliers == ()


def test_boxplot_singleton():
    box = boxplot_stats([5.0])
    assert (box.median, box.mean, box.q1, box.q3) == (5, 5, 5, 5)
    assert (box.whisker_low, box.whisker_high) == (5, 5)
    assert box.outliers == ()


def test_boxplot_outlier_detection():
    box = boxplot_stats(list(range(1, 10)) + [100])
    # fences from q1/q3 of the 10-point vector
    assert 100 in box.outliers
    assert box.whisker_high < 100
    assert box.whisker_low == 1


def test_boxplot_quartile_interpolation():
    # quartiles interpolate at p*(n-1): for [0, 10], q1 = 2.5
    box = boxplot_stats([0.0, 10.0])
    assert box.q1 == pytest.approx(2.5)
    assert box.q3 == pytest.approx(7.5)
    assert box.median == pytest.approx(5.0)


def test_boxplot_invariants_fuzz():
    rng = np.random.default_rng(11)
    for _ in range(100):
        v = rng.normal(scale=rng.uniform(0.1, 50), size=int(rng.integers(1, 300)))
        box = boxplot_stats(v)
        assert box.q1 <= box.median <= box.q3
        iqr = box.q3 - box.q1
        assert box.whisker_low >= box.q1 - 1.5 * iqr - 1e-12
        assert box.whisker_high <= box.q3 + 1.5 * iqr + 1e-12
        assert box.whisker_low in v and box.whisker_high in v
        for outlier in box.outliers:
            assert outlier < box.q1 - 1.5 * iqr or outlier > box.q3 + 1.5 * iqr
