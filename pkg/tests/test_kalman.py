import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tickerlab.errors import InsufficientHistory, TooShort
from tickerlab.kalman import (
    KalmanConfig,
    KalmanForecaster,
    KalmanState,
    filter_one_step_ahead,
    kalman_gain,
    kalman_step,
    local_variance,
)

walks = arrays(np.float64, st.integers(4, 80),
               elements=st.floats(1.0, 1000.0, allow_nan=False))


def test_local_variance_example():
    assert local_variance([1.0, 2.0, 3.0, 4.0], 3, 3) == pytest.approx(2.0 / 3.0, abs=1e-15)
    with pytest.raises(InsufficientHistory):
        local_variance([1.0, 2.0], 1, 3)


def test_step_example():
    s = kalman_step(KalmanState(10.0, 1.0), 13.0, 1.0, KalmanConfig(1.0))
    assert kalman_gain(2.0, 1.0) == pytest.approx(2.0 / 3.0)
    assert s.estimate == pytest.approx(12.0, abs=1e-12)
    assert s.variance == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_constant_series_predicts_constant():
    out = filter_one_step_ahead(np.full(20, 7.0))
    assert out.shape == (17,)
    assert np.all(out == 7.0)


def test_output_alignment_and_too_short():
    prices = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    assert len(filter_one_step_ahead(prices)) == 2
    assert filter_one_step_ahead(prices)[0] == 4.0
    with pytest.raises(TooShort):
        filter_one_step_ahead(prices[:3])


def test_tiny_measurement_variance_tracks_last_price(rng):
    prices = 100.0 + np.cumsum(rng.standard_normal(500))
    out = filter_one_step_ahead(prices, KalmanConfig(1e-12))
    np.testing.assert_allclose(out, prices[2:-1], atol=1e-6, rtol=0)


def test_default_measurement_variance_uses_mean_price():
    cfg = KalmanConfig().resolve(np.array([10.0, 30.0]))
    assert cfg.measurement_variance == pytest.approx(1e-4 * 400.0)


@settings(max_examples=60, deadline=None)
@given(walks)
def test_gain_stays_in_unit_interval(prices):
    cfg = KalmanConfig().resolve(prices)
    state = KalmanState(prices[2], 0.0)
    for t in range(3, len(prices)):
        q = local_variance(prices, t, 3)
        gain = kalman_gain(state.variance + q, cfg.measurement_variance)
        assert 0.0 <= gain < 1.0
        new = kalman_step(state, prices[t], q, cfg)
        lo, hi = sorted((state.estimate, prices[t]))
        # the update is a convex blend of prior and measurement
        assert lo - 1e-9 <= new.estimate <= hi + 1e-9
        assert new.variance >= 0.0
        state = new


@settings(max_examples=60, deadline=None)
@given(walks, st.floats(-500.0, 500.0))
def test_shift_equivariance(prices, shift):
    cfg = KalmanConfig(0.5)
    a = filter_one_step_ahead(prices, cfg)
    b = filter_one_step_ahead(prices + shift, cfg)
    np.testing.assert_allclose(b, a + shift, rtol=0, atol=1e-8 * (1 + np.abs(prices).max()))


@settings(max_examples=40, deadline=None)
@given(walks, st.data())
def test_causality(prices, data):
    cfg = KalmanConfig(0.5)
    cut = data.draw(st.integers(4, len(prices)))
    changed = prices.copy()
    changed[cut - 1:] += 1000.0
    a = filter_one_step_ahead(prices, cfg)
    b = filter_one_step_ahead(changed, cfg)
    # forecast j is for day j + 3, so it only sees days < j + 3
    n_same = cut - 1 - 3 + 1
    np.testing.assert_array_equal(a[:n_same], b[:n_same])


def test_forecaster_estimator(rng):
    prices = 50.0 + np.cumsum(rng.standard_normal(100))
    est = KalmanForecaster().fit(prices[:75])
    assert est.config_.measurement_variance == pytest.approx(1e-4 * prices[:75].mean() ** 2)
    out = est.predict(prices)
    assert out.shape == (97,)
    assert est.get_params()["variance_window"] == 3


def test_step_limits():
    tight = kalman_step(KalmanState(3.0, 5.0), 100.0, 1.0, KalmanConfig(1e-12))
    assert tight.estimate == pytest.approx(100.0, abs=1e-6)
    frozen = kalman_step(KalmanState(3.0, 0.0), 100.0, 0.0, KalmanConfig(1.0))
    assert frozen.estimate == 3.0
    assert filter_one_step_ahead([5.0] * 5).tolist() == [5.0, 5.0]
    assert local_variance([5.0] * 6, 4, 3) == 0.0
