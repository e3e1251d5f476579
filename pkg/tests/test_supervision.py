import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqmark.autodiff import GradientTape, Tensor, finite_difference_gradient
from seqmark.supervision import bce_loss, gaussian_smooth_label, one_hot_label

from util import rel_error


class TestOneHot:
    def test_basic(self):
        np.testing.assert_array_equal(one_hot_label(5, 2), [0, 0, 1, 0, 0])

    def test_boundary(self):
        np.testing.assert_array_equal(one_hot_label(3, 0), [1, 0, 0])

    @given(st.integers(1, 200), st.data())
    @settings(max_examples=50, deadline=None)
    def test_sums_to_one(self, length, data):
        idx = data.draw(st.integers(0, length - 1))
        assert one_hot_label(length, idx).sum() == 1.0

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="range"):
            one_hot_label(4, 4)
        with pytest.raises(ValueError, match="range"):
            one_hot_label(4, -1)


class TestGaussianSmoothing:
    def test_peak_is_exactly_one(self):
        lab = gaussian_smooth_label(one_hot_label(41, 20), sigma=3.0)
        assert lab.values[20] == 1.0
        assert lab.marker_index == 20

    @pytest.mark.parametrize("sigma", [1, 2, 3, 5])
    def test_value_at_one_sigma(self, sigma):
        # exp(-sigma^2 / (2 sigma^2)) = exp(-0.5) ~ 0.6065
        lab = gaussian_smooth_label(one_hot_label(101, 50), sigma=float(sigma))
        expected = math.exp(-0.5)
        assert abs(lab.values[50 + sigma] - expected) < 1e-12
        assert abs(lab.values[50 - sigma] - expected) < 1e-12

    def test_tiny_sigma_recovers_one_hot(self):
        one_hot = one_hot_label(9, 4)
        lab = gaussian_smooth_label(one_hot, sigma=0.01)
        off_peak = np.delete(lab.values, 4)
        assert np.all(off_peak < 1e-12)
        assert lab.values[4] == 1.0

    def test_support_truncated_at_four_sigma(self):
        lab = gaussian_smooth_label(one_hot_label(101, 50), sigma=2.0)
        assert lab.values[50 + 8] > 0.0
        assert lab.values[50 + 9] == 0.0

    def test_symmetric_about_peak(self):
        lab = gaussian_smooth_label(one_hot_label(61, 30), sigma=4.0)
        for k in range(1, 20):
            assert lab.values[30 - k] == lab.values[30 + k]

    def test_monotone_decay_from_peak(self):
        lab = gaussian_smooth_label(one_hot_label(40, 7), sigma=2.5)
        right = lab.values[7:]
        left = lab.values[: 7 + 1][::-1]
        assert np.all(np.diff(right) <= 0)
        assert np.all(np.diff(left) <= 0)

    @given(st.integers(5, 120), st.data(),
           st.floats(0.2, 10.0, allow_nan=False))
    @settings(max_examples=60, deadline=None)
    def test_argmax_preserved(self, length, data, sigma):
        idx = data.draw(st.integers(0, length - 1))
        lab = gaussian_smooth_label(one_hot_label(length, idx), sigma=sigma)
        assert int(np.argmax(lab.values)) == idx

    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError, match="sigma"):
            gaussian_smooth_label(one_hot_label(5, 2), sigma=0.0)


class TestBceLoss:
    def test_perfect_prediction_near_zero(self):
        y = np.array([0.0, 1.0, 0.0, 1.0])
        assert bce_loss(y, y).item() <= 1e-11

    def test_uniform_half_is_ln2_exactly(self):
        rng = np.random.default_rng(8)
        for t in (64, 128, 256):
            y = rng.uniform(0, 1, size=t)
            assert bce_loss(np.full(t, 0.5), y).item() == math.log(2.0)

    def test_uniform_half_is_ln2_any_length(self):
        # non-dyadic lengths can round the mean by one ulp
        y = np.random.default_rng(9).uniform(0, 1, size=317)
        assert abs(bce_loss(np.full(317, 0.5), y).item() - math.log(2.0)) < 1e-15

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            bce_loss(np.array([0.5, 0.5]), np.array([1.0]))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(10)
        p_data = rng.uniform(0.05, 0.95, size=12)
        y = rng.uniform(0, 1, size=12)
        tape = GradientTape()
        p = Tensor(p_data, tape)
        grads = tape.backward(bce_loss(p, y))
        fd = finite_difference_gradient(lambda v: bce_loss(v, y), Tensor(p_data))
        assert rel_error(grads[p.tid].data, fd.data) < 1e-6

    def test_non_negative_and_entropy_floor(self):
        # at p == y the loss equals the binary entropy of y, its lower bound
        rng = np.random.default_rng(11)
        y = rng.uniform(0.05, 0.95, size=50)
        entropy = float(np.mean(-(y * np.log(y) + (1 - y) * np.log(1 - y))))
        at_truth = bce_loss(y, y).item()
        assert abs(at_truth - entropy) < 1e-12
        for _ in range(20):
            p = rng.uniform(0.01, 0.99, size=50)
            assert bce_loss(p, y).item() >= at_truth - 1e-12

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        p = rng.uniform(0.01, 0.99, size=16)
        y = rng.uniform(0, 1, size=16)
        perm = rng.permutation(16)
        a = bce_loss(p, y).item()
        b = bce_loss(p[perm], y[perm]).item()
        assert abs(a - b) < 1e-12

    def test_saturated_inputs_stay_finite(self):
        p = np.array([0.0, 1.0, 0.5])
        y = np.array([1.0, 0.0, 0.5])
        loss = bce_loss(p, y).item()
        assert np.isfinite(loss)
        assert loss > 0
