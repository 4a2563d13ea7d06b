import numpy as np
import pytest
from scipy.stats import binom
from sklearn.base import clone

from avatarbench.degrade import (
    DegradationConfig,
    DegradationPipeline,
    apply_delay,
    apply_framerate_ratio,
    apply_noise,
    apply_occlusion,
    degrade_stream,
    operator_seed,
)
from avatarbench.streams import CartesianStream


def make_stream(n=10, j=4, framerate=60.0, seed=0):
    rng = np.random.default_rng(seed)
    positions = rng.normal(size=(n, j, 3))
    valid = np.ones((n, j), dtype=bool)
    return CartesianStream(np.arange(n) / framerate, positions, valid, framerate)


def assert_bit_identical(a, b):
    assert np.array_equal(a.timestamps, b.timestamps)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.valid, b.valid)
    assert a.framerate == b.framerate


def assert_frame_invariants(before, after):
    assert len(after) == len(before)
    assert after.framerate == before.framerate
    assert np.array_equal(after.timestamps, before.timestamps)


class TestDelay:
    def test_zero_is_identity(self):
        s = make_stream()
        assert_bit_identical(apply_delay(s, 0), s)

    def test_index_shift_with_leading_hold(self):
        s = make_stream(8)
        out = apply_delay(s, 2)
        assert np.array_equal(out.positions[5], s.positions[3])
        assert np.array_equal(out.positions[0], s.positions[0])
        assert np.array_equal(out.positions[1], s.positions[0])
        assert np.array_equal(out.positions[7], s.positions[5])
        assert_frame_invariants(s, out)

    def test_saturating_delay(self):
        s = make_stream(5)
        out = apply_delay(s, 9)
        for t in range(5):
            assert np.array_equal(out.positions[t], s.positions[0])


class TestFramerateRatio:
    def test_one_is_identity(self):
        s = make_stream()
        assert_bit_identical(apply_framerate_ratio(s, 1), s)

    def test_hold_pattern(self):
        s = make_stream(4)
        out = apply_framerate_ratio(s, 2)
        for t, src in enumerate([0, 0, 2, 2]):
            assert np.array_equal(out.positions[t], s.positions[src])

    def test_ramp_staircase_closed_form(self):
        # positions walk +1 cm in x per frame; ratio-4 hold gives treads of 4
        n, ratio = 16, 4
        positions = np.zeros((n, 1, 3))
        positions[:, 0, 0] = 0.01 * np.arange(n)
        s = CartesianStream(np.arange(n) / 60.0, positions, np.ones((n, 1), bool), 60.0)
        out = apply_framerate_ratio(s, ratio)
        expected = 0.01 * ((np.arange(n) // ratio) * ratio)
        assert np.array_equal(out.positions[:, 0, 0], expected)
        deviation = s.positions[:, 0, 0] - out.positions[:, 0, 0]
        assert np.max(deviation) == pytest.approx(0.01 * (ratio - 1))


class TestOcclusion:
    def test_zero_prob_identity(self):
        s = make_stream()
        assert_bit_identical(apply_occlusion(s, 0.0, seed=1), s)

    def test_prob_one_blanks_all(self):
        s = make_stream()
        out = apply_occlusion(s, 1.0, seed=1)
        assert not out.valid.any()
        assert np.all(out.positions == 0.0)

    @pytest.mark.parametrize("prob", [0.01, 0.05])
    def test_occluded_fraction_within_binomial_interval(self, prob):
        n_draws = 100_000
        s = make_stream(n=1000, j=100, seed=3)
        out = apply_occlusion(s, prob, seed=7)
        occluded = int(n_draws - out.valid.sum())
        lo, hi = binom.interval(0.999, n_draws, prob)
        assert lo <= occluded <= hi

    def test_seeded_determinism(self):
        s = make_stream(50, 8)
        a = apply_occlusion(s, 0.2, seed=9)
        b = apply_occlusion(s, 0.2, seed=9)
        assert_bit_identical(a, b)


class TestNoise:
    def test_zero_std_identity(self):
        s = make_stream()
        assert_bit_identical(apply_noise(s, 0.0, seed=2), s)

    def test_seeded_determinism(self):
        s = make_stream()
        assert_bit_identical(apply_noise(s, 0.05, seed=4), apply_noise(s, 0.05, seed=4))

    def test_monte_carlo_statistics(self):
        s = make_stream(n=1000, j=34, seed=5)  # > 1e5 coordinates
        out = apply_noise(s, 0.01, seed=6)
        delta = (out.positions - s.positions).ravel()
        assert delta.size >= 100_000
        assert 0.0099 <= delta.std() <= 0.0101
        assert abs(delta.mean()) <= 1e-4

    def test_invalid_joints_stay_zero(self):
        s = make_stream(6, 3)
        occluded = apply_occlusion(s, 0.5, seed=8)
        noisy = apply_noise(occluded, 0.02, seed=9)
        assert np.all(noisy.positions[~occluded.valid] == 0.0)
        assert np.array_equal(noisy.valid, occluded.valid)


class TestCompose:
    def test_neutral_identity(self):
        s = make_stream()
        out = degrade_stream(s, DegradationConfig(seed=5))
        assert_bit_identical(out, s)

    def test_delay_only_matches_operator(self):
        s = make_stream(12)
        out = degrade_stream(s, DegradationConfig(delay_frames=2, seed=77))
        assert_bit_identical(out, apply_delay(s, 2))

    def test_full_config_matches_manual_chain(self):
        s = make_stream(20, 6)
        config = DegradationConfig(delay_frames=3, fps_ratio=2, noise_std=0.02, occlusion_prob=0.1, seed=123)
        manual = apply_framerate_ratio(s, 2)
        manual = apply_delay(manual, 3)
        manual = apply_occlusion(manual, 0.1, operator_seed(123, 2))
        manual = apply_noise(manual, 0.02, operator_seed(123, 3))
        assert_bit_identical(degrade_stream(s, config), manual)

    def test_invariants_preserved(self):
        s = make_stream(30, 5)
        config = DegradationConfig(delay_frames=4, fps_ratio=3, noise_std=0.01, occlusion_prob=0.2, seed=3)
        out = degrade_stream(s, config)
        assert_frame_invariants(s, out)

    def test_determinism_golden(self):
        # frozen regression pin for the composed operator order and sub-seeds
        positions = np.arange(12, dtype=float).reshape(4, 1, 3) / 100.0
        s = CartesianStream(np.arange(4) / 60.0, positions, np.ones((4, 1), bool), 60.0)
        config = DegradationConfig(delay_frames=1, fps_ratio=2, noise_std=0.01, occlusion_prob=0.3, seed=99)
        out = degrade_stream(s, config)
        expected = np.array(
            [
                [[0.000376240004434718, 0.018245422488529974, 0.022939715006285086]],
                [[-0.002818742552484162, 0.018538623688792825, 0.024036062018907747]],
                [[0.0, 0.0, 0.0]],
                [[0.0, 0.0, 0.0]],
            ]
        )
        assert np.array_equal(out.positions, expected)
        assert np.array_equal(out.valid, [[True], [True], [False], [False]])
        assert_bit_identical(out, degrade_stream(s, config))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DegradationConfig(delay_frames=-1)
        with pytest.raises(ValueError):
            DegradationConfig(fps_ratio=0)
        with pytest.raises(ValueError):
            DegradationConfig(occlusion_prob=1.5)
        with pytest.raises(ValueError):
            DegradationConfig(noise_std=-0.1)


class TestPipelineEstimator:
    def test_transform_matches_functional_form(self):
        s = make_stream(15, 4)
        pipe = DegradationPipeline(delay_frames=2, fps_ratio=2, noise_std=0.01, occlusion_prob=0.05, seed=11)
        out = pipe.fit(None).transform(s)
        assert_bit_identical(out, degrade_stream(s, pipe.config()))

    def test_get_params_round_trip(self):
        pipe = DegradationPipeline(delay_frames=4, noise_std=0.02, seed=7)
        params = pipe.get_params()
        assert params["delay_frames"] == 4
        assert params["noise_std"] == 0.02
        cloned = clone(pipe)
        assert cloned.get_params() == params

    def test_neutral_pipeline_identity(self):
        s = make_stream()
        assert_bit_identical(DegradationPipeline().transform(s), s)
