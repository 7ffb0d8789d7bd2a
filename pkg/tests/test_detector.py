import math
import warnings

import numpy as np
import pytest

from phasesynth import detector as det


def point_mass(counts, num=4, cutoff=None):
    cutoff = cutoff if cutoff is not None else max(counts)
    return det.JointCountDistribution(num, {tuple(counts): 1.0}, cutoff)


def random_distribution(rng, cutoff, num=4):
    arr = rng.random((cutoff + 1,) * num)
    arr /= arr.sum()
    return det.JointCountDistribution.from_array(arr)


class TestCategorize:
    @pytest.mark.parametrize("count,expect", [
        (0, det.CountClass.ZERO),
        (1, det.CountClass.ONE),
        (2, det.CountClass.MANY),
        (3, det.CountClass.MANY),
        (17, det.CountClass.MANY),
    ])
    def test_classes(self, count, expect):
        assert det.categorize(count) is expect

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            det.categorize(-1)


class TestModel:
    def test_range_check(self):
        with pytest.raises(ValueError):
            det.DetectorModel(1.2)
        with pytest.raises(ValueError):
            det.DetectorModel((-0.1, 0.5, 0.5, 0.5))

    def test_uniform_expansion(self):
        assert det.DetectorModel(0.7).etas_for(4) == (0.7,) * 4

    def test_per_detector_values(self):
        model = det.DetectorModel((0.9, 0.8, 0.7, 0.6))
        assert model.etas_for(4) == (0.9, 0.8, 0.7, 0.6)
        assert not model.is_ideal


class TestApplyEfficiency:
    def test_identity_at_unit_efficiency(self):
        rng = np.random.default_rng(0)
        dist = random_distribution(rng, 3)
        out = det.apply_efficiency(dist, det.DetectorModel(1.0))
        assert out is dist

    def test_desired_event_attenuated_by_eta_cubed(self):
        dist = point_mass((0, 1, 1, 1))
        for eta in (0.3, 0.6, 0.9):
            out = det.apply_efficiency(dist, det.DetectorModel(eta))
            assert abs(out.prob((0, 1, 1, 1)) - eta ** 3) < 1e-12

    def test_leakage_from_four_ones(self):
        dist = point_mass((1, 1, 1, 1))
        eta = 0.75
        out = det.apply_efficiency(dist, det.DetectorModel(eta))
        assert abs(out.prob((0, 1, 1, 1)) - eta ** 3 * (1 - eta)) < 1e-12

    def test_mass_preserved(self):
        rng = np.random.default_rng(1)
        dist = random_distribution(rng, 4)
        out = det.apply_efficiency(dist, det.DetectorModel(0.55))
        assert abs(out.total() - dist.total()) < 1e-12

    def test_all_detected_term_monotone(self):
        # P_c(pattern) >= eta^{|pattern|} P_I(pattern): the direct term plus
        # non-negative leakage from higher counts
        rng = np.random.default_rng(2)
        dist = random_distribution(rng, 3)
        eta = 0.8
        out = det.apply_efficiency(dist, det.DetectorModel(eta))
        for pattern, p in dist.probs.items():
            assert out.prob(pattern) >= eta ** sum(pattern) * p - 1e-15


class TestInvertEfficiency:
    def test_identity_at_unit_efficiency(self):
        rng = np.random.default_rng(3)
        dist = random_distribution(rng, 3)
        assert det.invert_efficiency(dist, det.DetectorModel(1.0)) is dist

    @pytest.mark.parametrize("eta", [0.5, 0.7, 0.9])
    def test_round_trip(self, eta):
        rng = np.random.default_rng(4)
        dist = random_distribution(rng, 6, num=2)
        model = det.DetectorModel(eta)
        back = det.invert_efficiency(det.apply_efficiency(dist, model), model)
        assert np.max(np.abs(back.to_array() - dist.to_array())) < 1e-9

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_round_trip_four_detectors(self):
        rng = np.random.default_rng(5)
        dist = random_distribution(rng, 4)
        model = det.DetectorModel(0.7)
        back = det.invert_efficiency(det.apply_efficiency(dist, model), model)
        assert np.max(np.abs(back.to_array() - dist.to_array())) < 1e-9

    def test_two_level_closed_form(self):
        # single detector, mass p on one photon: counted (1 - eta p, eta p)
        # inverts back to (1 - p, p)
        p, eta = 0.37, 0.7
        counted = det.JointCountDistribution(1, {(0,): 1 - eta * p, (1,): eta * p}, 1)
        back = det.invert_efficiency(counted, det.DetectorModel(eta))
        assert abs(back.prob((1,)) - p) < 1e-12
        assert abs(back.prob((0,)) - (1 - p)) < 1e-12

    def test_low_efficiency_rejected(self):
        dist = point_mass((0, 1, 1, 1))
        with pytest.raises(ValueError):
            det.invert_efficiency(dist, det.DetectorModel(0.25))

    def test_cancellation_warning(self):
        # a high count column inverted at modest efficiency: the true value of
        # intermediate cells is ~0 while the alternating terms are large
        dist = det.JointCountDistribution(1, {(0,): 0.5, (12,): 0.5}, 12)
        counted = det.apply_efficiency(dist, det.DetectorModel(0.35))
        with pytest.warns(RuntimeWarning):
            det.invert_efficiency(counted, det.DetectorModel(0.35))

    def test_closed_form_matches_matrix_inverse(self):
        for eta in (0.5, 0.8):
            b = det._bernoulli_matrix(eta, 6)
            v = det._inverse_bernoulli_matrix(eta, 6)
            assert np.max(np.abs(v - np.linalg.inv(b))) < 1e-8


class TestUniformScalingCancellation:
    def test_eta_cubed_scaling_drops_out_of_normalization(self):
        from phasesynth.phase import normalize_counts
        rng = np.random.default_rng(6)
        p = rng.random(4) * 0.01
        eta = 0.77
        assert np.allclose(normalize_counts(p), normalize_counts(eta ** 3 * p), atol=1e-15)


class TestSerialization:
    def test_json_round_trip(self):
        rng = np.random.default_rng(7)
        dist = random_distribution(rng, 2)
        again = det.JointCountDistribution.from_json(dist.to_json())
        assert again.probs == dist.probs
