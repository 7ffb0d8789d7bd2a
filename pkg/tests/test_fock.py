import math

import numpy as np
import pytest

from phasesynth import fock
from phasesynth.phase import canonical_density


def random_state(rng, dim):
    c = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return fock.FockVector(c / np.linalg.norm(c))


class TestFockVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            fock.FockVector(np.array([1.0, 1.0]))

    def test_cutoff_and_length(self):
        state = fock.number_state(2, cutoff=5)
        assert state.cutoff == 5
        assert state.amplitudes.size == 6

    def test_constructors_normalized(self):
        states = [
            fock.coherent_state(0.5 + 0.2j, 12),
            fock.squeezed_state(fock.SqueezedParams.from_t(0.5, 1.1), 25),
            fock.binomial_state(7),
            fock.number_state(3),
        ]
        for state in states:
            assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) < 1e-9


class TestCoherent:
    def test_vacuum(self):
        state = fock.coherent_state(0.0, 3)
        assert np.allclose(state.amplitudes, [1, 0, 0, 0])

    def test_vacuum_amplitude_weak_field(self):
        # |alpha|^2 = 0.076: c_0 = exp(-0.038) before renormalization
        state = fock.coherent_state(math.sqrt(0.076), 6)
        norm_free_c0 = math.exp(-0.038)
        assert abs(norm_free_c0 - 0.9627129408911995) < 1e-12
        # after renormalization over 0..6 the value only moves at the tail scale
        assert abs(state.amplitudes[0].real - norm_free_c0) < 1e-9

    def test_mean_photon(self):
        state = fock.coherent_state(math.sqrt(0.5), 8)
        assert abs(fock.mean_photon(state) - 0.5) < 1e-6

    def test_tail_guard(self):
        with pytest.raises(ValueError):
            fock.coherent_state(3.0, 4)

    def test_complex_alpha_phases(self):
        state = fock.coherent_state(0.4 * np.exp(1j * 0.7), 10)
        ref = fock.phase_shift(fock.coherent_state(0.4, 10), 0.7)
        assert np.allclose(state.amplitudes, ref.amplitudes, atol=1e-12)


class TestSqueezed:
    def test_zero_squeezing_is_coherent(self):
        params = fock.SqueezedParams(alpha=0.3, zeta_mag=0.0)
        state = fock.squeezed_state(params, 8)
        ref = fock.coherent_state(0.3, 8)
        assert np.allclose(state.amplitudes, ref.amplitudes, atol=1e-12)

    def test_binomial_matching_ratios(self):
        # t = 0.5, alpha = (2 + sqrt 2)/3 matches the top three binomial
        # coefficients exactly; the vacuum coefficient comes out 1.0146x.
        params = fock.binomial_matching_params(3)
        state = fock.squeezed_state(params, 20)
        c = state.amplitudes
        assert abs(abs(c[1] / c[3]) - math.sqrt(3)) < 1e-12
        assert abs(abs(c[2] / c[3]) - math.sqrt(3)) < 1e-12
        assert abs(abs(c[0] / c[3]) - 1.0146) < 5e-4

    def test_squeezed_vacuum_quadrature(self):
        state = fock.squeezed_state(fock.SqueezedParams.from_t(0.5, 0.0), 40)
        vacuum_var = 0.25
        ratios = [fock.quadrature_variance(state, a) / vacuum_var
                  for a in (0.0, math.pi / 2)]
        assert abs(min(ratios) - 1.0 / 3.0) < 1e-9

    def test_regime_one_matching(self):
        # t = 0.5, alpha = (2/3) sqrt(N): early coefficients proportional to
        # square roots of binomial coefficients within 2 percent.
        N = 25
        params = fock.SqueezedParams.from_t(0.5, (2.0 / 3.0) * math.sqrt(N))
        state = fock.squeezed_state(params, 60)
        c = state.amplitudes
        for n in range(5):
            ratio = abs(c[n] / c[0]) / math.sqrt(math.comb(N, n))
            assert abs(ratio - 1.0) < 0.02

    def test_rejects_t_at_one(self):
        with pytest.raises(ValueError):
            fock.SqueezedParams.from_t(1.0)

    def test_tail_guard(self):
        with pytest.raises(ValueError):
            fock.squeezed_state(fock.binomial_matching_params(3), 4)


class TestBinomial:
    def test_vacuum(self):
        assert np.allclose(fock.binomial_state(0).amplitudes, [1.0])

    def test_n3(self):
        expect = np.array([1, math.sqrt(3), math.sqrt(3), 1]) / math.sqrt(8)
        assert np.allclose(fock.binomial_state(3).amplitudes, expect, atol=1e-15)

    def test_n1(self):
        assert np.allclose(fock.binomial_state(1).amplitudes,
                           np.array([1, 1]) / math.sqrt(2), atol=1e-15)

    def test_symmetry(self):
        for N in (2, 5, 9):
            amps = fock.binomial_state(N).amplitudes.real
            assert np.allclose(amps, amps[::-1], atol=1e-15)


class TestPhaseShift:
    def test_identity(self):
        state = fock.binomial_state(3)
        assert np.allclose(fock.phase_shift(state, 0.0).amplitudes, state.amplitudes)

    def test_pi_alternates_signs(self):
        shifted = fock.phase_shift(fock.binomial_state(3), math.pi)
        signs = np.sign(shifted.amplitudes.real)
        assert list(signs) == [1, -1, 1, -1]

    def test_two_pi_periodicity(self):
        state = fock.binomial_state(3)
        shifted = fock.phase_shift(state, 2 * math.pi)
        assert np.max(np.abs(shifted.amplitudes - state.amplitudes)) < 1e-15

    def test_preserves_moduli(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            state = random_state(rng, 6)
            theta = rng.uniform(0, 2 * math.pi)
            shifted = fock.phase_shift(state, theta)
            assert np.allclose(np.abs(shifted.amplitudes), np.abs(state.amplitudes),
                               atol=1e-14)

    def test_shifts_canonical_distribution(self):
        rng = np.random.default_rng(1)
        state = random_state(rng, 5)
        delta = 0.8
        thetas = rng.uniform(0, 2 * math.pi, size=16)
        shifted_vals = canonical_density(fock.phase_shift(state, delta), thetas)
        ref_vals = canonical_density(state, thetas - delta)
        assert np.max(np.abs(shifted_vals - ref_vals)) < 1e-12


class TestHermite:
    def test_order_zero(self):
        for x in (0.0, 1.5, -7.0):
            assert fock.hermite(0, x) == 1.0

    def test_cubic(self):
        x = 1.70711
        assert abs(fock.hermite(3, x) - (8 * x ** 3 - 12 * x)) < 1e-10

    def test_large_argument_leading_terms(self):
        x = 10.0
        approx = (2 * x) ** 5 - 5 * 4 * (2 * x) ** 3
        assert abs(fock.hermite(5, x) - approx) / fock.hermite(5, x) < 0.003

    def test_recurrence_exact_integers(self):
        # H_{n+1} = 2 x H_n - 2 n H_{n-1} holds exactly for small integer cases
        for x in (0, 1, 2, 3):
            for n in range(1, 8):
                lhs = fock.hermite(n + 1, float(x))
                rhs = 2 * x * fock.hermite(n, float(x)) - 2 * n * fock.hermite(n - 1, float(x))
                assert lhs == rhs


class TestEnsemble:
    def test_weight_validation(self):
        member = fock.number_state(0)
        with pytest.raises(ValueError):
            fock.StateEnsemble(((0.5, member), (0.6, member)))

    def test_accepts_unit_weights(self):
        ens = fock.StateEnsemble(((0.25, fock.number_state(0)),
                                  (0.75, fock.number_state(1))))
        assert len(ens.members) == 2
