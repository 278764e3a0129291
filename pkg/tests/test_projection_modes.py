import math

import numpy as np
import pytest

from spadesim import (CustomMode, DegenerateModeError, ModelError,
                      ParameterError, ProbabilityCurves, binary_outcome_fisher,
                      integrate, make_gaussian, make_sinc, make_tabulated,
                      mode_inner_product, optimal_mode, outcome_probabilities,
                      overlap, psf_mode, quantum_fisher)


def gaussian_optimal_closed_form(x, sigma=1.0):
    return ((2 * math.pi) ** -0.25 * sigma**-1.5
            * x * np.exp(-x * x / (4 * sigma**2)))


def sinc_optimal_closed_form(x, w=1.0):
    u = math.pi * x / w
    return math.sqrt(3.0) * (math.sqrt(w) / (math.pi * x) * math.cos(u)
                             - w**1.5 / (math.pi * x) ** 2 * math.sin(u))


class TestOptimalMode:
    def test_gaussian_matches_closed_form(self, gauss):
        mode = optimal_mode(gauss)
        x = np.linspace(-6, 6, 101)
        expected = gaussian_optimal_closed_form(x)
        got = np.asarray(mode.amplitude(x))
        sign = 1.0 if np.dot(got, expected) >= 0 else -1.0
        np.testing.assert_allclose(sign * got, expected, atol=1e-12)

    def test_sinc_matches_closed_form(self, sinc):
        mode = optimal_mode(sinc)
        xs = [0.21, 0.73, 1.4, 2.9, -0.6, -3.3]
        expected = np.array([sinc_optimal_closed_form(x) for x in xs])
        got = np.asarray(mode.amplitude(np.array(xs)))
        sign = 1.0 if np.dot(got, expected) >= 0 else -1.0
        np.testing.assert_allclose(sign * got, expected, rtol=1e-10)

    def test_sinc_mode_vanishes_at_origin(self, sinc):
        assert float(optimal_mode(sinc).amplitude(0.0)) == pytest.approx(0.0, abs=1e-15)

    def test_norm_check(self, gauss, sinc):
        assert optimal_mode(gauss).norm_check == pytest.approx(1.0, abs=1e-8)
        assert optimal_mode(sinc).norm_check == pytest.approx(1.0, abs=1e-8)
        assert psf_mode(gauss).norm_check == pytest.approx(1.0, abs=1e-8)
        assert psf_mode(sinc).norm_check == pytest.approx(1.0, abs=1e-8)

    def test_antisymmetric(self, gauss):
        mode = optimal_mode(gauss)
        x = np.linspace(0.05, 6, 40)
        np.testing.assert_allclose(mode.amplitude(-x), -np.asarray(mode.amplitude(x)),
                                   atol=1e-15)

    def test_degenerate_psf_rejected(self):
        # a flat amplitude has no derivative information
        x = np.linspace(-4, 4, 64)
        flat = make_tabulated(np.column_stack([x, np.full_like(x, 0.35)]))
        with pytest.raises(DegenerateModeError):
            optimal_mode(flat)


class TestOverlap:
    def test_odd_times_even_vanishes(self, gauss, sinc):
        assert overlap(optimal_mode(gauss), gauss, 0.0) == pytest.approx(0.0, abs=1e-10)
        assert overlap(optimal_mode(sinc), sinc, 0.0) == pytest.approx(0.0, abs=1e-10)

    def test_gaussian_closed_form(self, gauss):
        # (s / 2 sigma) exp(-s^2 / 8 sigma^2); brute-force quadrature oracle
        mode = optimal_mode(gauss)
        s = 0.4
        closed = 0.2 * math.exp(-0.02)
        assert closed == pytest.approx(0.19603973466135105, rel=1e-12)
        brute = integrate(
            lambda x: float(mode.amplitude(x)) * float(gauss.amplitude(x - s)),
            -10, 10)
        assert brute == pytest.approx(closed, abs=1e-9)
        assert overlap(mode, gauss, s) == pytest.approx(closed, abs=1e-9)

    def test_psf_mode_unit_overlap(self, gauss, sinc):
        assert overlap(psf_mode(gauss), gauss, 0.0) == pytest.approx(1.0, abs=1e-9)
        assert overlap(psf_mode(sinc), sinc, 0.0) == pytest.approx(1.0, abs=1e-9)

    def test_positive_for_small_positive_shift(self, gauss, sinc):
        assert overlap(optimal_mode(gauss), gauss, 0.05) > 0
        assert overlap(optimal_mode(sinc), sinc, 0.05) > 0

    def test_sinc_frequency_domain_against_closed_form(self, sinc):
        # derived in the band picture: sqrt(3) (sin u - u cos u)/u^2, u = pi s / w
        mode = optimal_mode(sinc)
        for s in (0.15, 0.4, 1.1, 2.7):
            u = math.pi * s
            closed = math.sqrt(3.0) * (math.sin(u) - u * math.cos(u)) / u**2
            assert overlap(mode, sinc, s) == pytest.approx(closed, abs=1e-10)
        u = math.pi * 0.4
        assert (math.sqrt(3.0) * (math.sin(u) - u * math.cos(u)) / u**2
                == pytest.approx(0.6172261153795997, rel=1e-12))


class TestOrthogonality:
    def test_builtin_pairs(self, gauss, sinc):
        assert mode_inner_product(psf_mode(gauss),
                                  optimal_mode(gauss)) == pytest.approx(0.0, abs=1e-8)
        assert mode_inner_product(psf_mode(sinc),
                                  optimal_mode(sinc)) == pytest.approx(0.0, abs=1e-8)


class TestOutcomeProbabilities:
    def test_gaussian_closed_form(self, gauss):
        modes = [psf_mode(gauss), optimal_mode(gauss)]
        delta = 0.8
        probs = outcome_probabilities(gauss, modes, delta)
        u = delta**2 / 16.0
        assert probs.p_a == pytest.approx(u * math.exp(-u), abs=1e-9)
        assert probs.p_0 == pytest.approx(math.exp(-u), abs=1e-9)
        assert probs.p_a + probs.p_0 + probs.p_lost == pytest.approx(1.0, abs=1e-9)

    def test_coincident_sources(self, gauss):
        modes = [psf_mode(gauss), optimal_mode(gauss)]
        probs = outcome_probabilities(gauss, modes, 0.0)
        assert probs.p_a == pytest.approx(0.0, abs=1e-12)
        assert probs.p_0 == pytest.approx(1.0, abs=1e-9)
        assert probs.p_lost == pytest.approx(0.0, abs=1e-9)

    def test_sinc_smallest_step(self, sinc):
        # frozen oracle from the band-picture closed form
        modes = [psf_mode(sinc), optimal_mode(sinc)]
        probs = outcome_probabilities(sinc, modes, 0.067)
        assert 0.0 < probs.p_a < 1.0
        assert probs.p_a == pytest.approx(0.00368388351367457, abs=1e-10)
        assert probs.p_0 == pytest.approx(0.9963133936819174, abs=1e-10)

    def test_non_orthogonal_modes_rejected(self, gauss):
        # an off-center PSF mode is not orthogonal to the antisymmetric mode
        base = make_gaussian(1.0)
        x = np.linspace(-7, 9, 512)
        shifted = make_tabulated(
            np.column_stack([x, np.asarray(base.amplitude(x - 1.0))]))
        with pytest.raises(ModelError):
            outcome_probabilities(gauss, [psf_mode(shifted), optimal_mode(gauss)], 0.4)

    def test_wrong_mode_set_rejected(self, gauss):
        with pytest.raises(ParameterError):
            outcome_probabilities(gauss, [psf_mode(gauss)], 0.4)
        custom = CustomMode(lambda x: np.exp(-x * x), 6.0, normalize=True)
        with pytest.raises(ParameterError):
            outcome_probabilities(gauss, [psf_mode(gauss), custom], 0.4)

    def test_negative_delta_rejected(self, gauss):
        modes = [psf_mode(gauss), optimal_mode(gauss)]
        with pytest.raises(ParameterError):
            outcome_probabilities(gauss, modes, -0.1)


class TestProbabilityCurves:
    def test_matches_quadrature_route(self, gauss, sinc):
        for psf in (gauss, sinc):
            curves = ProbabilityCurves(psf)
            modes = [psf_mode(psf), optimal_mode(psf)]
            for delta in (0.1, 0.5, 1.2):
                probs = outcome_probabilities(psf, modes, delta)
                assert curves.p_a(delta) == pytest.approx(probs.p_a, abs=1e-9)
                assert curves.p_0(delta) == pytest.approx(probs.p_0, abs=1e-9)

    def test_small_separation_law(self, gauss, sinc):
        # p_a = FI * delta^2 / 4 + O(delta^4)
        for psf in (gauss, sinc):
            curves = ProbabilityCurves(psf)
            delta = 1e-3 * psf.width
            expected = quantum_fisher(psf) * delta**2 / 4.0
            assert curves.p_a(delta) == pytest.approx(expected, rel=1e-3)

    def test_gaussian_peak(self, gauss):
        assert ProbabilityCurves(gauss).delta_peak == pytest.approx(4.0, rel=1e-9)

    def test_sinc_peak_is_stationary(self, sinc):
        curves = ProbabilityCurves(sinc)
        assert curves.delta_peak == pytest.approx(1.3251724251643848, rel=1e-9)
        peak = curves.p_a(curves.delta_peak)
        assert peak >= curves.p_a(curves.delta_peak - 1e-4)
        assert peak >= curves.p_a(curves.delta_peak + 1e-4)

    def test_monotone_below_peak(self, gauss, sinc):
        for psf in (gauss, sinc):
            curves = ProbabilityCurves(psf)
            grid = np.linspace(0.0, curves.delta_peak, 200)
            vals = [curves.p_a(float(d)) for d in grid]
            assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_generic_psf_falls_back_to_quadrature(self):
        base = make_gaussian(1.0)
        x = np.linspace(-8, 8, 512)
        tab = make_tabulated(np.column_stack([x, np.asarray(base.amplitude(x))]))
        curves = ProbabilityCurves(tab)
        assert curves.p_a(0.4) == pytest.approx(ProbabilityCurves(base).p_a(0.4),
                                                rel=1e-3)
        assert curves.delta_peak == pytest.approx(4.0, rel=1e-2)


class TestBinaryOutcomeFisher:
    def test_limit_is_quantum_fisher(self, gauss):
        # closed-form p_a gives FI -> 0.25 as delta -> 0
        assert binary_outcome_fisher(gauss, 1e-3) == pytest.approx(0.25, rel=5e-3)

    def test_moderate_separation(self, gauss):
        val = binary_outcome_fisher(gauss, 0.2)
        assert val <= 0.25 * (1 + 1e-6)
        assert val == pytest.approx(0.25, rel=2e-2)

    def test_bounded_by_quantum(self, gauss, sinc):
        for psf in (gauss, sinc):
            fq = quantum_fisher(psf)
            for delta in np.arange(0.1, 2.0, 0.2):
                assert binary_outcome_fisher(psf, float(delta)) <= fq * (1 + 1e-6)

    def test_tiny_separation_returns_analytic_limit(self, gauss):
        assert binary_outcome_fisher(gauss, 1e-8) == quantum_fisher(gauss)

    def test_nonpositive_delta_rejected(self, gauss):
        with pytest.raises(ParameterError):
            binary_outcome_fisher(gauss, 0.0)
