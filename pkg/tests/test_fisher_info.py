import math

import numpy as np
import pytest

from spadesim import (ParameterError, classical_fisher_exact,
                      classical_fisher_smalld, fisher_report, make_gaussian,
                      make_sinc, make_tabulated, pixelated_classical_fisher,
                      qcrlb, quantum_fisher)


class TestQuantumFisher:
    def test_gaussian_closed_form(self):
        psf = make_gaussian(0.05)
        assert quantum_fisher(psf) == pytest.approx(100.0, rel=1e-6)

    def test_sinc_closed_form(self, sinc):
        assert quantum_fisher(sinc) == pytest.approx(math.pi**2 / 3.0, rel=1e-6)

    def test_tabulated_copy_of_gaussian(self):
        base = make_gaussian(1.0)
        x = np.linspace(-8, 8, 512)
        psf = make_tabulated(np.column_stack([x, np.asarray(base.amplitude(x))]))
        assert quantum_fisher(psf) == pytest.approx(0.25, abs=1e-3)

    def test_translation_invariance(self):
        base = make_gaussian(1.0)
        x = np.linspace(-7, 9, 512)
        shifted = make_tabulated(
            np.column_stack([x, np.asarray(base.amplitude(x - 1.0))]))
        assert quantum_fisher(shifted) == pytest.approx(0.25, rel=1e-3)

    def test_sign_flip_invariance(self):
        base = make_gaussian(1.0)
        x = np.linspace(-8, 8, 512)
        flipped = make_tabulated(
            np.column_stack([x, -np.asarray(base.amplitude(x))]))
        assert quantum_fisher(flipped) == pytest.approx(0.25, rel=1e-3)

    def test_scale_covariance(self):
        assert (quantum_fisher(make_gaussian(1.0))
                == pytest.approx(4.0 * quantum_fisher(make_gaussian(2.0)), rel=1e-9))


class TestQcrlb:
    def test_gaussian_single_photon(self, gauss):
        assert qcrlb(gauss, 1) == pytest.approx(4.0, rel=1e-9)

    def test_photon_scaling(self, gauss):
        assert qcrlb(gauss, 100) == pytest.approx(0.04, rel=1e-9)

    def test_sinc_single_photon(self, sinc):
        assert qcrlb(sinc, 1) == pytest.approx(3.0 / math.pi**2, rel=1e-9)

    def test_bad_photon_count(self, gauss):
        with pytest.raises(ParameterError):
            qcrlb(gauss, 0)


class TestClassicalExact:
    def test_zero_separation_is_zero(self, gauss, sinc):
        assert classical_fisher_exact(gauss, 0.0) == 0.0
        assert classical_fisher_exact(sinc, 0.0) == 0.0

    def test_small_separation_matches_quadratic_law(self, gauss):
        # two independent code paths agree at delta = 0.1 sigma within 1%
        delta = 0.1
        law = classical_fisher_smalld(gauss)
        exact = classical_fisher_exact(gauss, delta)
        assert exact == pytest.approx(law.coefficient * delta**2, rel=1e-2)

    def test_large_separation_reaches_quantum_limit(self, gauss):
        assert classical_fisher_exact(gauss, 20.0) == pytest.approx(0.25, abs=1e-3)

    def test_never_exceeds_quantum(self, gauss):
        fq = quantum_fisher(gauss)
        for delta in np.arange(0.1, 2.01, 0.1):
            fcl = classical_fisher_exact(gauss, float(delta))
            assert 0.0 <= fcl <= fq * (1 + 1e-6)

    def test_quadratic_limit_ratio(self, gauss):
        c = classical_fisher_smalld(gauss).coefficient
        for frac in (0.01, 0.02, 0.05):
            ratio = classical_fisher_exact(gauss, frac) / frac**2
            assert ratio == pytest.approx(c, rel=1e-2)

    def test_negative_delta_rejected(self, gauss):
        with pytest.raises(ParameterError):
            classical_fisher_exact(gauss, -0.1)


class TestSmallSeparationLaw:
    def test_gaussian_coefficient(self, gauss):
        # analytic value 1/(8 sigma^4)
        law = classical_fisher_smalld(gauss)
        assert not law.divergent
        assert law.coefficient == pytest.approx(0.125, rel=1e-6)

    def test_scale_covariance(self):
        # c carries units length^-4
        c1 = classical_fisher_smalld(make_gaussian(1.0)).coefficient
        c2 = classical_fisher_smalld(make_gaussian(2.0)).coefficient
        assert c2 == pytest.approx(c1 / 16.0, rel=1e-6)

    def test_sinc_divergence_flag(self, sinc):
        assert classical_fisher_smalld(sinc).divergent


class TestPixelated:
    def test_fine_grid_matches_exact(self, gauss):
        exact = classical_fisher_exact(gauss, 1.0)
        pix = pixelated_classical_fisher(gauss, 1.0, pixel_width=0.01, n_pixels=3200)
        assert pix == pytest.approx(exact, rel=1e-3)

    def test_single_pixel_no_information(self, gauss):
        assert pixelated_classical_fisher(gauss, 0.5, pixel_width=40.0,
                                          n_pixels=1) == pytest.approx(0.0, abs=1e-15)

    def test_refinement_never_decreases(self, gauss):
        # data-processing inequality under pixel refinement
        gen = np.random.default_rng(7)
        for _ in range(10):
            delta = float(gen.uniform(0.1, 2.0))
            n = int(gen.integers(64, 256))
            width = float(gen.uniform(18.0, 26.0)) / n
            coarse = pixelated_classical_fisher(gauss, delta, width, n)
            fine = pixelated_classical_fisher(gauss, delta, width / 2, 2 * n)
            assert fine >= coarse - 1e-12

    def test_coverage_violation(self, gauss):
        with pytest.raises(ParameterError):
            pixelated_classical_fisher(gauss, 0.5, pixel_width=0.1, n_pixels=10)


class TestFisherReport:
    def test_report_fields(self, gauss):
        report = fisher_report(gauss, deltas=[0.2, 0.4])
        assert report.quantum_fi_per_photon == pytest.approx(0.25, rel=1e-9)
        assert report.qcrlb_per_photon == pytest.approx(4.0, rel=1e-9)
        assert len(report.classical_fi_exact) == 2
        d0, f0 = report.classical_fi_exact[0]
        assert d0 == 0.2
        assert 0.0 < f0 < report.quantum_fi_per_photon
