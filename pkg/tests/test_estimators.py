import math

import numpy as np
import pytest

from spadesim import (CcdFrame, DataError, ProbabilityCurves,
                      ProjectionOutcome, RngStream, SceneConfig, aggregate,
                      ccd_pixel_probabilities, default_ccd_edges,
                      estimate_direct_mle, estimate_from_projection,
                      make_gaussian, qcrlb, simulate_ccd, simulate_projection)


def outcome_with_ratio(f_a, total=10**12):
    """Synthetic outcome whose frequency approximates f_a to ~1/total."""
    n_a = round(f_a * total)
    n_0 = total - n_a
    return ProjectionOutcome(n_0=n_0, n_a=n_a, n_lost=0,
                             recovered_0=n_0, recovered_a=n_a)


class TestProjectionInversion:
    def test_zero_count_inverts_to_zero(self, gauss):
        out = ProjectionOutcome(n_0=100, n_a=0, n_lost=0,
                                recovered_0=100, recovered_a=0)
        rec = estimate_from_projection(out, gauss)
        assert rec.delta_hat == 0.0
        assert not rec.clamped

    def test_noiseless_round_trip(self, gauss):
        curves = ProbabilityCurves(gauss)
        delta = 0.4
        rec = estimate_from_projection(
            outcome_with_ratio(curves.conditional(delta)), gauss, curves)
        assert rec.delta_hat == pytest.approx(delta, abs=1e-6)

    def test_round_trip_across_branch(self, gauss):
        curves = ProbabilityCurves(gauss)
        for delta in np.linspace(0.05, curves.delta_peak - 0.05, 25):
            rec = estimate_from_projection(
                outcome_with_ratio(curves.conditional(float(delta))), gauss, curves)
            assert abs(rec.delta_hat - delta) <= 1e-6

    def test_beyond_branch_clamps(self, gauss):
        curves = ProbabilityCurves(gauss)
        rec = estimate_from_projection(outcome_with_ratio(0.99, total=100),
                                       gauss, curves)
        assert rec.delta_hat == curves.delta_peak
        assert rec.clamped

    def test_zero_denominator(self, gauss):
        out = ProjectionOutcome(n_0=0, n_a=0, n_lost=5,
                                recovered_0=0, recovered_a=0)
        with pytest.raises(DataError):
            estimate_from_projection(out, gauss)


class TestDirectMle:
    def test_noiseless_expected_counts(self, gauss):
        # self-consistency: MLE at the truth when the frame holds the
        # expected counts
        delta = 2.0
        edges = default_ccd_edges(gauss)
        q = ccd_pixel_probabilities(gauss, delta, edges)
        counts = np.round(1e7 * q).astype(np.int64)
        rec = estimate_direct_mle(CcdFrame(pixel_edges=edges, counts=counts), gauss)
        assert rec.delta_hat == pytest.approx(delta, abs=1e-4)

    def test_zero_separation_piles_near_zero(self, gauss):
        # Monte Carlo oracle, qualitative: median over 500 trials below 0.5
        scene = SceneConfig(delta_true=0.0, psf=gauss, photon_budget=100_000)
        edges = default_ccd_edges(gauss)
        hats = []
        for t in range(500):
            frame = simulate_ccd(scene, edges, RngStream(71, t))
            hats.append(estimate_direct_mle(frame, gauss).delta_hat)
        assert np.median(hats) < 0.5

    def test_mirrored_frame_same_estimate(self, gauss):
        scene = SceneConfig(delta_true=0.9, psf=gauss, photon_budget=50_000)
        edges = default_ccd_edges(gauss)
        frame = simulate_ccd(scene, edges, RngStream(73, 0))
        mirrored = CcdFrame(pixel_edges=edges, counts=frame.counts[::-1].copy())
        a = estimate_direct_mle(frame, gauss)
        b = estimate_direct_mle(mirrored, gauss)
        assert a.delta_hat == pytest.approx(b.delta_hat, abs=1e-9)

    def test_empty_frame(self, gauss):
        edges = default_ccd_edges(gauss)
        frame = CcdFrame(pixel_edges=edges,
                         counts=np.zeros(len(edges) - 1, dtype=np.int64))
        with pytest.raises(DataError):
            estimate_direct_mle(frame, gauss)


class TestAggregate:
    def _records(self, values):
        from spadesim.estimators import EstimateRecord
        return [EstimateRecord(delta_hat=v, method="projection", trial_id=i)
                for i, v in enumerate(values)]

    def test_identical_records(self):
        stats = aggregate(self._records([0.4] * 10), 0.4, qcrlb=1.0)
        assert stats.bias == 0.0
        assert stats.mse == 0.0

    def test_symmetric_pair(self):
        stats = aggregate(self._records([0.0, 0.8]), 0.4, qcrlb=1.0)
        assert stats.bias == pytest.approx(0.0, abs=1e-15)
        assert stats.mse == pytest.approx(0.16, rel=1e-12)

    def test_mse_identity(self, rng):
        values = rng.normal(0.5, 0.1, 37)
        stats = aggregate(self._records(values), 0.45, qcrlb=2.0)
        n = stats.n_trials
        recomposed = stats.bias**2 + stats.std**2 * (n - 1) / n
        assert stats.mse == pytest.approx(recomposed, rel=1e-12)
        assert stats.mse_over_qcrlb == pytest.approx(stats.mse / 2.0, rel=1e-12)

    def test_too_few_records(self):
        with pytest.raises(DataError):
            aggregate(self._records([0.4]), 0.4, qcrlb=1.0)


class TestStatisticalBehavior:
    def _projection_mse(self, gauss, delta, n_photons, n_trials, seed):
        curves = ProbabilityCurves(gauss)
        scene = SceneConfig(delta_true=delta, psf=gauss, photon_budget=n_photons)
        probs = curves.probabilities(delta)
        records = []
        for t in range(n_trials):
            out = simulate_projection(scene, probs, None, RngStream(seed, t))
            records.append(estimate_from_projection(out, gauss, curves, trial_id=t))
        return aggregate(records, delta, qcrlb(gauss, n_photons))

    def test_bound_attainable_at_moderate_separation(self, gauss):
        stats = self._projection_mse(gauss, 0.4, 100_000, 500, seed=81)
        assert 0.7 <= stats.mse_over_qcrlb <= 1.5

    def test_mse_non_increasing_in_photon_budget(self, gauss):
        # allow 2-sigma statistical slack on each step
        mses = [self._projection_mse(gauss, 0.4, n, 500, seed=83).mse
                for n in (1_000, 10_000, 100_000)]
        slack = [m * 2.0 * math.sqrt(2.0 / 500) for m in mses]
        assert mses[1] <= mses[0] + slack[0]
        assert mses[2] <= mses[1] + slack[1]

    def test_negligible_bias_at_moderate_separations(self, gauss):
        for delta in (0.4, 2.0):
            stats = self._projection_mse(gauss, delta, 100_000, 500, seed=89)
            assert abs(stats.bias) <= 3.0 * stats.std / math.sqrt(stats.n_trials)
