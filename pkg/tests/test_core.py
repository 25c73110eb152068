import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mbm_dmt import (Constellation, InsufficientDataError, RngSpec, SimEstimate, SnrSpec,
                     estimate_diversity_slope, ml_detect, pep_exact, rate_schedule,
                     sample_constellation, simulate_ser, simulate_ser_conditional, transmit)
from mbm_dmt.montecarlo import plan_blocks, substream


class TestTypes:
    def test_constellation_validation(self):
        with pytest.raises(ValueError):
            Constellation(np.zeros((1, 4)))
        with pytest.raises(ValueError):
            Constellation(np.zeros((4, 3)))
        with pytest.raises(ValueError):
            Constellation(np.zeros(8))

    def test_constellation_is_read_only(self):
        const = Constellation(np.ones((4, 2)))
        with pytest.raises(ValueError):
            const.gains[0, 0] = 2.0
        assert (const.m_count, const.dims, const.n_r) == (4, 2, 1)
        assert np.allclose(const.energies(), 2.0)

    def test_snr_spec(self):
        s = SnrSpec(20.0)
        assert s.c == 10.0
        assert SnrSpec.from_db(10.0).snr == pytest.approx(10.0)
        for bad in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                SnrSpec(bad)

    def test_rng_spec(self):
        with pytest.raises(ValueError):
            RngSpec(-1)
        with pytest.raises(ValueError):
            RngSpec(0, -2)
        assert RngSpec(3, 1).child(5) == RngSpec(3, 5)

    def test_sim_estimate_binomial(self):
        est = SimEstimate.from_counts(25, 1000, 10)
        assert est.error_rate == 0.025
        assert est.errors <= est.trials
        assert est.ci95_halfwidth == pytest.approx(1.96 * math.sqrt(0.025 * 0.975 / 1000))


class TestSampling:
    def test_moments(self):
        g = sample_constellation(125_000, 8, RngSpec(5)).gains
        assert abs(g.mean()) < 0.005
        assert abs(g.var() - 1.0) < 0.01

    def test_deterministic(self):
        a = sample_constellation(16, 4, RngSpec(9, 2)).gains
        b = sample_constellation(16, 4, RngSpec(9, 2)).gains
        c = sample_constellation(16, 4, RngSpec(9, 3)).gains
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            sample_constellation(1, 4, RngSpec())
        with pytest.raises(ValueError):
            sample_constellation(4, 5, RngSpec())


class TestTransmit:
    def test_vanishing_snr_is_pure_noise(self):
        const = sample_constellation(4, 4, RngSpec(1))
        gen = np.random.default_rng(0)
        y = np.array([transmit(const, 1, 1e-12, gen) for _ in range(100_000)])
        assert np.mean(y ** 2) == pytest.approx(1.0, abs=0.01)

    def test_deterministic_vector(self):
        const = Constellation(np.ones((2, 6)))
        rng = RngSpec(42)
        y = transmit(const, 0, SnrSpec(4.0), rng)
        z = substream(rng).standard_normal(6)
        assert np.array_equal(y, 2.0 * np.ones(6) + z)

    def test_receive_energy(self):
        const = sample_constellation(64, 8, RngSpec(3))
        gen = np.random.default_rng(1)
        m = gen.integers(0, 64, size=100_000)
        y = np.array([transmit(const, int(k), 10.0, gen) for k in m])
        # ensemble-averaged gain energy is 1 per dimension; use this draw's empirical value
        expected = 10.0 * const.energies()[m].mean() / 8 + 1.0
        assert np.mean(np.sum(y ** 2, axis=1)) / 8 == pytest.approx(expected, rel=0.02)
        assert np.mean(np.sum(y ** 2, axis=1)) / 8 == pytest.approx(11.0, rel=0.1)

    def test_index_range(self):
        const = sample_constellation(4, 2, RngSpec())
        with pytest.raises(IndexError):
            transmit(const, 4, 1.0, RngSpec())


class TestDetection:
    def test_noise_free_recovery(self):
        const = sample_constellation(8, 4, RngSpec(11))
        y = math.sqrt(5.0) * const.gains[3]
        assert ml_detect(const, y, 5.0) == 3

    def test_tie_goes_to_lower_index(self):
        g = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [-1.0, 0.0]])
        const = Constellation(g)
        assert ml_detect(const, np.array([0.0, 2.0]), 4.0) == 1

    def test_batch(self):
        const = sample_constellation(8, 4, RngSpec(2))
        y = 3.0 * const.gains[[5, 0, 7]]
        assert list(ml_detect(const, y, 9.0)) == [5, 0, 7]

    def test_wrong_length(self):
        const = sample_constellation(4, 4, RngSpec())
        with pytest.raises(ValueError):
            ml_detect(const, np.zeros(3), 1.0)

    @given(arrays(np.float64, (6, 4), elements=st.floats(-3, 3)),
           arrays(np.float64, 4, elements=st.floats(-5, 5)),
           st.floats(0.1, 10.0), st.floats(0.5, 50.0))
    @settings(max_examples=80)
    def test_scaling_invariance(self, g, y, k, snr):
        const = Constellation(g)
        scaled = Constellation(k * g)
        a = math.sqrt(snr)
        metric = np.sum((y - a * g) ** 2, axis=1)
        order = np.sort(metric)
        # skip near-ties, where rounding may legitimately flip the decision
        if order[1] - order[0] > 1e-9 * (1.0 + order[0]):
            assert ml_detect(const, y, snr) == ml_detect(scaled, k * y, snr)


class TestRateSchedule:
    def test_values(self):
        assert rate_schedule(1000.0, 1.0) == 1000
        assert rate_schedule(10.0, 0.0) == 2
        assert rate_schedule(100.0, 0.5) == 10
        with pytest.raises(ValueError):
            rate_schedule(10.0, -0.1)


class TestSimulateSer:
    def test_indistinguishable_points(self):
        est = simulate_ser(2, 2, 1e-9, 100, 200, RngSpec(1))
        assert est.error_rate == pytest.approx(0.5, abs=0.01)

    def test_two_points_match_closed_form(self):
        est = simulate_ser(2, 2, 2.0, 50, 4000, RngSpec(2))
        exact = pep_exact(1.0, 2).value
        assert exact == pytest.approx(0.1464466, abs=1e-7)
        assert abs(est.error_rate - exact) <= 3 * est.ci95_halfwidth

    def test_zero_noise(self):
        est = simulate_ser(4, 16, 10.0, 50, 40, RngSpec(3), noise_scale=0.0)
        assert est.errors == 0

    def test_bookkeeping(self):
        est = simulate_ser(4, 8, 3.0, 37, 11, RngSpec(4))
        assert est.trials == 37 * 11
        assert est.ensembles == 11
        assert 0 <= est.errors <= est.trials
        assert est.error_rate == est.errors / est.trials

    def test_worker_count_independent(self):
        args = (4, 8, 5.0, 300, 60, RngSpec(8, 1))
        serial = simulate_ser(*args, workers=1)
        parallel = simulate_ser(*args, workers=3)
        assert serial == parallel

    def test_block_plan_is_parameter_only(self):
        assert plan_blocks(100, 10_000, 16) == plan_blocks(100, 10_000, 16)

    def test_pruning_counts_redraws(self):
        # threshold so high that most 4-point ensembles keep fewer than 2 points
        est = simulate_ser(2, 4, 10.0, 10, 50, RngSpec(6), prune_energy=1.5)
        assert est.extra["redraws"] > 0

    @pytest.mark.parametrize("bad", [dict(M=1), dict(trials_per_ensemble=0),
                                     dict(ensembles=0), dict(n=3)])
    def test_validation(self, bad):
        kw = dict(n=4, M=4, snr=1.0, trials_per_ensemble=10, ensembles=2, rng=RngSpec())
        kw.update(bad)
        with pytest.raises(ValueError):
            simulate_ser(**kw)


class TestConditionalEstimator:
    @pytest.mark.parametrize("snr_db", [0.0, 6.0])
    def test_agrees_with_direct_counting(self, snr_db):
        snr = 10 ** (snr_db / 10)
        direct = simulate_ser(4, 8, snr, 20, 6000, RngSpec(21))
        cond = simulate_ser_conditional(4, 8, snr, 100_000, RngSpec(22))
        assert cond.method == "conditional"
        tol = 3 * math.hypot(direct.ci95_halfwidth, cond.ci95_halfwidth) / 1.96
        assert abs(direct.error_rate - cond.error_rate) <= tol

    def test_two_points_match_closed_form(self):
        cond = simulate_ser_conditional(4, 2, 4.0, 200_000, RngSpec(5))
        assert abs(cond.error_rate - pep_exact(2.0, 4).value) <= 3 * cond.ci95_halfwidth

    def test_worker_count_independent(self):
        a = simulate_ser_conditional(4, 8, 30.0, 20_000, RngSpec(1), workers=1, block=2048)
        b = simulate_ser_conditional(4, 8, 30.0, 20_000, RngSpec(1), workers=2, block=2048)
        assert a == b


class TestDiversitySlope:
    def test_exact_power_law(self):
        snr = np.logspace(1, 4, 10)
        assert estimate_diversity_slope(list(zip(snr, snr ** -3.0))) == \
            pytest.approx(-3.0, abs=1e-9)

    def test_prefactor_invariance(self):
        snr = np.logspace(0, 3, 8)
        assert estimate_diversity_slope(list(zip(snr, 5 * snr ** -2.0))) == \
            pytest.approx(-2.0, abs=1e-9)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            estimate_diversity_slope([(1, 0.1), (10, 0.01), (100, 0.001)])
        snr = np.logspace(0, 3, 8)
        rates = snr ** -2.0
        rates[-1] = 0.0
        with pytest.raises(InsufficientDataError):
            estimate_diversity_slope(list(zip(snr, rates)))
        with pytest.raises(InsufficientDataError):
            estimate_diversity_slope(list(zip(snr[::-1], rates[::-1])))
