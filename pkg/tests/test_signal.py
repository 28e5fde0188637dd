import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmtphase.bounds import noncentrality, sample_noncentral_chi2
from hmtphase.channel import LinkGeometry, PhasePair, channel_gain
from hmtphase.signal import (
    NoiseModel, PilotConfig, PilotSampler, RngStream, dbm_to_watts, expected_power,
    received_pilot, received_power, sample_awgn, sample_nlos_perturbation, watts_to_dbm,
)

N_BIG = 1_000_000


class TestUnits:
    @pytest.mark.parametrize("dbm, watts", [(0, 1e-3), (20, 0.1), (-115, 3.1623e-15), (30, 1.0)])
    def test_dbm_to_watts(self, dbm, watts):
        assert dbm_to_watts(dbm) == pytest.approx(watts, rel=1e-4)

    @settings(max_examples=50)
    @given(st.floats(-200, 100))
    def test_round_trip(self, dbm):
        assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, abs=1e-9)


class TestConfigTypes:
    def test_noise_model_invariants(self):
        with pytest.raises(ValueError):
            NoiseModel(0.0)
        with pytest.raises(ValueError):
            NoiseModel(1.0, nlos_path_count=-1)
        with pytest.raises(ValueError):
            NoiseModel(1.0, nlos_power_offset_db=3.0)

    def test_pilot_config(self):
        assert PilotConfig(1.0, 23).per_epoch == 4
        with pytest.raises(ValueError):
            PilotConfig(1.0, 4)
        with pytest.raises(ValueError):
            PilotConfig(0.0, 10)


class TestAwgn:
    def test_vanishing_variance(self):
        z = sample_awgn(RngStream(1), 1e-30)
        assert abs(z) < 1e-13

    def test_moments(self):
        z = sample_awgn(RngStream(2), 1.0, size=N_BIG)
        assert abs(z.real.mean()) < 5e-3 and abs(z.imag.mean()) < 5e-3
        assert z.real.var() == pytest.approx(0.5, rel=0.01)
        power = np.abs(sample_awgn(RngStream(3), 2.0, size=N_BIG)) ** 2
        assert power.mean() == pytest.approx(2.0, rel=0.01)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            sample_awgn(RngStream(0), 0.0)


class TestNlos:
    def test_no_paths(self):
        assert sample_nlos_perturbation(RngStream(0), NoiseModel(1.0, 0), 1.0) == 0

    def test_zero_los(self):
        assert sample_nlos_perturbation(RngStream(0), NoiseModel(1.0), 0.0) == 0

    def test_power(self):
        model = NoiseModel(1.0, 4, -20.0)
        draws = np.array([sample_nlos_perturbation(RngStream(5, i), model, 1.0)
                          for i in range(100_000)])
        assert np.mean(np.abs(draws) ** 2) == pytest.approx(0.04, rel=0.03)


class TestReceivedPilot:
    def test_noiseless(self):
        y = received_pilot(1 + 0j, 4.0, RngStream(0), 1e-30)
        assert y == pytest.approx(2 + 0j, abs=1e-12)

    def test_pure_noise(self):
        a = received_pilot(0j, 7.0, RngStream(9), 1.0)
        b = sample_awgn(RngStream(9), 1.0)
        assert a == b

    def test_mean(self):
        y = received_pilot(1 + 1j, 1.0, RngStream(4), 1.0, size=100_000)
        assert abs(y.real.mean() - 1) < 1.5e-2 and abs(y.imag.mean() - 1) < 1.5e-2

    def test_received_power(self):
        assert received_power(0j) == 0
        assert received_power(3 + 4j) == pytest.approx(25.0)
        y = received_pilot(1 + 0j, 9.0, RngStream(0), 1e-30)
        assert received_power(y) == pytest.approx(9.0, rel=1e-12)


class TestExpectedPower:
    def test_closed_form(self):
        assert expected_power(0j, 1.0, 0.3) == 0.3
        assert expected_power(1 + 0j, 1.0, 1.0) == 2.0

    def test_monte_carlo(self):
        r = received_power(received_pilot(0.5 + 0j, 4.0, RngStream(6), 1.0, size=N_BIG))
        assert r.mean() == pytest.approx(2.0, rel=0.01)

    @settings(max_examples=100)
    @given(re=st.floats(-10, 10), im=st.floats(-10, 10), p=st.floats(1e-6, 1e3),
           s2=st.floats(1e-12, 1e3))
    def test_at_least_noise_floor(self, re, im, p, s2):
        assert expected_power(complex(re, im), p, s2) >= s2


class TestChiSquaredLaw:
    @pytest.mark.parametrize("lam", [0.0, 1.0, 100.0])
    def test_mean_and_variance(self, lam):
        sigma2 = 2.0
        h = math.sqrt(lam * sigma2 / 2.0)  # P = 1
        assert noncentrality(1.0, h, sigma2) == pytest.approx(lam)
        x = (2 / sigma2) * received_power(received_pilot(h, 1.0, RngStream(11), sigma2, size=N_BIG))
        assert x.mean() == pytest.approx(2 + lam, rel=0.02)
        assert x.var() == pytest.approx(2 * (2 + 2 * lam), rel=0.02)

    def test_matches_direct_sampler(self):
        lam, sigma2 = 5.0, 1.0
        h = math.sqrt(lam * sigma2 / 2.0)
        x = (2 / sigma2) * received_power(received_pilot(h, 1.0, RngStream(12), sigma2, size=N_BIG))
        z = sample_noncentral_chi2(RngStream(13), 2, lam, size=N_BIG)
        assert x.mean() == pytest.approx(z.mean(), rel=0.02)
        assert x.var() == pytest.approx(z.var(), rel=0.02)

    def test_additivity(self):
        lam, n, reps = 3.0, 10, 100_000
        h = math.sqrt(lam / 2.0)
        x = 2 * received_power(received_pilot(h, 1.0, RngStream(14), 1.0, size=(reps, n)))
        assert x.sum(axis=1).mean() == pytest.approx(2 * n + n * lam, rel=0.02)


class TestDeterminism:
    def test_same_key_same_stream(self):
        a = RngStream(42, 7, 3).complex_normal(1.0, 16)
        b = RngStream(42, 7, 3).complex_normal(1.0, 16)
        assert np.array_equal(a, b)

    def test_distinct_keys_differ(self):
        a = RngStream(42, 7).complex_normal(1.0, 16)
        b = RngStream(42, 8).complex_normal(1.0, 16)
        c = RngStream(43, 7).complex_normal(1.0, 16)
        assert not np.array_equal(a, b) and not np.array_equal(a, c)

    def test_distinct_keys_uncorrelated(self):
        a = RngStream(1, 0).generator.standard_normal(200_000)
        b = RngStream(1, 1).generator.standard_normal(200_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.01

    def test_sampler_keys_order_free(self, geom, link):
        s1 = PilotSampler(geom, link, 0.01, 1e-12, RngStream(3, 1))
        s2 = PilotSampler(geom, link, 0.01, 1e-12, RngStream(3, 1))
        p = PhasePair(0.68, -0.45)
        a0, a1 = s1(p, 5, 0), s1(p, 5, 1)
        b1, b0 = s2(p, 5, 1), s2(p, 5, 0)
        assert np.array_equal(a0, b0) and np.array_equal(a1, b1)

    def test_sampler_adds_nlos(self, geom, link):
        s = PilotSampler(geom, link, 1.0, 1e-30, RngStream(0), h_nlos=1e-6 + 0j)
        p = PhasePair(0.1, 0.1)
        expected = abs(channel_gain(geom, link, p) + 1e-6) ** 2
        assert s(p, 3, 0) == pytest.approx(np.full(3, expected), rel=1e-9)
