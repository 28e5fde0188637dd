import math

import numpy as np
import pytest

from hmtphase.bounds import BoundParams, error_probability_bound, noncentrality
from hmtphase.channel import LinkGeometry, PhasePair, channel_gain, peak_gain
from hmtphase.estimator import build_probe_set
from hmtphase.experiments import (
    ConfigError, ExperimentConfig, PRESETS, gain_surface, grid_search_baseline,
    load_config, oracle_baseline, render_gain_surface, run_error_probability_sweep,
    run_point, run_rate_sweep, run_trial,
)
from hmtphase.experiments.baselines import grid_points, max_grid_size
from hmtphase.experiments.output import format_value, line_chart, to_csv
from hmtphase.experiments.runner import ERROR_COLUMNS, RATE_COLUMNS, mean_interval, wilson_interval
from hmtphase.signal import dbm_to_watts

FIXED_CENTER = (0.6837, -0.4471)


def noiseless_sampler(geom, link):
    def sample(phase, n, key=0):
        return np.full(n, abs(channel_gain(geom, link, phase)) ** 2)
    return sample


class TestOracle:
    def test_returns_alpha(self):
        assert oracle_baseline(LinkGeometry(200.0, 0.68, -0.45)) == PhasePair(0.68, -0.45)
        assert oracle_baseline(LinkGeometry(10.0, 0.0, 0.0)) == PhasePair(0.0, 0.0)


class TestGridSearch:
    def test_on_grid_user(self, geom):
        link = LinkGeometry(200.0, 0.5, -0.5)
        assert grid_search_baseline(noiseless_sampler(geom, link), 25, 5) == PhasePair(0.5, -0.5)

    def test_off_grid_user_matches_exhaustive(self, geom):
        link = LinkGeometry(200.0, 0.512, -0.004)
        pts = grid_points(5)
        best = max(pts, key=lambda p: abs(channel_gain(geom, link, p)))
        assert grid_search_baseline(noiseless_sampler(geom, link), 30, 5) == best

    def test_budget(self, geom, link):
        with pytest.raises(ValueError):
            grid_search_baseline(noiseless_sampler(geom, link), 23, 5)
        assert max_grid_size(23) == 4

    def test_tie_break(self):
        got = grid_search_baseline(lambda p, n, key=0: np.ones(n), 9, 3)
        assert got == PhasePair(-1.0, -1.0)


class TestTrials:
    def test_pilot_accounting_stage0(self):
        cfg = ExperimentConfig(trials=3, pilots=[23])
        for total, grid in ((23, 16), (100, 100), (57, 49)):
            rec = run_trial(cfg, 0, 200.0, 10.0, total)
            assert rec.outcomes["two_stage"].pilots_used == 3 + 5 * ((total - 3) // 5)
            assert rec.outcomes["grid_search"].pilots_used == grid
            assert rec.outcomes["oracle"].pilots_used == 0

    def test_pilot_accounting_given_center(self):
        cfg = ExperimentConfig(trials=1, center_mode="perturbed")
        rec = run_trial(cfg, 0, 200.0, 10.0, 23)
        assert rec.outcomes["two_stage"].pilots_used == 20

    def test_oracle_dominates_every_trial(self):
        cfg = ExperimentConfig(trials=200, random_user=True, pilots=[100])
        for rec in run_point(cfg, 200.0, 10.0, 100):
            oracle = rec.outcomes["oracle"].rate
            assert rec.outcomes["two_stage"].rate <= oracle
            assert rec.outcomes["grid_search"].rate <= oracle
            assert all(o.squared_error >= 0 and o.rate >= 0 for o in rec.outcomes.values())

    def test_random_user_in_domain(self):
        cfg = ExperimentConfig(trials=50, random_user=True)
        for t in range(50):
            a = run_trial(cfg, t, 200.0, 10.0, 23, methods=("oracle",)).alpha
            assert math.hypot(a.beta1, a.beta2) <= 0.9

    def test_trial_reproducible_and_distinct(self):
        cfg = ExperimentConfig(trials=2, random_user=True)
        a = run_trial(cfg, 0, 200.0, 10.0, 50)
        b = run_trial(cfg, 0, 200.0, 10.0, 50)
        c = run_trial(cfg, 1, 200.0, 10.0, 50)
        assert a == b
        assert a.alpha != c.alpha

    def test_same_user_across_sweep_points(self):
        cfg = ExperimentConfig(trials=1, random_user=True)
        a = run_trial(cfg, 4, 200.0, 0.0, 23)
        b = run_trial(cfg, 4, 200.0, 30.0, 100)
        assert a.alpha == b.alpha and a.nlos_magnitude == b.nlos_magnitude


class TestErrorSweep:
    def test_bound_column_matches_hand_evaluation(self, geom):
        cfg = ExperimentConfig(trials=5, pilots=[5000], epsilons=[0.5, 1.0], nlos_paths=0,
                               center_mode="fixed", center=FIXED_CENTER)
        rows = run_error_probability_sweep(cfg)
        link = LinkGeometry(200.0, 0.68, -0.45)
        ps = build_probe_set(PhasePair(*FIXED_CENTER), 0.01, 0.01, geom)
        lams = [noncentrality(dbm_to_watts(10.0), channel_gain(geom, link, p), dbm_to_watts(-115))
                for p in ps.probes]
        for row in rows:
            params = BoundParams(tuple(lams[1:]), 1000, row["epsilon"])
            hand = 4 * sum(math.exp(-(1000 / 32) * (row["epsilon"] * lam / (1 + lam)) ** 2)
                           for lam in lams[1:])
            assert row["bound_raw"] == pytest.approx(hand, rel=1e-12)
            assert row["bound"] == pytest.approx(min(1.0, hand), rel=1e-12)
            assert row["bound"] == pytest.approx(error_probability_bound(params), rel=1e-12)
        assert rows[-1]["bound"] < 1.0

    def test_rows_and_trials(self):
        cfg = ExperimentConfig(trials=7, pilots=[25, 50], epsilons=[0.001, 0.01, 0.1],
                               pilot_dbm=[10.0, 20.0], center_mode="perturbed")
        rows = run_error_probability_sweep(cfg)
        assert len(rows) == 2 * 2 * 3
        assert all(r["trials"] == 7 for r in rows)
        assert set(rows[0]) == set(ERROR_COLUMNS)

    def test_non_increasing_in_epsilon(self):
        cfg = ExperimentConfig(trials=200, pilots=[50], epsilons=[1e-6, 1e-5, 1e-4, 1e-3, 0.01],
                               center_mode="perturbed")
        rows = run_error_probability_sweep(cfg)
        probs = [r["error_probability"] for r in rows]
        assert probs == sorted(probs, reverse=True)

    def test_high_power_many_pilots_no_failures(self):
        cfg = ExperimentConfig(trials=1000, pilots=[50_000], pilot_dbm=[20.0], epsilons=[0.1],
                               center_mode="perturbed", nlos_paths=0, workers=4)
        (row,) = run_error_probability_sweep(cfg)
        assert row["failures"] == 0


class TestRateSweep:
    def test_oracle_constant_and_dominant(self):
        cfg = ExperimentConfig(**{**PRESETS["rate-vs-power"], "trials": 50, "distances": [10.0]})
        rows = run_rate_sweep(cfg)
        oracle = {r["pilot_dbm"]: r["mean_rate"] for r in rows if r["method"] == "oracle"}
        assert len(set(oracle.values())) == 1
        for r in rows:
            assert r["mean_rate"] <= oracle[r["pilot_dbm"]] + 1e-12
        assert set(rows[0]) == set(RATE_COLUMNS)
        assert {r["pilots_used"] for r in rows if r["method"] == "two_stage"} == {23}


class TestSurface:
    def test_argmax_and_peak(self, geom, link):
        surf = render_gain_surface(geom, link, 201)
        assert surf.cell_contains(0.68, -0.45)
        assert surf.gain_abs.max() == pytest.approx(0.01 / (4 * math.pi * 200), rel=1e-12)

    def test_zero_lines(self, geom, link):
        k = np.arange(-3, 4)
        k = k[k != 0]
        vals = gain_surface(geom, link, 0.68 + k / geom.kx, np.linspace(-1, 1, 101))
        assert np.max(vals) / peak_gain(geom, link) < 1e-12

    def test_min_resolution(self, geom, link):
        with pytest.raises(ValueError):
            render_gain_surface(geom, link, 15)


class TestStatistics:
    def test_wilson_contains_estimate(self):
        lo, hi = wilson_interval(10, 100)
        assert lo < 0.1 < hi
        lo0, hi0 = wilson_interval(0, 1000)
        assert lo0 == pytest.approx(0.0, abs=1e-15) and 0 < hi0 < 0.01

    def test_mean_interval(self):
        m, lo, hi = mean_interval([1.0, 2.0, 3.0])
        assert m == 2.0 and lo < 2.0 < hi
        assert mean_interval([4.0]) == (4.0, 4.0, 4.0)


class TestConfig:
    def test_defaults_are_baseline(self):
        cfg = ExperimentConfig()
        assert cfg.geometry().kx == pytest.approx(100)
        assert cfg.noise().sigma2 == pytest.approx(3.1623e-15, rel=1e-4)
        assert cfg.data_dbm == 20.0

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv("HMTPHASE_SEED", "77")
        assert ExperimentConfig().seed == 77
        monkeypatch.setenv("HMTPHASE_SEED", "x")
        with pytest.raises(ConfigError):
            ExperimentConfig()

    def test_file_then_flags(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[sweep]\ntrials = 12\nseed = 5\n[link]\nalpha = [0.1, 0.2]\n')
        cfg = load_config(path, trials=3, seed=None)
        assert cfg.trials == 3 and cfg.seed == 5 and cfg.alpha == (0.1, 0.2)

    def test_preset_under_file(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("[sweep]\npilots = [30]\n")
        cfg = load_config(path, base=PRESETS["error-vs-pilots"])
        assert cfg.pilots == [30] and cfg.center_mode == "perturbed"

    @pytest.mark.parametrize("text, key", [
        ("[sweep]\ntrails = 3\n", "sweep.trails"),
        ("[bogus]\nx = 1\n", "bogus"),
        ("[sweep]\ntrials = 0\n", "sweep.trials"),
        ("[link]\nalpha = [2.0, 0.0]\n", "link.alpha"),
        ("[sweep]\nmethods = ['magic']\n", "sweep.methods"),
    ])
    def test_errors_name_key(self, tmp_path, text, key):
        path = tmp_path / "c.toml"
        path.write_text(text)
        with pytest.raises(ConfigError) as info:
            load_config(path)
        assert info.value.key == key
        assert key in str(info.value)

    def test_malformed(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("[sweep\ntrials = ")
        with pytest.raises(ConfigError):
            load_config(path)


class TestOutput:
    def test_format(self):
        assert format_value(1 / 3) == "0.333333333333"
        assert format_value(3) == "3"
        assert format_value("two_stage") == "two_stage"

    def test_csv_shape(self):
        text = to_csv([{"a": 1.5, "b": 2}, {"a": 0.1, "b": 3}], ("a", "b"))
        assert text == "a,b\n1.5,2\n0.1,3\n"

    def test_svg(self):
        svg = line_chart({"s": ([1, 2, 3], [0.5, 0.2, 0.1])}, "t", "x", "y", logx=True)
        assert svg.startswith("<svg") and "polyline" in svg and "</svg>" in svg


class TestDeterminism:
    def test_workers_do_not_change_csv(self):
        base = dict(trials=40, pilots=[23, 60], pilot_dbm=[0.0, 20.0], random_user=True)
        one = to_csv(run_rate_sweep(ExperimentConfig(**base, workers=1)), RATE_COLUMNS)
        many = to_csv(run_rate_sweep(ExperimentConfig(**base, workers=6)), RATE_COLUMNS)
        assert one == many
        e1 = to_csv(run_error_probability_sweep(ExperimentConfig(**base, workers=1)), ERROR_COLUMNS)
        e2 = to_csv(run_error_probability_sweep(ExperimentConfig(**base, workers=3)), ERROR_COLUMNS)
        assert e1 == e2

    def test_seed_changes_output(self):
        base = dict(trials=40, pilots=[23], random_user=True)
        a = to_csv(run_rate_sweep(ExperimentConfig(**base, seed=1)), RATE_COLUMNS)
        b = to_csv(run_rate_sweep(ExperimentConfig(**base, seed=2)), RATE_COLUMNS)
        assert a != b
