import pytest

from hmtphase.channel import HmtGeometry, LinkGeometry
from hmtphase.estimator import MeanEstimates
from hmtphase.signal import dbm_to_watts, expected_power
from hmtphase.channel import channel_gain

SIGMA2 = dbm_to_watts(-115.0)
PILOT_10DBM = dbm_to_watts(10.0)


@pytest.fixture
def geom():
    return HmtGeometry.baseline()


@pytest.fixture
def link():
    return LinkGeometry(200.0, 0.68, -0.45)


def exact_means(geom, link, probe_set, power=PILOT_10DBM, sigma2=SIGMA2):
    """Forward-model means at the five probes (the noiseless oracle)."""
    mu = tuple(expected_power(channel_gain(geom, link, p), power, sigma2)
               for p in probe_set.probes)
    return MeanEstimates(mu, 1)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and getattr(mod, "RESULTS", None):
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
