import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from skc.channel import ChannelParams  # noqa: E402


@pytest.fixture
def fig2_0db():
    return ChannelParams(1.0, 1.0, 1.0, 1.0, 0.9)


@pytest.fixture
def fig2_30db():
    return ChannelParams.from_snr_db(30.0, rho=0.9)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
