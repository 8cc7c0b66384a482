import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "cdk",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cdk")


def pytest_configure(config):
    config.cdk_acceptance = {}


def pytest_terminal_summary(terminalreporter):
    lines = terminalreporter.config.cdk_acceptance
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])


@pytest.fixture
def acceptance_log(request):
    return request.config.cdk_acceptance


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    vals = np.geomspace(1.0, cond, n)
    return (q * vals) @ q.T
