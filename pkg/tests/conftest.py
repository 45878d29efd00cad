import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from elmrules import swinggen

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixture3():
    machines, network, gen = swinggen.load_fixture()
    return machines, network, gen


@pytest.fixture(scope="session")
def swing_data(fixture3):
    """The bundled 2000-sample dataset (seed 7), generated once per session."""
    machines, network, gen = fixture3
    ds, info = swinggen.generate_dataset(machines, network, swinggen.GenConfig(**gen), seed=7)
    return ds, info


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request, capsys):
    """Record and print one PASS/FAIL line, then assert."""

    def report(number, ok, detail):
        line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        request.config.stash.setdefault(ACCEPTANCE, {})[str(number)] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
