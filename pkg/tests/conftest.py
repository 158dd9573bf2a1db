import warnings

import pytest
from hypothesis import HealthCheck, settings

from wignerflow.config import load_preset
from wignerflow.runner import run
from wignerflow.wigner import WignerBoundaryWarning

settings.register_profile("wf", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("wf")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: needs a full long preset run (minutes)")


class PresetRuns:
    """Session cache of analysed preset runs; presets that differ only in
    their flow views share one integration."""

    def __init__(self):
        self._trajectories = {}
        self._results = {}

    def __call__(self, name: str):
        if name not in self._results:
            config = load_preset(name)
            key = config.integration_key()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", WignerBoundaryWarning)
                result = run(config, write=False, trajectory=self._trajectories.get(key))
            self._trajectories[key] = result.trajectory
            self._results[name] = result
        return self._results[name]


@pytest.fixture(scope="session")
def preset_run():
    return PresetRuns()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
