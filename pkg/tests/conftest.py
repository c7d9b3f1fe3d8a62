from __future__ import annotations

import math

import pytest

from fbosc.config import InputStateParams, LinearInsensitive, OscillatorConfig, PhaseSensitive


@pytest.fixture
def vacuum_cfg():
    return OscillatorConfig(0.25, 1e-8, 1e16, LinearInsensitive(2.0))


@pytest.fixture
def epr_cfg():
    return OscillatorConfig(0.5, 1e-8, 1e16, LinearInsensitive(math.sqrt(2)),
                            InputStateParams(rE=math.log(0.5)))


@pytest.fixture
def pure_ps_cfg():
    return OscillatorConfig(0.25, 1e-8, 1e16, PhaseSensitive(1.0, math.log(2)))


#: (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
