from __future__ import annotations

import numpy as np

from fbosc.config import InputStateParams, OscillatorConfig, LinearInsensitive
from fbosc.fixtures import BUILTIN
from fbosc.verify import (GLOBAL_CHECKS, check_epr_minimum, run_suite, verify_config)


def test_global_checks_pass():
    for name, fn in GLOBAL_CHECKS.items():
        r = fn(seed=0)
        assert r.passed, (name, r)


def test_builtin_configs_pass():
    for label, cfg in BUILTIN.items():
        for r in verify_config(cfg):
            assert r.passed, (label, r)


def test_epr_optimum_reports_quarter():
    r = check_epr_minimum(0.5)
    assert r.passed and abs(r.value - 0.25) < 1e-12


def test_corrupted_covariance_fails():
    cfg = OscillatorConfig(0.5, 1.0, 0.0, LinearInsensitive(2.0),
                           InputStateParams(covariance=np.diag([0.1, 0.1, 0.5, 0.5]).tolist()))
    res = {r.name: r for r in verify_config(cfg)}
    assert not res["covariance_validity"].passed
    assert res["heisenberg_floor_grid"].passed


def test_suite_is_deterministic():
    a = run_suite({"v": BUILTIN["vacuum"]}, seed=3)
    b = run_suite({"v": BUILTIN["vacuum"]}, seed=3)
    assert a == b
