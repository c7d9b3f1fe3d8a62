from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbosc import errors as E
from fbosc.config import (InputStateParams, LinearInsensitive, OscillatorConfig, SaturatingTanh,
                          config_hash)
from fbosc.fixtures import BUILTIN, R12
from fbosc.gaussian import input_covariance
from fbosc.psd import band_mask, estimate_psd, rms_relative_error
from fbosc.saturation import steady_state_amplitude
from fbosc.spectra import spectra_for_config
from fbosc.timedomain import (SimPlan, _NoiseSource, has_marginal_pole, iter_fluctuations,
                              linewidth_alpha_sq, loop_coefficients, measure_linewidth,
                              noise_factor, simulate_classical_startup, simulate_fluctuations)

TAU = 1.0
N = 16


def _cfg(eta=0.25, params=None):
    return OscillatorConfig(eta, TAU, 0.0, LinearInsensitive(1 / math.sqrt(eta)),
                            params or InputStateParams())


def _plan(steps, seed=0, **kw):
    return SimPlan.from_divisions(TAU, N, steps, seed=seed, **kw)


def test_plan_checks():
    with pytest.raises(E.ConfigIssue):
        SimPlan(dt=0.3, duration=100).samples_per_delay(1.0)
    with pytest.raises(E.ConfigIssue):
        SimPlan(dt=0.25, duration=100).samples_per_delay(1.0)
    assert _plan(1000).resolved_warmup(TAU) == 10 * N
    with pytest.raises(E.ConfigIssue):
        _plan(1000, warmup=5).resolved_warmup(TAU)


def test_too_short():
    with pytest.raises(E.TooShort):
        simulate_fluctuations(_cfg(), _plan(10 * N))


def test_output_length_and_hash():
    ts = simulate_fluctuations(_cfg(), _plan(1000))
    assert len(ts) == 1000 - 10 * N
    assert ts.config_hash == config_hash(_cfg())
    assert ts.t[1] == pytest.approx(TAU / N)


@settings(max_examples=10, deadline=None)
@given(block=st.integers(1, 5000), seed=st.integers(0, 2 ** 32))
def test_independent_of_block_size(block, seed):
    cfg = _cfg(0.4, InputStateParams(0.3, -0.2, 0.5))
    a = simulate_fluctuations(cfg, _plan(6000, seed))
    b = simulate_fluctuations(cfg, _plan(6000, seed), block=block)
    assert np.array_equal(a.q_out, b.q_out) and np.array_equal(a.p_out, b.p_out)


def test_single_quadrature_matches_joint():
    cfg = _cfg(0.4, InputStateParams(rE=0.5))
    both = simulate_fluctuations(cfg, _plan(4000))
    p_only = simulate_fluctuations(cfg, _plan(4000), ("p",))
    assert p_only.q_out is None
    assert np.array_equal(both.p_out, p_only.p_out)


def test_seed_and_stream_change_output():
    a = simulate_fluctuations(_cfg(), _plan(2000))
    assert not np.array_equal(a.p_out, simulate_fluctuations(_cfg(), _plan(2000, 1)).p_out)
    assert not np.array_equal(a.p_out, simulate_fluctuations(_cfg(), _plan(2000, stream=1)).p_out)


def test_zero_noise_gives_zero_output():
    cfg = _cfg(0.3, InputStateParams(covariance=np.zeros((4, 4)).tolist()))
    ts = simulate_fluctuations(cfg, _plan(3000))
    assert not np.any(ts.q_out) and not np.any(ts.p_out)


def test_lossless_loop_outputs_white_vacuum():
    cfg = _cfg(1.0)
    ts = simulate_fluctuations(cfg, _plan(1 << 17))
    for quad in "qp":
        est = estimate_psd(ts, 1024, quadrature=quad)
        assert np.mean(est.psd) == pytest.approx(0.5, rel=0.01)
        assert rms_relative_error(est, lambda w: 0.5 + 0 * w, (0, math.pi * N)) < 0.1


def test_near_carrier_slope_is_minus_two():
    ts = simulate_fluctuations(_cfg(), _plan(1 << 20, seed=3), ("p",))
    est = estimate_psd(ts, 1 << 16, prewhiten=True)
    m = band_mask(est.freqs, (0.005, 0.05)) & (est.freqs > 0)
    slope = np.polyfit(np.log(est.freqs[m]), np.log(est.psd[m]), 1)[0]
    assert abs(slope + 2) < 0.1


def test_instability_guard():
    with pytest.raises(E.UnstableLoop):
        simulate_fluctuations(_cfg(), _plan(20_000), loop_gain_scale=2.0)


def test_loop_coefficients():
    c = loop_coefficients(0.25)
    assert c["q"] == pytest.approx((1.0, -math.sqrt(3), math.sqrt(3)))
    c = loop_coefficients(0.25, math.log(2))
    assert c["q"][2] == 0.0 and c["p"][0] == pytest.approx(0.25)


def test_marginal_pole_detection():
    assert has_marginal_pole(BUILTIN["vacuum"], "p")
    assert has_marginal_pole(BUILTIN["phase_sensitive"], "q")
    assert not has_marginal_pole(BUILTIN["phase_sensitive"], "p")
    assert not has_marginal_pole(BUILTIN["lossless"], "q")


def test_noise_factor_singular():
    v = np.zeros((4, 4))
    assert np.array_equal(noise_factor(v), np.zeros((4, 4)))
    v = np.diag([1.0, 0.0, 2.0, 0.0])
    f = noise_factor(v)
    assert np.allclose(f @ f.T, v)


@pytest.mark.parametrize("params", [InputStateParams(), InputStateParams(R12, R12, 0),
                                    InputStateParams(0, 0, R12), InputStateParams(0.4, -0.3, 0.7)])
def test_noise_covariance_shaping(params):
    """Sample covariance of the drawn input noise matches V / dt."""
    steps = 1 << 20
    dt = 0.125
    v = input_covariance(params).v
    src = _NoiseSource(v, dt, seed=5, stream=0)
    d = src.draw(0, steps, ("q", "p"))
    x = np.column_stack([d["q"][:, 0], d["p"][:, 0], d["q"][:, 1], d["p"][:, 1]])
    sample = x.T @ x / steps * dt
    scale = np.sqrt(np.outer(np.diag(v), np.diag(v)))
    assert np.max(np.abs(sample - v) / scale) < 5 / math.sqrt(steps)


def test_vacuum_monte_carlo_short():
    """A short run already follows the closed-form spectra within 15% RMS."""
    cfg = BUILTIN["vacuum"]
    steps = 1 << 18
    ts = simulate_fluctuations(cfg, SimPlan.from_divisions(cfg.tau, N, steps, seed=2))
    band = (10 * 2 * math.pi * N / steps / cfg.tau, 1.0 / cfg.tau)
    for quad in "qp":
        est = estimate_psd(ts, 2048, quadrature=quad, prewhiten=True)
        m = band_mask(est.freqs, band)
        sp, _ = spectra_for_config(cfg, est.freqs[m])
        ref = sp.sqq if quad == "q" else sp.spp
        assert np.sqrt(np.mean((est.psd[m] / ref - 1) ** 2)) < 0.15


def test_startup_converges_to_steady_state():
    model = SaturatingTanh(4.0, 1.0)
    res = simulate_classical_startup(model, 0.25, TAU, _plan(200, seed=1))
    ss = steady_state_amplitude(model, 0.25).alpha_ss
    assert abs(res.final - ss) < 1e-9
    assert res.converged_step <= 200
    assert res.growth_factor == pytest.approx(2.0, rel=1e-3)
    assert np.all(np.diff(res.trajectory) >= 0)


def test_startup_not_converged():
    with pytest.raises(E.NotConverged):
        simulate_classical_startup(SaturatingTanh(4.0, 1.0), 0.25, TAU, _plan(5))


def test_startup_needs_tanh():
    with pytest.raises(E.WrongVariant):
        simulate_classical_startup(LinearInsensitive(2.0), 0.25, TAU, _plan(50))


def test_iter_rejects_startup_mode():
    with pytest.raises(ValueError):
        next(iter_fluctuations(_cfg(), _plan(1000, mode="classical_startup")))


def test_linewidth_alpha_sq():
    a2 = linewidth_alpha_sq(0.99, 1e-8, 1e-3, 30.0)
    gamma = (0.01 ** 2 / (2 * 1e-16 * a2)) / (2 * math.pi)
    assert gamma * 1e-3 == pytest.approx(30.0)


def test_linewidth_decimation_must_span_delays():
    with pytest.raises(ValueError):
        measure_linewidth(BUILTIN["high_q"], dt_div=8, decimation=12)
