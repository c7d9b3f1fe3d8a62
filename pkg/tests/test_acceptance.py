"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from fbosc.config import SaturatingTanh, r_max
from fbosc.fixtures import BUILTIN, MONTE_CARLO
from fbosc.gaussian import InputCovariance
from fbosc.psd import band_mask, estimate_psd
from fbosc.saturation import steady_state_amplitude
from fbosc.spectra import (HEISENBERG, frequency_noise_plateau, output_spectra_general,
                           output_spectra_vacuum_closed_form, schawlow_townes,
                           spectra_for_config)
from fbosc.timedomain import (SimPlan, has_marginal_pole, measure_linewidth,
                              simulate_classical_startup, simulate_fluctuations)
from fbosc.transfer import (POLE_GUARD, commutator_residual, decompose_phase_sensitive,
                            recombine_phase_sensitive, transfer_insensitive,
                            transfer_phase_sensitive)
from fbosc.verify import (_random_products, check_bound_ordering, check_epr_minimum)


def record(name, ok, detail):
    ACCEPTANCE.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


def _random_thetas(rng, n):
    theta = rng.uniform(-4 * np.pi, 4 * np.pi, n)
    keep = np.abs(2 * np.cos(theta / 2)) >= POLE_GUARD
    return theta[keep]


def test_01_commutator_identity():
    rng = np.random.default_rng(101)
    n = 10_000
    eta = rng.uniform(1e-3, 1.0, n)
    theta = _random_thetas(rng, n)
    t0 = time.perf_counter()
    worst = max(abs(commutator_residual(e, 1.0, t)) for e, t in zip(eta, theta))
    elapsed = time.perf_counter() - t0
    record("1 commutator identity", worst < 1e-12 and elapsed < 1.0,
           f"max residual {worst:.2e} over {theta.size} samples in {elapsed:.2f} s")


def test_02_vacuum_closed_form():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(1000):
        eta = float(rng.uniform(1e-3, 1.0))
        theta = float(_random_thetas(rng, 1)[0])
        g = output_spectra_general(transfer_insensitive(eta, 1.0, theta), InputCovariance.vacuum())
        c = output_spectra_vacuum_closed_form(eta, 1.0, theta)
        worst = max(worst, abs(g.sqq / c.sqq - 1), abs(g.spp / c.spp - 1))
    spot = output_spectra_vacuum_closed_form(0.25, 1.0, math.pi / 2).sqq
    record("2 vacuum closed form", worst < 1e-12 and abs(spot - 1.625) < 1e-12,
           f"max relative difference {worst:.2e}; spot value {spot!r}")


TAU, ALPHA_SQ = 1e-8, 1e12


@pytest.mark.parametrize("eta", [0.9, 0.99, 0.999])
def test_03_schawlow_townes_loop_form(eta):
    plateau = frequency_noise_plateau(eta, TAU, ALPHA_SQ, omega_tau=1e-4)
    target = schawlow_townes(eta, TAU, ALPHA_SQ).s_phidot
    rel = abs(plateau / target - 1)
    record(f"3 plateau vs (1-eta)^2 form, eta={eta}", rel < 1e-6, f"relative mismatch {rel:.3e}")


def test_03_schawlow_townes_log_form():
    eta = 0.99
    plateau = frequency_noise_plateau(eta, TAU, ALPHA_SQ, omega_tau=1e-4)
    target = schawlow_townes(eta, TAU, ALPHA_SQ, form="log").s_phidot
    rel = abs(plateau / target - 1)
    record("3 plateau vs (ln eta)^2 form, eta=0.99", rel < abs(1 - eta),
           f"relative mismatch {rel:.3e}")


@pytest.mark.parametrize("eta", [0.9, 0.99, 0.999])
def test_03_plateau_exact_near_carrier_form(eta):
    x = 1e-4
    plateau = frequency_noise_plateau(eta, TAU, ALPHA_SQ, omega_tau=x)
    exact = ((math.sqrt(eta) - 1 / math.sqrt(eta)) ** 2 + x ** 2 / 2) / (2 * TAU ** 2 * ALPHA_SQ)
    rel = abs(plateau / exact - 1)
    record(f"3 plateau vs exact near-carrier form, eta={eta}", rel < 1e-6,
           f"relative mismatch {rel:.3e}")


def test_04_heisenberg_floor():
    t0 = time.perf_counter()
    sqq, spp = _random_products(104, 100_000)
    prod = sqq * spp
    epr = check_epr_minimum(0.5)
    elapsed = time.perf_counter() - t0
    ok = prod.min() >= HEISENBERG - 1e-9 and abs(epr.value - HEISENBERG) < 1e-9 and elapsed < 30
    record("4 Heisenberg floor", ok,
           f"min product {prod.min():.12f} over {prod.size}; EPR minimum {epr.value:.12f}; "
           f"{elapsed:.2f} s")


def test_05_bound_ordering():
    r = check_bound_ordering(seed=105)
    record("5 bound ordering", r.passed, f"{int(r.value)} {r.detail}")


def test_06_pure_phase_sensitive():
    eta = 0.25
    x = np.random.default_rng(106).uniform(1e-5, 0.1, 1000)
    s = output_spectra_general(transfer_phase_sensitive(eta, 1.0, r_max(eta), x, offset=True),
                               InputCovariance.vacuum())
    dev = float(np.max(np.abs(s.product - HEISENBERG)))
    record("6 pure phase-sensitive product", dev < 1e-12, f"max |product - 1/4| {dev:.2e}")


def test_07_saturation():
    model = SaturatingTanh(4.0, 1.0)
    ss = steady_state_amplitude(model, 0.25)
    res = simulate_classical_startup(model, 0.25, 1.0, SimPlan(1 / 16, 200, seed=107))
    ok = (abs(ss.alpha_ss - 0.4788) < 1e-3 and abs(ss.g_linear * 0.5 - 1) < 1e-10
          and abs(ss.contraction - 0.166) < 1e-3 and abs(res.final - ss.alpha_ss) < 1e-9
          and res.converged_step <= 200)
    record("7 saturation", ok,
           f"alpha_ss {ss.alpha_ss:.10f}, g_linear sqrt(eta) - 1 = {ss.g_linear * 0.5 - 1:.1e}, "
           f"contraction {ss.contraction:.6f}; startup {res.converged_step} round trips, "
           f"|diff| {abs(res.final - ss.alpha_ss):.1e}")


STEPS = 1 << 20
N = 16
SEGMENT = 4096


@pytest.mark.parametrize("name", MONTE_CARLO)
def test_08_monte_carlo_agreement(name):
    cfg = BUILTIN[name]
    t0 = time.perf_counter()
    ts = simulate_fluctuations(cfg, SimPlan.from_divisions(cfg.tau, N, STEPS, seed=8))
    band = (10 * 2 * math.pi * N / STEPS / cfg.tau, 1.0 / cfg.tau)
    errs = {}
    for quad in "qp":
        est = estimate_psd(ts, SEGMENT, quadrature=quad, prewhiten=has_marginal_pole(cfg, quad))
        m = band_mask(est.freqs, band)
        sp, _ = spectra_for_config(cfg, est.freqs[m])
        ref = sp.sqq if quad == "q" else sp.spp
        errs[quad] = float(np.sqrt(np.mean((est.psd[m] / ref - 1) ** 2)))
    elapsed = time.perf_counter() - t0
    record(f"8 Monte Carlo {name}", max(errs.values()) < 0.10 and elapsed < 60,
           f"RMS relative error q {errs['q']:.3f}, p {errs['p']:.3f}; {elapsed:.1f} s")


@pytest.mark.slow
def test_09_linewidth():
    cfg = BUILTIN["high_q"]
    t0 = time.perf_counter()
    res = measure_linewidth(cfg, seed=9)
    elapsed = time.perf_counter() - t0
    record("9 linewidth", abs(res.rel_error) < 0.10 and elapsed < 120,
           f"fit {res.fwhm_fit:.4g} rad/s vs 2 pi Gamma_ST {res.fwhm_st:.4g} rad/s "
           f"({res.rel_error:+.3f}); Gamma_ST T_run {res.gamma_t:.1f}; {elapsed:.1f} s")


def test_10_decomposition():
    rng = np.random.default_rng(110)
    worst = 0.0
    for _ in range(10_000):
        G = float(rng.uniform(1e-3, 1e3))
        g = float(rng.uniform(0, G)) * (1 - 1e-12)
        G2, g2 = recombine_phase_sensitive(*decompose_phase_sensitive(G, g))
        worst = max(worst, abs(G2 - G) / G, abs(g2 - g) / G)
    gcal, r = decompose_phase_sensitive(5.0, 3.0)
    ok = worst < 1e-12 and abs(gcal - 4) < 1e-12 and abs(r - math.log(2)) < 1e-12
    record("10 decomposition", ok, f"max round-trip error {worst:.2e}; (5,3) -> ({gcal!r}, {r!r})")


def test_11_phase_sensitive_limits():
    rng = np.random.default_rng(111)
    worst_lim, worst_zero = 0.0, 0.0
    for _ in range(100):
        eta = float(rng.uniform(1e-3, 1.0))
        theta = _random_thetas(rng, 100)
        a = transfer_insensitive(eta, 1.0, theta)
        b = transfer_phase_sensitive(eta, 1.0, 0.0, theta)
        for x, y in ((a.h0, b.h0q), (a.h0, b.h0p), (a.hg, b.hgq), (a.hg, b.hgp)):
            worst_lim = max(worst_lim, float(np.max(np.abs(x - y))))
        c = transfer_phase_sensitive(eta, 1.0, r_max(eta), theta)
        worst_zero = max(worst_zero, float(np.max(np.abs(c.hgq))), float(np.max(np.abs(c.hgp))))
    record("11 phase-sensitive limits", worst_lim < 1e-12 and worst_zero < 1e-12,
           f"r_s=0 deviation {worst_lim:.1e}; |hgq|,|hgp| at r_max {worst_zero:.1e}")
