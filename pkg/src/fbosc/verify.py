"""Invariant suites run by ``fbosc verify``.

Each check returns a :class:`CheckResult`; a suite passes when all do.
Sweeps draw their samples from a seeded generator, so reports are
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import errors as E
from .config import InputStateParams, OscillatorConfig, SaturatingTanh, r_max, validate_config
from .gaussian import InputCovariance, covariance_validity, input_covariance
from .saturation import steady_state_amplitude
from .spectra import (HEISENBERG, output_spectra_epr_exact, output_spectra_general,
                      output_spectra_phase_sensitive_vacuum, output_spectra_vacuum_closed_form,
                      spectra_for_config)
from .transfer import (commutator_residual, decompose_phase_sensitive,
                       recombine_phase_sensitive, transfer_insensitive,
                       transfer_phase_sensitive)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str = ""


def _rng(seed):
    return np.random.default_rng(seed)


def _random_eta(rng, n):
    return rng.uniform(1e-3, 1.0, n)


def check_commutator(seed=0, n=10_000, tol=1e-12) -> CheckResult:
    rng = _rng(seed)
    eta = _random_eta(rng, n)
    theta = rng.uniform(-4 * np.pi, 4 * np.pi, n)
    worst = max(abs(commutator_residual(e, 1.0, t)) for e, t in zip(eta, theta))
    return CheckResult("commutator_residual", worst < tol, worst, f"max |res| over {n} samples")


def _batch_covariance(r0, rG, rE):
    """q-block and p-block entries of the input covariance for arrays of parameters."""
    sh2, ch2 = np.sinh(rE / 2) ** 2, np.cosh(rE / 2) ** 2
    vq0 = 0.5 * (np.exp(2 * rG) * sh2 + np.exp(2 * r0) * ch2)
    vp0 = 0.5 * (np.exp(-2 * rG) * sh2 + np.exp(-2 * r0) * ch2)
    vqg = 0.5 * (np.exp(2 * r0) * sh2 + np.exp(2 * rG) * ch2)
    vpg = 0.5 * (np.exp(-2 * r0) * sh2 + np.exp(-2 * rG) * ch2)
    cq = 0.25 * (np.exp(2 * r0) + np.exp(2 * rG)) * np.sinh(rE)
    cp = -0.25 * (np.exp(-2 * r0) + np.exp(-2 * rG)) * np.sinh(rE)
    return (vq0, vqg, cq), (vp0, vpg, cp)


def _random_products(seed, n, squeeze=3.0, chunk=1000):
    """Uncertainty products (and bounds) for random physical configurations."""
    rng = _rng(seed)
    out = []
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        eta = float(rng.uniform(1e-3, 1.0))
        sensitive = bool(rng.integers(2))
        r_s = float(rng.uniform(0, r_max(eta))) if sensitive else 0.0
        if sensitive and rng.random() < 0.2:
            r_s = r_max(eta)
        theta = rng.uniform(0, 2 * np.pi, m)
        r0, rG, rE = (rng.uniform(-squeeze, squeeze, m) for _ in range(3))
        tf = transfer_phase_sensitive(eta, 1.0, r_s, theta)
        (vq0, vqg, cq), (vp0, vpg, cp) = _batch_covariance(r0, rG, rE)
        a, b = tf.h0q, tf.hgq
        sqq = np.abs(a) ** 2 * vq0 + np.abs(b) ** 2 * vqg + 2 * (a * np.conj(b)).real * cq
        a, b = tf.h0p, tf.hgp
        spp = np.abs(a) ** 2 * vp0 + np.abs(b) ** 2 * vpg - 2 * (a * np.conj(b)).real * cp
        out.append((sqq, spp))
    sqq = np.concatenate([o[0] for o in out])
    spp = np.concatenate([o[1] for o in out])
    return sqq, spp


def check_heisenberg_floor(seed=0, n=100_000, tol=1e-9) -> CheckResult:
    sqq, spp = _random_products(seed, n)
    prod = sqq * spp
    ok = bool(np.all(sqq >= 0) and np.all(spp >= 0) and prod.min() >= HEISENBERG - tol)
    return CheckResult("heisenberg_floor", ok, float(prod.min()),
                       f"min product over {n} random configurations")


def check_bound_ordering(seed=0, n=10_000, rtol=1e-12) -> CheckResult:
    """``product >= general >= insensitive`` for vacuum inputs and
    ``product >= general`` for random squeezed/EPR inputs of the
    phase-insensitive loop.

    Comparisons allow rounding at ``rtol`` relative to the product, which
    near the carrier exceeds the bounds by a margin far below double
    precision of either.
    """
    rng = _rng(seed)
    bad = 0
    worst = np.inf
    for _ in range(n // 100):
        eta = float(rng.uniform(1e-3, 1.0))
        theta = rng.uniform(0, 2 * np.pi, 100)
        tf = transfer_insensitive(eta, 1.0, theta)
        vac = output_spectra_general(tf, InputCovariance.vacuum())
        p, g, i = vac.product, vac.bounds.general, vac.bounds.insensitive
        slack = rtol * p
        bad += int(np.sum(p < g - slack) + np.sum(g < i - slack))
        r = rng.uniform(-3, 3, 3)
        sq = output_spectra_general(tf, input_covariance(InputStateParams(*r)))
        bad += int(np.sum(sq.product < sq.bounds.general - rtol * sq.product))
        worst = min(worst, float(np.min((sq.product - sq.bounds.general) / sq.product)))
    return CheckResult("bound_ordering", bad == 0, float(bad), f"violations; min relative margin {worst:.3g}")


def check_cross_paths(seed=0, n=1000, rtol=1e-12) -> CheckResult:
    rng = _rng(seed)
    worst = 0.0
    for _ in range(n):
        eta = float(rng.uniform(1e-3, 1.0))
        theta = float(rng.uniform(0, 2 * np.pi))
        tf = transfer_insensitive(eta, 1.0, theta)
        g = output_spectra_general(tf, InputCovariance.vacuum())
        c = output_spectra_vacuum_closed_form(eta, 1.0, theta)
        worst = max(worst, abs(g.sqq / c.sqq - 1), abs(g.spp / c.spp - 1))
        rE = float(rng.uniform(-3, 3))
        g = output_spectra_general(tf, input_covariance(InputStateParams(rE=rE)))
        c = output_spectra_epr_exact(eta, 1.0, theta, rE)
        worst = max(worst, abs(g.sqq / c.sqq - 1), abs(g.spp / c.spp - 1))
        r_s = float(rng.uniform(0, r_max(eta)))
        g = output_spectra_general(transfer_phase_sensitive(eta, 1.0, r_s, theta),
                                   InputCovariance.vacuum())
        c = output_spectra_phase_sensitive_vacuum(eta, 1.0, r_s, theta)
        worst = max(worst, abs(g.sqq / c.sqq - 1), abs(g.spp / c.spp - 1))
    return CheckResult("cross_path_equality", worst < rtol, worst, "max relative difference")


def check_epr_minimum(eta=0.5, tol=1e-9) -> CheckResult:
    rE = math.log(eta)
    s = output_spectra_epr_exact(eta, 1.0, 0.0, rE)
    # neighbouring frequencies and squeeze values must not go lower
    theta = np.linspace(-0.5, 0.5, 201)
    around = output_spectra_epr_exact(eta, 1.0, theta, rE).product.min()
    others = min(output_spectra_epr_exact(eta, 1.0, 0.0, rE + d).product for d in (-0.1, 0.1))
    ok = abs(s.product - HEISENBERG) < tol and around >= s.product - tol and others > s.product
    return CheckResult("epr_minimum", ok, s.product, f"product at rE=ln(eta), Omega tau=0 (eta={eta})")


def check_decomposition(seed=0, n=10_000, tol=1e-12) -> CheckResult:
    rng = _rng(seed)
    worst = 0.0
    for _ in range(n):
        G = float(rng.uniform(0.01, 10.0))
        g = float(rng.uniform(0, G * (1 - 1e-9)))
        G2, g2 = recombine_phase_sensitive(*decompose_phase_sensitive(G, g))
        worst = max(worst, abs(G2 - G) / G, abs(g2 - g) / G)
    return CheckResult("decomposition_round_trip", worst < tol, worst, "max relative error")


def check_pure_phase_sensitive(eta=0.25, n=1000, tol=1e-12) -> CheckResult:
    x = np.linspace(1e-4, 0.1, n)
    s = output_spectra_general(transfer_phase_sensitive(eta, 1.0, r_max(eta), x, offset=True),
                               InputCovariance.vacuum())
    dev = float(np.max(np.abs(s.product - HEISENBERG)))
    return CheckResult("pure_phase_sensitive_product", dev < tol, dev, "max |product - 1/4|")


def check_phase_sensitive_limits(seed=0, n=1000, tol=1e-12) -> CheckResult:
    rng = _rng(seed)
    worst = 0.0
    for _ in range(n // 100):
        eta = float(rng.uniform(1e-3, 1.0))
        theta = rng.uniform(0, 2 * np.pi, 100)
        a = transfer_insensitive(eta, 1.0, theta)
        b = transfer_phase_sensitive(eta, 1.0, 0.0, theta)
        for x, y in ((a.h0, b.h0q), (a.h0, b.h0p), (a.hg, b.hgq), (a.hg, b.hgp)):
            worst = max(worst, float(np.max(np.abs(x - y))))
        c = transfer_phase_sensitive(eta, 1.0, r_max(eta), theta)
        worst = max(worst, float(np.max(np.abs(c.hgq))), float(np.max(np.abs(c.hgp))))
    return CheckResult("phase_sensitive_limits", worst < tol, worst, "max deviation")


GLOBAL_CHECKS: dict[str, Callable[..., CheckResult]] = {
    "commutator_residual": check_commutator,
    "heisenberg_floor": check_heisenberg_floor,
    "bound_ordering": check_bound_ordering,
    "cross_path_equality": check_cross_paths,
    "epr_minimum": lambda seed=0: check_epr_minimum(),
    "decomposition_round_trip": check_decomposition,
    "pure_phase_sensitive_product": lambda seed=0: check_pure_phase_sensitive(),
    "phase_sensitive_limits": check_phase_sensitive_limits,
}


def verify_config(cfg: OscillatorConfig, points: int = 4001) -> list[CheckResult]:
    """Checks specific to one configuration."""
    out = []
    cfg = validate_config(cfg)
    val = covariance_validity(input_covariance(cfg.input))
    out.append(CheckResult("covariance_validity", val.valid, val.min_eigenvalue,
                           "min eigenvalue of v + (i/2) Sigma"))
    if isinstance(cfg.amplifier, SaturatingTanh):
        try:
            ss = steady_state_amplitude(cfg.amplifier, cfg.eta)
            ok = bool(abs(ss.g_linear * math.sqrt(cfg.eta) - 1) < 1e-10 and ss.contraction < 1)
            out.append(CheckResult("steady_state", ok, ss.alpha_ss,
                                   f"g_linear={ss.g_linear:.12g} contraction={ss.contraction:.4g}"))
        except E.FboscError as exc:
            out.append(CheckResult("steady_state", False, math.nan, str(exc)))
    # offsets spanning one free spectral range, carrier excluded; the
    # midpoint omega tau = pi is the frequency Omega tau = 2 pi n
    x = np.linspace(-np.pi, np.pi, points)
    x = x[np.abs(x) > 1e-6]
    sp, _ = spectra_for_config(cfg, x / cfg.tau, offset=True)
    prod = sp.product
    # physical inputs must respect the floor; spectra must be non-negative
    floor_ok = bool(np.all(sp.sqq >= 0) and np.all(sp.spp >= 0)
                    and (not val.valid or prod.min() >= HEISENBERG - 1e-9))
    out.append(CheckResult("heisenberg_floor_grid", floor_ok, float(prod.min()),
                           "min product over one free spectral range"))
    return out


def run_suite(cfgs: dict[str, OscillatorConfig] | None = None, seed: int = 0,
              global_checks: bool = True) -> list[tuple[str, CheckResult]]:
    """Global sweeps (when requested) followed by per-configuration checks."""
    results = []
    if global_checks:
        for name, fn in GLOBAL_CHECKS.items():
            results.append(("global", fn(seed=seed)))
    for label, cfg in (cfgs or {}).items():
        for r in verify_config(cfg):
            results.append((label, r))
    return results
