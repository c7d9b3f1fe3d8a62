"""Closed-form output quadrature spectra, frequency noise and uncertainty bounds.

Spectra are symmetrized and double sided, in vacuum units (vacuum = 1/2 per
quadrature).  Frequency-noise spectra are in rad^2/s (double sided, per Hz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import errors as E
from .config import (InputStateParams, LinearInsensitive, OscillatorConfig, PhaseSensitive,
                     SaturatingTanh)
from .gaussian import QG, PG, P0, Q0, InputCovariance, input_covariance
from .transfer import (POLE_GUARD, InsensitiveTransfer, QuadTransfer, _check_eta,
                       _check_rs, _half_angle, _check_pole, transfer_insensitive,
                       transfer_phase_sensitive)

HEISENBERG = 0.25


@dataclass(frozen=True)
class Bounds:
    """Lower bounds on ``sqq * spp``.

    ``insensitive`` is the state-independent bound of a phase-insensitive
    loop (``nan`` for a phase-sensitive transfer); ``general`` uses the input
    cross-correlations (``nan`` when they were not supplied).
    """

    heisenberg: float
    insensitive: np.ndarray | float
    general: np.ndarray | float


@dataclass(frozen=True)
class QuadratureSpectra:
    omega: np.ndarray | float
    sqq: np.ndarray | float
    spp: np.ndarray | float
    sqp_cross: np.ndarray | complex | None = None
    bounds: Bounds | None = None

    @property
    def product(self):
        return self.sqq * self.spp


@dataclass(frozen=True)
class FrequencyNoisePoint:
    omega: np.ndarray | float
    s_phidot: np.ndarray | float


@dataclass(frozen=True)
class SchawlowTownes:
    """Flat frequency-noise level (rad^2/s) and FWHM linewidth (Hz)."""

    s_phidot: float
    linewidth_fwhm: float

    @property
    def fwhm_rad_s(self) -> float:
        return 2 * math.pi * self.linewidth_fwhm


def _cov(v) -> InputCovariance:
    if isinstance(v, InputCovariance):
        return v
    if isinstance(v, InputStateParams):
        return input_covariance(v)
    return InputCovariance(v)


def _out(x, like):
    return np.asarray(x).item() if np.ndim(like) == 0 else np.asarray(x)


def _quad_form(a, b, m):
    """``|a|^2 m00 + |b|^2 m11 + 2 Re(a conj(b)) m01`` for a real symmetric 2x2 ``m``."""
    return (np.abs(a) ** 2 * m[0, 0] + np.abs(b) ** 2 * m[1, 1]
            + 2 * (a * np.conj(b)).real * m[0, 1])


def uncertainty_bounds(tf: InsensitiveTransfer | QuadTransfer,
                       v: InputCovariance | None = None) -> Bounds:
    """Bounds on the output uncertainty product.

    ``insensitive = |h0|^2 (|h0|^2 - 1)`` holds for any input state of a
    phase-insensitive loop.  With the input covariance ``v``,
    ``general = 4 |h0 hg|^2 (sqrt(v_q0 v_qG) - |v_q0qG|)(sqrt(v_p0 v_pG) - |v_p0pG|)``.
    """
    sensitive = isinstance(tf, QuadTransfer) and tf.r_s != 0
    h0 = np.asarray(tf.h0q)
    hg = np.asarray(tf.hgq)
    a2 = np.abs(h0) ** 2
    insensitive = np.full(a2.shape, np.nan) if sensitive else a2 * (a2 - 1)
    if v is None or sensitive:
        general = np.full(a2.shape, np.nan)
    else:
        w = _cov(v).v
        fq = math.sqrt(w[Q0, Q0] * w[QG, QG]) - abs(w[Q0, QG])
        fp = math.sqrt(w[P0, P0] * w[PG, PG]) - abs(w[P0, PG])
        general = 4 * np.abs(h0 * hg) ** 2 * fq * fp
    return Bounds(HEISENBERG, _out(insensitive, tf.h0q), _out(general, tf.h0q))


def output_spectra_general(tf: InsensitiveTransfer | QuadTransfer, v, Omega=None
                           ) -> QuadratureSpectra:
    """Compose transfer functions with an input covariance.

    ``sqq = |h0q|^2 v_q0 + |hgq|^2 v_qG + 2 Re(h0q conj(hgq)) v_q0qG`` and
    ``spp = |h0p|^2 v_p0 + |hgp|^2 v_pG - 2 Re(h0p conj(hgp)) v_p0pG``.
    The q-p cross-spectrum is returned as well (zero for the states built by
    :func:`~fbosc.gaussian.input_covariance`).
    """
    cov = _cov(v)
    h0q, hgq = np.asarray(tf.h0q), np.asarray(tf.hgq)
    h0p, hgp = np.asarray(tf.h0p), -np.asarray(tf.hgp)
    sqq = _quad_form(h0q, hgq, cov.q_block)
    spp = _quad_form(h0p, hgp, cov.p_block)
    w = cov.v
    cqp = np.array([[w[Q0, P0], w[Q0, PG]], [w[QG, P0], w[QG, PG]]])
    cross = (h0q * np.conj(h0p) * cqp[0, 0] + h0q * np.conj(hgp) * cqp[0, 1]
             + hgq * np.conj(h0p) * cqp[1, 0] + hgq * np.conj(hgp) * cqp[1, 1])
    like = tf.h0q
    return QuadratureSpectra(
        omega=Omega, sqq=_out(sqq, like), spp=_out(spp, like),
        sqp_cross=_out(cross, like), bounds=uncertainty_bounds(tf, cov))


def output_spectra_vacuum_closed_form(eta: float, tau: float, Omega, *, offset: bool = False,
                                      pole_guard: float = POLE_GUARD) -> QuadratureSpectra:
    """Vacuum inputs: ``sqq = spp = (sqrt(eta) - 1/sqrt(eta))^2 / (4 cos^2(Omega tau / 2)) + 1/2``."""
    _check_eta(eta)
    c, _ = _half_angle(tau, Omega, offset)
    _check_pole(c, pole_guard)
    k2 = (math.sqrt(eta) - 1 / math.sqrt(eta)) ** 2
    s = k2 / (4 * c ** 2) + 0.5
    s = _out(s, Omega)
    return QuadratureSpectra(Omega, s, s)


def phase_spectrum_near_carrier(eta: float, tau: float, omega):
    """Leading near-carrier phase spectrum ``(sqrt(eta) - 1/sqrt(eta))^2 / (omega tau)^2 + 1/2``."""
    x = np.asarray(omega, dtype=float) * tau
    with np.errstate(divide="ignore"):
        return _out((math.sqrt(eta) - 1 / math.sqrt(eta)) ** 2 / x ** 2 + 0.5, omega)


def _h0_near_carrier_sq(eta, tau, omega):
    x = np.asarray(omega, dtype=float) * tau
    with np.errstate(divide="ignore"):
        return (1 / math.sqrt(eta) - math.sqrt(eta)) ** 2 / x ** 2


def output_spectra_sqz_epr_near_carrier(eta: float, tau: float, omega,
                                        params: InputStateParams) -> QuadratureSpectra:
    """Near-carrier spectra for squeezed and two-mode-squeezed inputs::

        sqq = 1/2 e^{-rE} (e^{2 r0} + e^{2 rG}) |h0|^2
        spp = 1/2 e^{-rE} (e^{-2 r0} + e^{-2 rG}) |h0|^2

    with ``|h0| = |1/sqrt(eta) - sqrt(eta)| / |omega tau|``.  These forms
    drop the vacuum floor and can dip below the Heisenberg bound for large
    ``rE``; :func:`output_spectra_epr_exact` does not.
    """
    h2 = _h0_near_carrier_sq(eta, tau, omega)
    r0, rG, rE = params.r0, params.rG, params.rE
    sqq = 0.5 * math.exp(-rE) * (math.exp(2 * r0) + math.exp(2 * rG)) * h2
    spp = 0.5 * math.exp(-rE) * (math.exp(-2 * r0) + math.exp(-2 * rG)) * h2
    return QuadratureSpectra(omega, _out(sqq, omega), _out(spp, omega))


def output_spectra_epr_exact(eta: float, tau: float, Omega, rE: float, *, offset: bool = False,
                             pole_guard: float = POLE_GUARD) -> QuadratureSpectra:
    """Exact spectra for two-mode squeezing ``rE`` alone::

        sqq = spp = e^{rE}/(4 eta) + e^{-rE}/4 [(1/eta - 2) tan^2(Omega tau/2) + eta sec^2(Omega tau/2)]

    Minimized over frequency at ``Omega tau = 2 pi n``; at ``rE = ln(eta)``
    the minimum product is exactly 1/4.
    """
    _check_eta(eta)
    c, s = _half_angle(tau, Omega, offset)
    _check_pole(c, pole_guard)
    t2 = (s / c) ** 2
    sec2 = 1 / c ** 2
    val = math.exp(rE) / (4 * eta) + 0.25 * math.exp(-rE) * ((1 / eta - 2) * t2 + eta * sec2)
    val = _out(val, Omega)
    return QuadratureSpectra(Omega, val, val)


def output_spectra_phase_sensitive(eta: float, tau: float, r_s: float, Omega, v=None, *,
                                   offset: bool = False) -> QuadratureSpectra:
    """Spectra of the phase-sensitive loop for input covariance ``v``
    (vacuum when omitted), composed through the quadrature transfer functions."""
    tf = transfer_phase_sensitive(eta, tau, r_s, Omega, offset=offset)
    cov = InputCovariance.vacuum() if v is None else _cov(v)
    sp = output_spectra_general(tf, cov, Omega)
    return sp


def output_spectra_phase_sensitive_vacuum(eta: float, tau: float, r_s: float, Omega, *,
                                          offset: bool = False,
                                          pole_guard: float = POLE_GUARD) -> QuadratureSpectra:
    """Vacuum-input spectra of the phase-sensitive loop in explicit form::

        sqq = 1/2 |H0|^2 + 1/2 (1 - eta e^{2 r_s})/(1 - eta) |HG|^2
        spp = 1/2 |H0p|^2 + 1/2 |HGp|^2

    with the squared moduli written out in terms of ``cos(Omega tau / 2)``.
    """
    _check_eta(eta)
    _check_rs(eta, r_s)
    c, _ = _half_angle(tau, Omega, offset)
    _check_pole(c, pole_guard)
    se = math.sqrt(eta)
    e2 = math.exp(2 * r_s)
    c2 = c ** 2
    k2 = (1 / se - se) ** 2
    h0_sq = (k2 + 4 * c2) / (4 * c2)
    hg_sq = k2 / (4 * c2)
    if eta < 1:
        factor = -math.expm1(2 * r_s + math.log(eta)) / (1 - eta)
    else:
        factor = 0.0
    sqq = 0.5 * h0_sq + 0.5 * factor * hg_sq
    den = math.expm1(2 * r_s) ** 2 + 4 * e2 * c2
    h0p_sq = ((1 / se - e2 * se) ** 2 + 4 * e2 * c2) / den
    hgp_sq = max(-math.expm1(2 * r_s + math.log(eta)) / eta, 0.0) * (1 - eta) / den
    spp = 0.5 * h0p_sq + 0.5 * hgp_sq
    return QuadratureSpectra(Omega, _out(sqq, Omega), _out(spp, Omega))


def output_spectra_phase_sensitive_near_resonance(eta: float, tau: float, r_s: float,
                                                  omega) -> QuadratureSpectra:
    """Leading near-carrier vacuum spectra of the phase-sensitive loop::

        sqq ~ [(1-eta)^2 + (1 - eta e^{2 r_s})(1-eta)] / (2 eta tau^2 omega^2)
        spp ~ [(1 - eta e^{2 r_s})^2 + tau^2 omega^2 + (1 - eta e^{2 r_s})(1-eta)]
              / (2 eta [(e^{2 r_s} - 1)^2 + tau^2 omega^2])
    """
    _check_eta(eta)
    _check_rs(eta, r_s)
    x2 = (np.asarray(omega, dtype=float) * tau) ** 2
    u = max(-math.expm1(2 * r_s + math.log(eta)), 0.0)  # 1 - eta e^{2 r_s}
    with np.errstate(divide="ignore", invalid="ignore"):
        sqq = ((1 - eta) ** 2 + u * (1 - eta)) / (2 * eta * x2)
        spp = (u ** 2 + x2 + u * (1 - eta)) / (2 * eta * (math.expm1(2 * r_s) ** 2 + x2))
    return QuadratureSpectra(omega, _out(sqq, omega), _out(spp, omega))


def output_spectra_pure_phase_sensitive(eta: float, tau: float, omega,
                                        v: InputCovariance | None = None) -> QuadratureSpectra:
    """Near-carrier spectra of the loop whose amplifier is a pure squeezer
    (``r_s = r_max``)::

        sqq = (sqrt(eta) - 1/sqrt(eta))^2 / (omega tau)^2 * S_qq^0
        spp = (omega tau)^2 / (sqrt(eta) - 1/sqrt(eta))^2 * S_pp^0

    The uncertainty product of the in-coupled mode passes through unchanged.
    """
    cov = InputCovariance.vacuum() if v is None else _cov(v)
    k2 = (math.sqrt(eta) - 1 / math.sqrt(eta)) ** 2
    x2 = (np.asarray(omega, dtype=float) * tau) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        sqq = k2 / x2 * cov.v[Q0, Q0]
        spp = x2 / k2 * cov.v[P0, P0]
    return QuadratureSpectra(omega, _out(sqq, omega), _out(spp, omega))


def frequency_noise_spectrum(spp, omega, alpha_sq: float) -> FrequencyNoisePoint:
    """``S_phidot = omega^2 / (2 alpha_sq) * spp`` using ``phi ~ p_out / (sqrt(2) |alpha|)``."""
    if alpha_sq <= 0:
        raise E.ZeroCarrier("frequency noise needs a nonzero carrier (alpha_sq > 0)")
    w = np.asarray(omega, dtype=float)
    return FrequencyNoisePoint(omega, _out(w ** 2 / (2 * alpha_sq) * np.asarray(spp), omega))


def schawlow_townes(eta: float, tau: float, alpha_sq: float, n_th: float = 0.0,
                    form: str = "loop") -> SchawlowTownes:
    """Flat frequency-noise level and FWHM linewidth ``S / (2 pi)``.

    ``form="loop"`` gives ``(1-eta)^2 / (2 tau^2 alpha_sq) (1 + 2 n_th)``;
    ``form="log"`` uses ``(ln eta)^2`` in place of ``(1-eta)^2``; they
    differ by terms of order ``(1 - eta)^3``.
    """
    if alpha_sq <= 0:
        raise E.ZeroCarrier("linewidth needs a nonzero carrier (alpha_sq > 0)")
    _check_eta(eta)
    if form == "loop":
        num = (1 - eta) ** 2
    elif form == "log":
        num = math.log(eta) ** 2
    else:
        raise ValueError(f"form must be 'loop' or 'log', got {form!r}")
    s = num / (2 * tau ** 2 * alpha_sq) * (1 + 2 * n_th)
    return SchawlowTownes(s, s / (2 * math.pi))


def frequency_noise_plateau(eta: float, tau: float, alpha_sq: float,
                            omega_tau: float = 1e-4) -> float:
    """Near-carrier plateau of ``omega^2 spp / (2 alpha_sq)`` from the exact
    vacuum spectrum, evaluated at offset ``omega = omega_tau / tau``."""
    omega = omega_tau / tau
    spp = output_spectra_vacuum_closed_form(eta, tau, omega, offset=True).spp
    return frequency_noise_spectrum(spp, omega, alpha_sq).s_phidot


def transfer_for_config(cfg: OscillatorConfig, Omega, *, offset: bool = False):
    """Transfer functions matching the amplifier variant of ``cfg``.

    A saturating amplifier is linearized at its steady state, where the gain
    equals the loss whatever ``g0`` is.
    """
    amp = cfg.amplifier
    if isinstance(amp, PhaseSensitive):
        return transfer_phase_sensitive(cfg.eta, cfg.tau, amp.r_s, Omega, offset=offset)
    if isinstance(amp, (LinearInsensitive, SaturatingTanh)):
        return transfer_insensitive(cfg.eta, cfg.tau, Omega, offset=offset)
    raise E.WrongVariant(f"unknown amplifier model {amp!r}")


def spectra_for_config(cfg: OscillatorConfig, Omega, *, offset: bool = True):
    """Output spectra of ``cfg`` on a grid, plus frequency noise.

    Returns ``(spectra, s_phidot)``; ``s_phidot`` is ``nan`` when
    ``alpha_sq == 0``.
    """
    tf = transfer_for_config(cfg, Omega, offset=offset)
    sp = output_spectra_general(tf, input_covariance(cfg.input), Omega)
    w = np.asarray(Omega, dtype=float)
    if not offset:
        w = w - cfg.carrier
    if cfg.alpha_sq > 0:
        sphi = frequency_noise_spectrum(sp.spp, w, cfg.alpha_sq).s_phidot
    else:
        sphi = np.full(np.shape(w), np.nan)
    return sp, sphi
