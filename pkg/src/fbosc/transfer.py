"""Linear-response transfer functions of the feedback loop.

Closed-loop maps from the in-coupled mode ``a0`` and the amplifier's
ancillary mode ``aG`` to the output field, for the phase-insensitive loop and
for the loop with a phase-sensitive amplifier (insensitive gain followed by a
squeezer ``r_s``, with the gain fixed by the saturation condition
``G e^{r_s} sqrt(eta) = 1``).

All functions accept scalars or arrays.  Frequencies are absolute angular
frequencies ``Omega`` unless ``offset=True``, in which case they are offsets
``omega`` from a carrier ``Omega_0`` with ``exp(i Omega_0 tau) = -1``.

Evaluation goes through the half angle ``theta/2`` with ``theta = Omega tau``,
using ``1 + e^{i theta} = 2 cos(theta/2) e^{i theta/2}``.  This keeps the
near-carrier values accurate even though ``1 + e^{i theta}`` suffers
cancellation there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import errors as E
from .config import RMAX_SLACK, r_max

#: Guard band on ``|1 + e^{i Omega tau}|`` and ``|e^{2 r_s} + e^{i Omega tau}|``.
POLE_GUARD = 1e-9


@dataclass(frozen=True)
class InsensitiveTransfer:
    """``q_out = h0 q0 + hg qG`` and ``p_out = h0 p0 - hg pG``."""

    h0: np.ndarray | complex
    hg: np.ndarray | complex

    # quadrature view, so the spectra code handles both variants uniformly
    @property
    def h0q(self):
        return self.h0

    @property
    def hgq(self):
        return self.hg

    @property
    def h0p(self):
        return self.h0

    @property
    def hgp(self):
        return self.hg


@dataclass(frozen=True)
class QuadTransfer:
    """``q_out = h0q q0 + hgq qG`` and ``p_out = h0p p0 - hgp pG``."""

    h0q: np.ndarray | complex
    hgq: np.ndarray | complex
    h0p: np.ndarray | complex
    hgp: np.ndarray | complex
    r_s: float = 0.0


def _half_angle(tau, Omega, offset):
    """cos and sin of ``theta/2``; with ``offset`` the carrier phase pi is
    added analytically so no precision is lost near the carrier."""
    half = 0.5 * np.asarray(Omega, dtype=float) * tau
    if offset:
        return -np.sin(half), np.cos(half)
    return np.cos(half), np.sin(half)


def _scalarize(x, like):
    return np.asarray(x).item() if np.ndim(like) == 0 else np.asarray(x)


def _check_eta(eta):
    if not (0 < eta <= 1):
        raise E.EtaOutOfRange(f"eta={eta} must lie in (0, 1]")


def _check_pole(c, guard):
    hit = np.abs(2 * c) < guard
    if np.any(hit):
        raise E.PoleFrequency(
            f"{int(np.count_nonzero(hit))} frequency(ies) within {guard:g} of a loop pole")


def _insensitive(eta, c, s):
    se = math.sqrt(eta)
    a = 0.5 * (se + 1 / se)
    b = 0.5 * (1 / se - se)
    t = s / c
    h0 = a + 1j * (b * t)
    hg = b - 1j * (b * t)
    return h0, hg


def transfer_insensitive(eta: float, tau: float, Omega, *, offset: bool = False,
                         pole_guard: float = POLE_GUARD) -> InsensitiveTransfer:
    """``h0 = (sqrt(eta) + z/sqrt(eta)) / (1 + z)`` and
    ``hg = (1/sqrt(eta) - sqrt(eta)) / (1 + z)`` with ``z = exp(i Omega tau)``.

    Raises
    ------
    PoleFrequency
        If ``|1 + z| < pole_guard`` anywhere on the grid.
    """
    _check_eta(eta)
    c, s = _half_angle(tau, Omega, offset)
    _check_pole(c, pole_guard)
    h0, hg = _insensitive(eta, c, s)
    return InsensitiveTransfer(_scalarize(h0, Omega), _scalarize(hg, Omega))


def commutator_residual(eta: float, tau: float, Omega, *, offset: bool = False,
                        pole_guard: float = POLE_GUARD):
    """``|h0|^2 - |hg|^2 - 1``, which vanishes for a bosonic output.

    The difference of squares is formed component-wise,
    ``(Re h0 - Re hg)(Re h0 + Re hg) + (|Im h0| - |Im hg|)(|Im h0| + |Im hg|)``,
    so the result is not swamped by rounding of the (large) squared moduli near
    the carrier.
    """
    tf = transfer_insensitive(eta, tau, Omega, offset=offset, pole_guard=pole_guard)
    return _scalarize(abs_sq_difference(tf.h0, tf.hg) - 1.0, Omega)


def abs_sq_difference(a, b):
    """``|a|^2 - |b|^2`` evaluated as a product of sums and differences."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ra, rb = np.abs(a.real), np.abs(b.real)
    ia, ib = np.abs(a.imag), np.abs(b.imag)
    return (ra - rb) * (ra + rb) + (ia - ib) * (ia + ib)


def _gain_deficit(eta, r_s):
    """``1/eta - e^{2 r_s}`` computed without cancellation; exactly 0 at r_max."""
    d = -np.expm1(2 * r_s + math.log(eta)) / eta
    return max(d, 0.0)


def _check_rs(eta, r_s):
    if r_s < 0:
        raise E.NegativeSqueeze(f"r_s={r_s} must be >= 0")
    if r_s > r_max(eta) + RMAX_SLACK:
        raise E.SqueezeExceedsRmax(f"r_s={r_s} exceeds r_max={r_max(eta):.6g}")


def transfer_phase_sensitive(eta: float, tau: float, r_s: float, Omega, *,
                             offset: bool = False, pole_guard: float = POLE_GUARD,
                             allow_q_pole: bool = False) -> QuadTransfer:
    """Quadrature transfer functions of the phase-sensitive loop.

    With ``z = exp(i Omega tau)`` and ``D = 1/eta - e^{2 r_s}``::

        h0q = (sqrt(eta) + z/sqrt(eta)) / (1 + z)
        hgq = sqrt(D) sqrt(1 - eta) / (1 + z)
        h0p = (z/sqrt(eta) + e^{2 r_s} sqrt(eta)) / (e^{2 r_s} + z)
        hgp = sqrt(D) sqrt(1 - eta) / (e^{2 r_s} + z)

    Both ancillary terms vanish at ``r_s = r_max``.

    Raises
    ------
    SqueezeExceedsRmax, NegativeSqueeze
        If ``r_s`` is outside ``[0, r_max]``.
    PoleFrequency
        If a frequency sits on the amplitude-channel pole ``z = -1`` or on the
        phase-channel pole ``z = -e^{2 r_s}`` (only reachable for ``r_s = 0``).
        With ``allow_q_pole=True`` the amplitude-channel pole is not an error:
        ``h0q`` becomes infinite there and ``hgq`` is infinite unless it
        vanishes identically (``r_s = r_max``).  The phase channel is finite
        at the carrier for ``r_s > 0``, so this lets it be probed there.
    """
    _check_eta(eta)
    _check_rs(eta, r_s)
    c, s = _half_angle(tau, Omega, offset)
    at_pole = np.abs(2 * c) < pole_guard
    if not allow_q_pole or r_s == 0:
        _check_pole(c, pole_guard)
    with np.errstate(divide="ignore", invalid="ignore"):
        h0, hg = _insensitive(eta, c, s)
    h0 = np.where(at_pole, complex(np.inf), h0)
    hg = np.where(at_pole, complex(np.inf), hg)
    if r_s == 0:
        return QuadTransfer(
            h0q=_scalarize(h0, Omega), hgq=_scalarize(hg, Omega),
            h0p=_scalarize(h0, Omega), hgp=_scalarize(hg, Omega), r_s=0.0)
    se = math.sqrt(eta)
    m = math.expm1(2 * r_s)
    d = _gain_deficit(eta, r_s)
    e_half = c + 1j * s
    den_p = m + 2 * c * e_half
    if np.any(np.abs(den_p) < pole_guard):
        raise E.PoleFrequency("frequency within pole guard of the phase-channel pole")
    num_p = 2 * e_half * (0.5 * (se + 1 / se) * c + 1j * 0.5 * (1 / se - se) * s) + m * se
    h0p = num_p / den_p
    # hgq is hg rescaled by sqrt((1 - eta e^{2 r_s}) / (1 - eta))
    ratio = math.sqrt(d * eta / (1 - eta)) if eta < 1 else 0.0
    hgq = ratio * hg if ratio else np.zeros_like(hg)
    hgp = math.sqrt(d) * math.sqrt(1 - eta) / den_p
    return QuadTransfer(
        h0q=_scalarize(h0, Omega), hgq=_scalarize(hgq, Omega),
        h0p=_scalarize(h0p, Omega), hgp=_scalarize(hgp, Omega), r_s=float(r_s))


def transfer_near_resonance(eta: float, tau: float, r_s: float, omega) -> QuadTransfer:
    """Leading-order forms for small offsets ``x = omega * tau``::

        h0q ~ (1/sqrt(eta) - sqrt(eta)) / (i x)
        hgq ~ -sqrt(D) sqrt(1 - eta) / (i x)
        h0p ~ (-sqrt(eta) D - i x / sqrt(eta)) / (e^{2 r_s} - 1 - i x)
        hgp ~ sqrt(D) sqrt(1 - eta) / (e^{2 r_s} - 1 - i x)

    with ``D = 1/eta - e^{2 r_s}``.  Warns when ``|x| >= 0.1``.
    """
    _check_eta(eta)
    _check_rs(eta, r_s)
    x = np.asarray(omega, dtype=float) * tau
    if np.any(np.abs(x) >= 0.1):
        warnings.warn("near-resonance forms used outside |omega tau| < 0.1", RuntimeWarning,
                      stacklevel=2)
    se = math.sqrt(eta)
    d = _gain_deficit(eta, r_s)
    amp = math.sqrt(d) * math.sqrt(1 - eta)
    with np.errstate(divide="ignore", invalid="ignore"):
        h0q = (1 / se - se) / (1j * x)
        hgq = -amp / (1j * x)
        den = math.expm1(2 * r_s) - 1j * x
        h0p = (-se * d - 1j * x / se) / den
        hgp = amp / den
    return QuadTransfer(
        h0q=_scalarize(h0q, omega), hgq=_scalarize(hgq, omega),
        h0p=_scalarize(h0p, omega), hgp=_scalarize(hgp, omega), r_s=float(r_s))


def decompose_phase_sensitive(G: float, g: float) -> tuple[float, float]:
    """Split ``b = G a + g a^dagger + ...`` into insensitive gain then squeezer.

    Returns ``(Gcal, r)`` with ``Gcal = sqrt(G^2 - g^2)`` and
    ``r = atanh(g / G)``, so that ``G = Gcal cosh r`` and ``g = Gcal sinh r``.

    Raises
    ------
    NonAmplifier
        Unless ``G > g >= 0``.
    """
    if not (G > g >= 0):
        raise E.NonAmplifier(f"need G > g >= 0, got G={G}, g={g}")
    gcal = math.sqrt((G - g) * (G + g))
    r = 0.5 * math.log((G + g) / (G - g)) if g else 0.0
    return gcal, r


def recombine_phase_sensitive(gcal: float, r: float) -> tuple[float, float]:
    """Inverse of :func:`decompose_phase_sensitive`: ``(Gcal cosh r, Gcal sinh r)``."""
    return gcal * math.cosh(r), gcal * math.sinh(r)
