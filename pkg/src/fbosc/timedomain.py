"""Stochastic delay-loop simulation of the linearized oscillator.

The loop is simulated at baseband: the carrier phase ``exp(i Omega_0 tau) = -1``
is folded into the feedback sign, so the marginal pole sits at zero offset.
Each quadrature obeys, with ``N = tau / dt`` samples of delay,

    x[k]     = a x[k-N] + b n0[k-N] + c nG[k]
    x_out[k] = sqrt(1 - eta) x[k] + sqrt(eta) n0[k]

where ``x`` is the field arriving at the out-coupler and ``n0``, ``nG`` are
the in-coupled and ancillary input noises.  For a phase-sensitive amplifier
with squeeze ``r`` (``r = 0`` for the phase-insensitive loop) the
coefficients are

    q:  a = 1,          b = -sqrt((1-eta)/eta),          c =  sqrt(1/eta - e^{2r})
    p:  a = e^{-2r},    b = -e^{-2r} sqrt((1-eta)/eta),  c = -e^{-2r} sqrt(1/eta - e^{2r})

The discrete system has the closed-loop transfer functions of the continuous
loop evaluated at ``Omega = Omega_0 + omega``, so white input noise with
per-sample covariance ``V / dt`` reproduces the closed-form spectra without
aliasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numba
import numpy as np

from . import errors as E
from .config import OscillatorConfig, PhaseSensitive, SaturatingTanh, config_hash, validate_config
from .gaussian import P0, PG, Q0, QG, input_covariance
from .psd import LorentzianFit, PsdEstimate, fit_lorentzian
from .rng import random_uniform, standard_normals
from .spectra import schawlow_townes

#: Magnitude beyond which the loop is declared unstable.
OVERFLOW_GUARD = 1e150
DEFAULT_BLOCK = 1 << 20


@dataclass(frozen=True)
class SimPlan:
    """Discretization and run length.

    Attributes
    ----------
    dt : time step (s); ``tau / dt`` must be an integer >= 8.
    duration : total steps including warmup (round trips for
        ``mode="classical_startup"``).
    seed : RNG seed.
    warmup : steps discarded from the start; defaults to ``10 * N``.
    mode : ``"linear_fluctuations"`` or ``"classical_startup"``.
    stream : base RNG stream, so independent runs can share a seed.
    """

    dt: float
    duration: int
    seed: int = 0
    warmup: int | None = None
    mode: str = "linear_fluctuations"
    stream: int = 0

    @classmethod
    def from_divisions(cls, tau: float, n: int, steps: int, seed: int = 0, **kw) -> "SimPlan":
        return cls(dt=tau / n, duration=steps, seed=seed, **kw)

    def samples_per_delay(self, tau: float) -> int:
        ratio = tau / self.dt
        n = int(round(ratio))
        if abs(ratio - n) > 1e-9 * ratio or n < 8:
            raise E.ConfigIssue(f"tau/dt = {ratio} must be an integer >= 8")
        return n

    def resolved_warmup(self, tau: float) -> int:
        n = self.samples_per_delay(tau)
        w = 10 * n if self.warmup is None else int(self.warmup)
        if w < 10 * n:
            raise E.ConfigIssue(f"warmup {w} is shorter than 10 delays ({10 * n} steps)")
        return w


@dataclass(frozen=True)
class QuadTimeSeries:
    """Output quadratures after warmup, vacuum units (variance ``1/(2 dt)``
    per sample for vacuum).  A quadrature that was not simulated is ``None``."""

    q_out: np.ndarray | None
    p_out: np.ndarray | None
    dt: float
    config_hash: str = ""

    def __len__(self):
        x = self.q_out if self.q_out is not None else self.p_out
        return 0 if x is None else x.size

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self)) * self.dt


@dataclass(frozen=True)
class StartupResult:
    trajectory: np.ndarray
    converged_step: int
    final: float
    growth_factor: float


@numba.njit(cache=True)
def _loop_kernel(n0, ng, a, b, c, s_out, s_in, buf_x, buf_n, pos, out):
    n = buf_x.size
    for k in range(n0.size):
        x = a * buf_x[pos] + b * buf_n[pos] + c * ng[k]
        if not abs(x) < 1e150:
            return -1
        out[k] = s_out * x + s_in * n0[k]
        buf_x[pos] = x
        buf_n[pos] = n0[k]
        pos += 1
        if pos == n:
            pos = 0
    return pos


def loop_coefficients(eta: float, r: float = 0.0) -> dict[str, tuple[float, float, float]]:
    """``(a, b, c)`` of the recurrence for each quadrature."""
    b0 = -math.sqrt((1 - eta) / eta)
    deficit = max(-math.expm1(2 * r + math.log(eta)) / eta, 0.0)
    c0 = math.sqrt(deficit)
    d = math.exp(-2 * r)
    return {"q": (1.0, b0, c0), "p": (d, d * b0, -d * c0)}


def has_marginal_pole(cfg: OscillatorConfig, quadrature: str) -> bool:
    """Whether ``quadrature`` random-walks (round-trip factor ``a == 1``).

    Such series have a ``1/omega^2`` spectrum at the carrier and are best
    estimated with prewhitening.
    """
    return loop_coefficients(cfg.eta, _squeeze(cfg))[quadrature][0] == 1.0 and cfg.eta < 1


def noise_factor(v: np.ndarray) -> np.ndarray:
    """Factor ``L`` with ``L L^T = v``; Cholesky when possible, else the
    symmetric square root with negative eigenvalues clipped (covers
    singular covariances such as all-zero noise)."""
    try:
        return np.linalg.cholesky(v)
    except np.linalg.LinAlgError:
        lam, u = np.linalg.eigh(v)
        return u * np.sqrt(np.clip(lam, 0, None))


def _mix(z, m):
    """``z @ m.T`` with element-wise arithmetic, so results do not depend on
    how many rows are processed at once (BLAS kernels vary with shape)."""
    return z[:, :1] * m[:, 0] + z[:, 1:] * m[:, 1]


class _NoiseSource:
    """Correlated input noise in (q0, qG, p0, pG) order drawn from two
    counter-based streams, one per quadrature pair."""

    _ORDER = [Q0, QG, P0, PG]

    def __init__(self, cov: np.ndarray, dt: float, seed: int, stream: int):
        v = np.asarray(cov, dtype=float)[np.ix_(self._ORDER, self._ORDER)]
        self.factor = noise_factor(v) / math.sqrt(dt)
        self.coupled = bool(np.any(self.factor[2:, :2] != 0))
        self.seed = seed
        self.streams = (3 * stream, 3 * stream + 1)

    def draw(self, start: int, stop: int, quads) -> dict[str, np.ndarray]:
        need_q = "q" in quads or self.coupled
        need_p = "p" in quads
        m = stop - start
        zq = standard_normals(self.seed, self.streams[0], start, stop, 2) if need_q else None
        zp = standard_normals(self.seed, self.streams[1], start, stop, 2) if need_p else None
        out = {}
        L = self.factor
        if "q" in quads:
            out["q"] = _mix(zq, L[:2, :2])
        if need_p:
            pn = _mix(zp, L[2:, 2:])
            if self.coupled:
                pn = pn + _mix(zq, L[2:, :2])
            out["p"] = pn
        assert all(x.shape == (m, 2) for x in out.values())
        return out


def _squeeze(cfg: OscillatorConfig) -> float:
    return cfg.amplifier.r_s if isinstance(cfg.amplifier, PhaseSensitive) else 0.0


def iter_fluctuations(cfg: OscillatorConfig, plan: SimPlan, quadratures=("q", "p"), *,
                      block: int = DEFAULT_BLOCK, loop_gain_scale: float = 1.0
                      ) -> Iterator[dict[str, np.ndarray]]:
    """Stream the simulation in blocks of at most ``block`` post-warmup samples.

    Yields dictionaries mapping ``"q"``/``"p"`` to output samples.  The
    concatenated output does not depend on ``block``.  ``loop_gain_scale``
    multiplies the round-trip factor ``a`` and exists to exercise the
    instability guard.
    """
    cfg = validate_config(cfg)
    if plan.mode != "linear_fluctuations":
        raise ValueError("plan.mode must be 'linear_fluctuations'")
    n = plan.samples_per_delay(cfg.tau)
    warm = plan.resolved_warmup(cfg.tau)
    if plan.duration <= warm:
        raise E.TooShort(f"duration {plan.duration} does not exceed warmup {warm}")
    quads = tuple(quadratures)
    coeffs = loop_coefficients(cfg.eta, _squeeze(cfg))
    s_out, s_in = math.sqrt(1 - cfg.eta), math.sqrt(cfg.eta)
    noise = _NoiseSource(input_covariance(cfg.input).v, plan.dt, plan.seed, plan.stream)
    state = {k: [np.zeros(n), np.zeros(n), 0] for k in quads}
    start = 0
    while start < plan.duration:
        stop = min(start + block, plan.duration)
        if start < warm < stop:
            stop = warm
        nz = noise.draw(start, stop, quads)
        chunk = {}
        for k in quads:
            a, b, c = coeffs[k]
            bx, bn, pos = state[k]
            out = np.empty(stop - start)
            pos = _loop_kernel(nz[k][:, 0].copy(), nz[k][:, 1].copy(), a * loop_gain_scale, b, c,
                               s_out, s_in, bx, bn, pos, out)
            if pos < 0:
                raise E.UnstableLoop(f"{k} quadrature exceeded {OVERFLOW_GUARD:g}; loop gain mis-set")
            state[k][2] = pos
            chunk[k] = out
        if start >= warm:
            yield chunk
        start = stop


def simulate_fluctuations(cfg: OscillatorConfig, plan: SimPlan, quadratures=("q", "p"), *,
                          block: int = DEFAULT_BLOCK, loop_gain_scale: float = 1.0
                          ) -> QuadTimeSeries:
    """Simulate the linearized loop driven by Gaussian white input noise.

    Input noises have per-sample covariance ``V / dt`` with ``V`` the input
    covariance of ``cfg``.  Returns the output after ``plan.warmup`` steps.

    Raises
    ------
    UnstableLoop
        If the state exceeds :data:`OVERFLOW_GUARD`.
    TooShort
        If ``plan.duration`` does not exceed the warmup.
    """
    parts: dict[str, list] = {k: [] for k in quadratures}
    for chunk in iter_fluctuations(cfg, plan, quadratures, block=block,
                                   loop_gain_scale=loop_gain_scale):
        for k, x in chunk.items():
            parts[k].append(x)
    cat = {k: np.concatenate(v) for k, v in parts.items()}
    return QuadTimeSeries(cat.get("q"), cat.get("p"), plan.dt, config_hash(cfg))


def simulate_classical_startup(model: SaturatingTanh, eta: float, tau: float, plan: SimPlan, *,
                               seed_amplitude: float = 1e-6, tol: float = 1e-12
                               ) -> StartupResult:
    """Iterate the round-trip magnitude map from a small random seed.

    The seed is ``seed_amplitude * (0.5 + U)`` with ``U`` uniform, drawn from
    ``plan.seed``.  ``plan.duration`` counts round trips.  Convergence is
    declared when successive amplitudes differ by less than ``tol``.

    ``growth_factor`` is the mean per-round-trip growth over the first
    iterations, while the amplitude is still below 1% of saturation.

    Raises
    ------
    NotConverged
        If the amplitude has not settled after ``plan.duration`` round trips.
    """
    if not isinstance(model, SaturatingTanh):
        raise E.WrongVariant("classical startup needs a SaturatingTanh model")
    plan.samples_per_delay(tau)
    u = random_uniform(plan.seed, 3 * plan.stream + 2)
    a = seed_amplitude * (0.5 + u)
    se = math.sqrt(eta)
    traj = [a]
    converged = -1
    for k in range(1, plan.duration + 1):
        a_new = se * abs(float(model(a)))
        traj.append(a_new)
        if abs(a_new - a) < tol:
            converged = k
            a = a_new
            break
        a = a_new
    if converged < 0:
        raise E.NotConverged(f"amplitude still moving after {plan.duration} round trips")
    traj = np.array(traj)
    small = traj < 0.01 * model.a_inf * se
    small &= traj > 0
    idx = np.nonzero(small)[0]
    if idx.size >= 2 and idx[0] == 0:
        run = idx[: np.argmax(np.diff(np.append(idx, -1)) != 1) + 1]
        growth = float(np.exp(np.mean(np.diff(np.log(traj[run]))))) if run.size > 1 else math.nan
    else:
        growth = math.nan
    return StartupResult(traj, converged, float(traj[-1]), growth)


# -- linewidth ---------------------------------------------------------------

@dataclass(frozen=True)
class LinewidthResult:
    """Simulated field linewidth against the Schawlow-Townes value.

    ``fwhm_fit`` and ``fwhm_st`` are in rad/s.  ``gamma_t`` is
    ``Gamma_ST * T_run``; ``phase_step_var`` is the diffusive phase variance
    accumulated per time step (rad^2), which must be small for the linearized
    phase to hold.
    """

    fwhm_fit: float
    fwhm_st: float
    gamma_t: float
    phase_step_var: float
    alpha_sq: float
    fit: LorentzianFit
    spectrum: PsdEstimate = field(repr=False)

    @property
    def rel_error(self) -> float:
        return self.fwhm_fit / self.fwhm_st - 1


def linewidth_alpha_sq(eta: float, tau: float, t_run: float, gamma_t: float = 30.0) -> float:
    """Output flux giving ``Gamma_ST * t_run = gamma_t``."""
    return (1 - eta) ** 2 * t_run / (2 * tau ** 2 * 2 * math.pi * gamma_t)


def measure_linewidth(cfg: OscillatorConfig, *, dt_div: int = 8, steps: int = 1 << 24,
                      runs: int = 16, decimation: int = 64, seed: int = 0,
                      gamma_t: float | None = 30.0, band_widths: float = 20.0,
                      block: int = DEFAULT_BLOCK) -> LinewidthResult:
    """Fit the Lorentzian line of the simulated output field.

    Each run simulates the phase quadrature, box-car averages it down by
    ``decimation``, forms the field ``exp(i p_out / (sqrt(2) |alpha|))`` and
    takes its periodogram.  Averaging before exponentiating restricts the
    phase to the neighbourhood of the carrier: with frequency-independent gain
    every longitudinal mode ``omega = 2 pi m / tau`` is marginally sustained
    and its phase-quadrature random walk would otherwise modulate the field.
    The box-car spans whole delays, so its nulls fall on those modes. ``runs`` independent
    periodograms are averaged and fitted over ``|omega| <= band_widths * fwhm_st``.

    With ``gamma_t`` set, ``alpha_sq`` is chosen so that ``Gamma_ST * T_run``
    equals it; pass ``None`` to keep ``cfg.alpha_sq``.
    """
    cfg = validate_config(cfg)
    if decimation % dt_div:
        raise ValueError("decimation must be a multiple of dt_div (whole delays)")
    dt = cfg.tau / dt_div
    plan = SimPlan(dt=dt, duration=steps, seed=seed)
    warm = plan.resolved_warmup(cfg.tau)
    n_keep = steps - warm
    n_keep -= n_keep % decimation
    t_run = n_keep * dt
    alpha_sq = linewidth_alpha_sq(cfg.eta, cfg.tau, t_run, gamma_t) if gamma_t else cfg.alpha_sq
    st = schawlow_townes(cfg.eta, cfg.tau, alpha_sq)
    scale = 1 / math.sqrt(2 * alpha_sq)
    m = n_keep // decimation
    acc = np.zeros(m)
    for run in range(runs):
        p = replace(plan, stream=run)
        field_dec = np.empty(m, dtype=complex)
        pos = 0
        carry = np.empty(0)
        for chunk in iter_fluctuations(cfg, p, ("p",), block=block):
            x = np.concatenate([carry, chunk["p"]])
            usable = min(x.size - x.size % decimation, (m - pos) * decimation)
            f = np.exp(1j * scale * x[:usable].reshape(-1, decimation).mean(axis=1))
            field_dec[pos:pos + f.size] = f
            pos += f.size
            carry = x[usable:]
            if pos == m:
                break
        acc += np.abs(np.fft.fft(field_dec)) ** 2
    dt_dec = dt * decimation
    psd = np.fft.fftshift(acc / runs * dt_dec / m)
    freqs = np.fft.fftshift(np.fft.fftfreq(m, dt_dec)) * 2 * np.pi
    est = PsdEstimate(freqs, psd, runs, 1 / math.sqrt(runs), dt_dec, 1.0)
    fit = fit_lorentzian(est, (0.0, band_widths * st.s_phidot))
    return LinewidthResult(
        fwhm_fit=fit.fwhm, fwhm_st=st.fwhm_rad_s, gamma_t=st.linewidth_fwhm * t_run,
        phase_step_var=st.s_phidot * dt, alpha_sq=alpha_sq, fit=fit, spectrum=est)
