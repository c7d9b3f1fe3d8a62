"""Welch spectral estimation and Lorentzian line fitting.

Estimates are double sided and normalized per Hz: white noise of variance
``s2`` per sample of spacing ``dt`` has PSD ``s2 * dt``.  Frequencies are
angular (rad/s) and sorted ascending.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

from . import errors as E

_WINDOWS = {"hann": "hann", "rectangular": "boxcar"}


@dataclass(frozen=True)
class PsdEstimate:
    """Averaged periodogram.

    Attributes
    ----------
    freqs : angular frequencies (rad/s), ascending.
    psd : spectral density, same units as the series squared times seconds.
    n_segments : number of averaged segments.
    rel_stderr : nominal relative standard error per bin, ``1/sqrt(n_segments)``.
    parseval_ratio : integrated PSD over the mean square of the analysed series
        (the differenced series when ``prewhitened``).
    """

    freqs: np.ndarray
    psd: np.ndarray
    n_segments: int
    rel_stderr: float
    dt: float
    parseval_ratio: float
    prewhitened: bool = False

    @property
    def stderr(self) -> np.ndarray:
        return self.psd * self.rel_stderr


def _welch(x, dt, L, overlap, window):
    noverlap = int(round(overlap * L))
    f, p = signal.welch(x, fs=1 / dt, window=_WINDOWS[window], nperseg=L, noverlap=noverlap,
                        detrend=False, return_onesided=False, scaling="density")
    order = np.argsort(f)
    step = L - noverlap
    nseg = (len(x) - noverlap) // step
    return 2 * np.pi * f[order], p[order], nseg


def estimate_psd(series, segment_len: int | None = None, overlap_fraction: float = 0.5,
                 window: str = "hann", *, dt: float | None = None, quadrature: str = "p",
                 prewhiten: bool = False) -> PsdEstimate:
    """Welch estimate of a (real or complex) series.

    Parameters
    ----------
    series
        A :class:`~fbosc.timedomain.QuadTimeSeries` (``quadrature`` picks
        ``"q"`` or ``"p"``) or a 1-D array together with ``dt``.
    segment_len
        Samples per segment; defaults to ``len // 8``.
    window
        ``"hann"`` or ``"rectangular"``.
    prewhiten
        Estimate the spectrum of the first difference and divide by
        ``4 sin^2(omega dt / 2)``.  Suppresses leakage from a steep low
        frequency rise (a random walk); the zero-frequency bin is dropped.

    Raises
    ------
    TooShort
        If the series is shorter than one segment.
    """
    if hasattr(series, "q_out"):
        dt = series.dt
        x = series.q_out if quadrature == "q" else series.p_out
    else:
        x = series
    if dt is None:
        raise ValueError("dt is required for a bare array")
    if window not in _WINDOWS:
        raise ValueError(f"window must be one of {sorted(_WINDOWS)}")
    if not 0 <= overlap_fraction < 1:
        raise ValueError("overlap_fraction must lie in [0, 1)")
    x = np.asarray(x)
    n = x.size - (1 if prewhiten else 0)
    if segment_len is None:
        segment_len = max(n // 8, 2)
    if segment_len < 2 or n < segment_len:
        raise E.TooShort(f"series of {x.size} samples is shorter than segment length {segment_len}")
    y = np.diff(x) if prewhiten else x
    w, p, nseg = _welch(y, dt, segment_len, overlap_fraction, window)
    df = 1 / (segment_len * dt)
    parseval = float(np.sum(p) * df / np.mean(np.abs(y) ** 2)) if np.any(y) else 1.0
    if prewhiten:
        keep = w != 0
        w = w[keep]
        p = p[keep] / (4 * np.sin(0.5 * w * dt) ** 2)
    return PsdEstimate(w, p, nseg, 1 / math.sqrt(nseg), dt, parseval, prewhiten)


def parseval_ratio(x, est: PsdEstimate) -> float:
    """Integrated PSD of a non-prewhitened estimate over the mean square of ``x``."""
    df = (est.freqs[1] - est.freqs[0]) / (2 * np.pi)
    return float(np.sum(est.psd) * df / np.mean(np.abs(np.asarray(x)) ** 2))


def band_mask(freqs, band) -> np.ndarray:
    lo, hi = band
    a = np.abs(freqs)
    return (a >= lo) & (a <= hi)


def rms_relative_error(est: PsdEstimate, reference, band) -> float:
    """RMS of ``est/reference - 1`` over bins with ``lo <= |omega| <= hi``.

    ``reference`` is a callable of angular frequency or an array on ``est.freqs``.
    """
    m = band_mask(est.freqs, band)
    if not np.any(m):
        raise ValueError("no estimate bins inside the band")
    ref = reference(est.freqs[m]) if callable(reference) else np.asarray(reference)[m]
    return float(np.sqrt(np.mean((est.psd[m] / ref - 1) ** 2)))


@dataclass(frozen=True)
class LorentzianFit:
    """``a / (omega^2 + (fwhm/2)^2) + floor``; ``peak`` is the Lorentzian height
    ``a / (fwhm/2)^2`` above the floor, ``residual`` the RMS relative misfit."""

    fwhm: float
    peak: float
    floor: float
    residual: float


def _lorentz(w, log_a, log_hw, c):
    return np.exp(log_a) / (w ** 2 + np.exp(2 * log_hw)) + c


def fit_lorentzian(psd: PsdEstimate, band: tuple[float, float] | None = None, *,
                   iterations: int = 3, min_contrast: float = 0.5) -> LorentzianFit:
    """Weighted least-squares Lorentzian fit centred on zero frequency.

    Periodogram scatter is proportional to the spectrum itself, so each pass
    weights the residuals by the previous model.

    Parameters
    ----------
    band
        ``(lo, hi)`` on ``|omega|``; all bins by default.
    min_contrast
        Smallest smoothed peak excess over the band median, relative to the
        median, that counts as a line.

    Raises
    ------
    FlatSpectrum
        If the band shows no discernible peak.
    FitDiverged
        If the optimizer fails or returns a non-physical width.
    """
    if band is None:
        band = (0.0, float(np.max(np.abs(psd.freqs))))
    m = band_mask(psd.freqs, band)
    w, p = psd.freqs[m], psd.psd[m]
    if w.size < 10:
        raise E.TooShort(f"band holds {w.size} bins, need at least 10")
    if np.any(p <= 0):
        raise E.FitDiverged("PSD must be positive inside the fit band")
    order = np.argsort(np.abs(w), kind="stable")
    smooth = np.convolve(p[order], np.ones(5) / 5, mode="same")
    med = float(np.median(p))
    head = float(np.max(smooth[:max(5, w.size // 20)]))
    if (head - med) / med < min_contrast:
        raise E.FlatSpectrum("no discernible peak in the fit band")
    floor0 = float(np.median(p[np.abs(w) > np.quantile(np.abs(w), 0.8)]))
    top = max(head - floor0, head * 1e-3)
    half = np.abs(w)[order][np.argmax(smooth < floor0 + 0.5 * top)]
    hw0 = max(half, np.min(np.abs(w[w != 0])) if np.any(w != 0) else 1.0)
    params = np.array([math.log(top * hw0 ** 2), math.log(hw0), floor0])
    try:
        for _ in range(iterations):
            sigma = _lorentz(w, *params)
            params, _ = optimize.curve_fit(_lorentz, w, p, p0=params, sigma=sigma,
                                           absolute_sigma=False, maxfev=20000)
    except (RuntimeError, ValueError, optimize.OptimizeWarning) as exc:
        raise E.FitDiverged(f"Lorentzian fit failed: {exc}") from exc
    log_a, log_hw, c = params
    fwhm = 2 * math.exp(log_hw)
    if not np.all(np.isfinite(params)) or not fwhm < 2 * band[1]:
        raise E.FitDiverged(f"fit returned a non-physical width {fwhm}")
    model = _lorentz(w, *params)
    resid = float(np.sqrt(np.mean((p / model - 1) ** 2)))
    return LorentzianFit(fwhm, math.exp(log_a - 2 * log_hw), float(c), resid)
