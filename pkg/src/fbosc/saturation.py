"""Classical steady state of the saturating loop.

The round-trip magnitude map is ``alpha -> sqrt(eta) * |A(alpha)|``.  Above
threshold (``sqrt(eta) * A'(0) > 1``) the zero state is unstable and the map
has a positive fixed point where the linearized gain ``A(alpha)/alpha``
equals the loss ``1/sqrt(eta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import errors as E
from .config import SaturatingTanh

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class SteadyState:
    """Positive fixed point of the round-trip map.

    Attributes
    ----------
    alpha_ss : in-loop steady amplitude.
    g_linear : ``A(alpha_ss) / alpha_ss``.
    contraction : ``alpha_ss * A'(alpha_ss) / A(alpha_ss)``; below one for a
        stable fixed point.
    residual : ``|sqrt(eta) A(alpha_ss) - alpha_ss|``.
    other_roots : further positive roots found while bracketing (empty for
        the tanh family).
    """

    alpha_ss: float
    g_linear: float
    contraction: float
    residual: float = 0.0
    other_roots: tuple[float, ...] = field(default=())


def _require_tanh(model) -> SaturatingTanh:
    if not isinstance(model, SaturatingTanh):
        raise E.WrongVariant(f"expected a SaturatingTanh model, got {type(model).__name__}")
    return model


def evaluate_gain(model, x):
    """``A(x) = a_inf * tanh(g0 * x / a_inf)``."""
    return _require_tanh(model)(x)


def _derivative(model: Callable, x: float, h: float = 1e-7) -> float:
    d = getattr(model, "derivative", None)
    if d is not None:
        return float(d(x))
    return (float(model(x + h)) - float(model(x - h))) / (2 * h)


def _bisect_secant(f, lo: float, hi: float, tol: float, maxiter: int) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise E.ToleranceNotMet("root is not bracketed")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if flo * fm < 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-6 * max(hi, 1e-300):
            break
    # secant polish from the bracket ends, kept inside the bracket
    x0, x1, f0, f1 = lo, hi, flo, fhi
    best = lo if abs(flo) < abs(fhi) else hi
    for _ in range(maxiter):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not lo <= x2 <= hi:
            x2 = 0.5 * (lo + hi)
        f2 = f(x2)
        if abs(f2) < abs(f(best)):
            best = x2
        if abs(f2) <= tol * 1e-3 or f2 == 0:
            return x2
        if flo * f2 < 0:
            hi, fhi = x2, f2
        else:
            lo, flo = x2, f2
        x0, f0, x1, f1 = x1, f1, x2, f2
    return best


def steady_state_amplitude(model, eta: float, tol: float = DEFAULT_TOL, *,
                           upper: float | None = None, maxiter: int = 200,
                           scan_points: int = 2048) -> SteadyState:
    """Positive root of ``sqrt(eta) * A(alpha) = alpha``.

    Parameters
    ----------
    model
        A :class:`SaturatingTanh` or any callable that is odd, increasing and
        bounded.  Generic callables need ``upper`` (an amplitude beyond which
        ``sqrt(eta) A(alpha) < alpha``) unless they expose ``a_inf``.
    eta
        Out-coupler power reflectivity.
    tol
        Absolute tolerance on the fixed-point residual.

    Raises
    ------
    NoPositiveRoot
        Below threshold, where only the zero fixed point exists.
    ToleranceNotMet
        If the residual cannot be driven below ``tol``.
    """
    se = math.sqrt(eta)
    f = lambda a: se * float(model(a)) - a  # noqa: E731
    slope0 = _derivative(model, 0.0)
    if se * slope0 <= 1:
        raise E.NoPositiveRoot(
            f"small-signal round-trip gain sqrt(eta)*A'(0)={se * slope0:.6g} does not exceed 1")
    if upper is None:
        a_inf = getattr(model, "a_inf", None)
        if a_inf is None:
            raise ValueError("generic gain models need an explicit upper bracket")
        upper = a_inf * se * (1 + 1e-6)
    if f(upper) >= 0:
        raise E.ToleranceNotMet(f"no sign change below upper bracket {upper}")

    # scan for every sign change so that gain profiles with several positive
    # roots are reported rather than silently resolved
    grid = np.unique(np.concatenate([
        np.geomspace(upper * 1e-9, upper, scan_points // 2),
        np.linspace(0, upper, scan_points // 2)[1:],
    ]))
    fg = se * np.asarray(model(grid), dtype=float) - grid
    idx = np.nonzero(np.sign(fg[:-1]) * np.sign(fg[1:]) < 0)[0]
    if idx.size == 0:
        raise E.NoPositiveRoot("no sign change of sqrt(eta)*A(alpha) - alpha found")
    roots = [_bisect_secant(f, grid[i], grid[i + 1], tol, maxiter) for i in idx]
    # the outermost root is the one the loop saturates to from a small seed
    alpha = roots[-1]
    res = abs(f(alpha))
    if res > tol:
        raise E.ToleranceNotMet(f"fixed-point residual {res:.3g} exceeds tol {tol:.3g}")
    a_val = float(model(alpha))
    return SteadyState(
        alpha_ss=alpha,
        g_linear=a_val / alpha,
        contraction=alpha * _derivative(model, alpha) / a_val,
        residual=res,
        other_roots=tuple(roots[:-1]),
    )


def stability_margin(model, eta: float, alpha: float) -> float:
    """Contraction factor ``alpha * A'(alpha) / A(alpha)`` of the magnitude map.

    ``eta`` is accepted for symmetry with the other calls; at the fixed point
    the factor equals the map slope ``sqrt(eta) A'(alpha)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    return alpha * _derivative(model, alpha) / float(model(alpha))


def zero_point_growth(model, eta: float) -> float:
    """Per-round-trip growth ``sqrt(eta) * A'(0)`` of an infinitesimal seed."""
    return math.sqrt(eta) * _derivative(model, 0.0)


def iterate_loop_map(model, eta: float, alpha0: float, n: int) -> np.ndarray:
    """Amplitudes ``|alpha_k|``, ``k = 0..n``, under the round-trip map."""
    if alpha0 < 0:
        raise ValueError("alpha0 must be >= 0")
    se = math.sqrt(eta)
    out = np.empty(n + 1)
    a = float(alpha0)
    out[0] = a
    for k in range(1, n + 1):
        a = se * abs(float(model(a)))
        out[k] = a
    return out
