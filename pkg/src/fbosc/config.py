"""Oscillator configuration, amplifier models and validation.

All quantities are SI: seconds for delays, rad/s for angular frequencies,
photons per second for the output flux ``alpha_sq``.  Field amplitudes of the
saturating amplifier are dimensionless.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np

from . import errors as E

#: Absolute slack allowed when comparing a squeeze parameter with ``r_max``.
RMAX_SLACK = 1e-12


@dataclass(frozen=True)
class SaturatingTanh:
    """Saturating gain ``A(x) = a_inf * tanh(g0 * x / a_inf)``.

    Odd, strictly increasing, slope ``g0`` at the origin and asymptote
    ``+-a_inf``.
    """

    g0: float
    a_inf: float

    def __call__(self, x):
        return self.a_inf * np.tanh(self.g0 * np.asarray(x, dtype=float) / self.a_inf)

    def derivative(self, x):
        u = self.g0 * np.asarray(x, dtype=float) / self.a_inf
        return self.g0 / np.cosh(u) ** 2

    @property
    def small_signal_gain(self) -> float:
        return self.g0


@dataclass(frozen=True)
class LinearInsensitive:
    """Phase-insensitive linear amplifier with power-law gain ``g`` (>= 1)."""

    g: float


@dataclass(frozen=True)
class PhaseSensitive:
    """Phase-insensitive gain ``g`` followed by a noiseless squeezer ``r_s``."""

    g: float
    r_s: float
    phi_s: float = 0.0


AmplifierModel = Union[SaturatingTanh, LinearInsensitive, PhaseSensitive]

_VARIANTS = {
    "saturating_tanh": SaturatingTanh,
    "linear_insensitive": LinearInsensitive,
    "phase_sensitive": PhaseSensitive,
}
_VARIANT_NAMES = {cls: name for name, cls in _VARIANTS.items()}


@dataclass(frozen=True)
class InputStateParams:
    """Squeezing of the in-coupled (``r0``) and ancillary (``rG``) modes and
    their two-mode squeezing ``rE``.  ``(0, 0, 0)`` is the joint vacuum.

    ``covariance`` optionally overrides the covariance built from the squeeze
    parameters (4x4 nested tuple, quadrature order q0, p0, qG, pG); it exists
    for debugging and for exercising the physicality checks.
    """

    r0: float = 0.0
    rG: float = 0.0
    rE: float = 0.0
    covariance: tuple | None = None

    @property
    def is_vacuum(self) -> bool:
        return self.covariance is None and self.r0 == 0 and self.rG == 0 and self.rE == 0


@dataclass(frozen=True)
class OscillatorConfig:
    eta: float
    tau: float
    alpha_sq: float
    amplifier: AmplifierModel
    input: InputStateParams = InputStateParams()
    carrier_index: int = 0

    @property
    def kappa(self) -> float:
        """Loss rate ``-ln(eta)/tau`` (non-negative)."""
        return -math.log(self.eta) / self.tau + 0.0  # no negative zero at eta = 1

    @property
    def carrier(self) -> float:
        """Carrier angular frequency ``(2n+1) pi / tau``."""
        return (2 * self.carrier_index + 1) * math.pi / self.tau

    @property
    def r_max(self) -> float:
        return r_max(self.eta)

    @property
    def linear_gain(self) -> float:
        """Steady-state gain of the phase-insensitive stage ("gain = loss")."""
        r = self.amplifier.r_s if isinstance(self.amplifier, PhaseSensitive) else 0.0
        return math.exp(-r) / math.sqrt(self.eta)

    @property
    def squeeze(self) -> float:
        return self.amplifier.r_s if isinstance(self.amplifier, PhaseSensitive) else 0.0


@dataclass(frozen=True)
class ValidatedConfig(OscillatorConfig):
    """An :class:`OscillatorConfig` that passed :func:`validate_config`.

    Derived fields are stored so they can be reported without recomputation.
    """

    kappa_: float = field(default=0.0, repr=False)
    carrier_: float = field(default=0.0, repr=False)
    r_max_: float = field(default=0.0, repr=False)


def r_max(eta: float) -> float:
    """Largest in-loop squeeze parameter the loop can sustain, ``-ln(eta)/2``."""
    return -0.5 * math.log(eta) + 0.0


def _finite(*xs) -> bool:
    return all(isinstance(x, (int, float)) and math.isfinite(x) for x in xs)


def _amplifier_issues(amp, eta: float) -> list[E.ConfigIssue]:
    issues: list[E.ConfigIssue] = []
    eta_ok = _finite(eta) and 0 < eta <= 1
    if isinstance(amp, SaturatingTanh):
        if not _finite(amp.g0, amp.a_inf):
            return [E.NonFiniteParameter("g0 and a_inf must be finite")]
        if amp.a_inf <= 0:
            issues.append(E.NonPositiveParameter(f"a_inf={amp.a_inf} must be > 0"))
        if amp.g0 <= 0:
            issues.append(E.NonPositiveParameter(f"g0={amp.g0} must be > 0"))
        elif eta_ok and amp.g0 <= 1 / math.sqrt(eta):
            issues.append(E.GainBelowLoss(
                f"small-signal gain g0={amp.g0} must exceed 1/sqrt(eta)={1 / math.sqrt(eta):.6g}"))
    elif isinstance(amp, LinearInsensitive):
        if not _finite(amp.g):
            return [E.NonFiniteParameter("g must be finite")]
        if amp.g < 1:
            issues.append(E.GainBelowUnity(f"g={amp.g} must be >= 1"))
    elif isinstance(amp, PhaseSensitive):
        if not _finite(amp.g, amp.r_s, amp.phi_s):
            return [E.NonFiniteParameter("g, r_s and phi_s must be finite")]
        if amp.g < 1:
            issues.append(E.GainBelowUnity(f"g={amp.g} must be >= 1"))
        if amp.r_s < 0:
            issues.append(E.NegativeSqueeze(f"r_s={amp.r_s} must be >= 0"))
        if eta_ok and amp.r_s > r_max(eta) + RMAX_SLACK:
            issues.append(E.SqueezeExceedsRmax(
                f"r_s={amp.r_s} exceeds r_max=-ln(eta)/2={r_max(eta):.6g}"))
        if amp.phi_s != 0:
            issues.append(E.NonzeroSqueezeAngle("only phi_s = 0 is supported"))
    else:
        issues.append(E.WrongVariant(f"unknown amplifier model {amp!r}"))
    return issues


def config_issues(cfg: OscillatorConfig) -> list[E.FboscError]:
    """Every violated invariant of ``cfg`` (empty when valid)."""
    issues: list[E.FboscError] = []
    if not (_finite(cfg.eta) and 0 < cfg.eta <= 1):
        issues.append(E.EtaOutOfRange(f"eta={cfg.eta} must lie in (0, 1]"))
    if not (_finite(cfg.tau) and cfg.tau > 0):
        issues.append(E.NonPositiveTau(f"tau={cfg.tau} must be > 0"))
    if not _finite(cfg.alpha_sq):
        issues.append(E.NonFiniteParameter("alpha_sq must be finite"))
    elif cfg.alpha_sq < 0:
        issues.append(E.NegativeFlux(f"alpha_sq={cfg.alpha_sq} must be >= 0"))
    if not isinstance(cfg.carrier_index, (int, np.integer)) or isinstance(cfg.carrier_index, bool):
        issues.append(E.ConfigIssue("carrier_index must be an integer"))
    issues.extend(_amplifier_issues(cfg.amplifier, cfg.eta))
    inp = cfg.input
    if not _finite(inp.r0, inp.rG, inp.rE):
        issues.append(E.NonFiniteParameter("r0, rG and rE must be finite"))
    if inp.covariance is not None:
        v = np.asarray(inp.covariance, dtype=float)
        if v.shape != (4, 4) or not np.all(np.isfinite(v)):
            issues.append(E.NonFiniteParameter("covariance must be a finite 4x4 matrix"))
    return issues


def validate_config(cfg: OscillatorConfig) -> ValidatedConfig:
    """Check every invariant and populate the derived fields.

    Raises :class:`~fbosc.errors.InvalidConfig` listing *all* violations.
    Validating an already validated config returns it unchanged.
    """
    if isinstance(cfg, ValidatedConfig):
        return cfg
    issues = config_issues(cfg)
    if issues:
        raise E.InvalidConfig(issues)
    base = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(OscillatorConfig)}
    base["carrier_index"] = int(cfg.carrier_index)
    return ValidatedConfig(**base, kappa_=cfg.kappa, carrier_=cfg.carrier, r_max_=cfg.r_max)


# -- JSON --------------------------------------------------------------------

_TOP_KEYS = {"eta", "tau", "alpha_sq", "amplifier", "input", "carrier_index"}
_INPUT_KEYS = {"r0", "rG", "rE", "covariance"}


def _check_keys(d: dict, allowed: set, where: str) -> list[E.ConfigIssue]:
    return [E.UnknownKey(f"unknown key {k!r} in {where}") for k in sorted(set(d) - allowed)]


def config_from_dict(d: dict[str, Any]) -> OscillatorConfig:
    """Build a config from a JSON-style mapping, rejecting unknown keys."""
    issues = _check_keys(d, _TOP_KEYS, "config")
    missing = {"eta", "tau", "amplifier"} - set(d)
    issues += [E.ConfigIssue(f"missing required key {k!r}") for k in sorted(missing)]
    amp_d = dict(d.get("amplifier", {}))
    variant = amp_d.pop("variant", None)
    cls = _VARIANTS.get(variant)
    amp = None
    if cls is None:
        issues.append(E.WrongVariant(
            f"amplifier.variant must be one of {sorted(_VARIANTS)}, got {variant!r}"))
    else:
        names = {f.name for f in dataclasses.fields(cls)}
        issues += _check_keys(amp_d, names, "amplifier")
        try:
            amp = cls(**{k: float(v) for k, v in amp_d.items() if k in names})
        except TypeError as exc:
            issues.append(E.ConfigIssue(f"amplifier: {exc}"))
    inp_d = dict(d.get("input", {}))
    issues += _check_keys(inp_d, _INPUT_KEYS, "input")
    cov = inp_d.get("covariance")
    if cov is not None:
        cov = tuple(tuple(float(x) for x in row) for row in cov)
    inp = InputStateParams(
        r0=float(inp_d.get("r0", 0.0)), rG=float(inp_d.get("rG", 0.0)),
        rE=float(inp_d.get("rE", 0.0)), covariance=cov)
    if issues:
        raise E.InvalidConfig(issues)
    return OscillatorConfig(
        eta=float(d["eta"]), tau=float(d["tau"]), alpha_sq=float(d.get("alpha_sq", 0.0)),
        amplifier=amp, input=inp, carrier_index=d.get("carrier_index", 0))


def config_to_dict(cfg: OscillatorConfig) -> dict[str, Any]:
    amp = {"variant": _VARIANT_NAMES[type(cfg.amplifier)], **dataclasses.asdict(cfg.amplifier)}
    inp: dict[str, Any] = {"r0": cfg.input.r0, "rG": cfg.input.rG, "rE": cfg.input.rE}
    if cfg.input.covariance is not None:
        inp["covariance"] = [list(row) for row in cfg.input.covariance]
    return {
        "eta": cfg.eta, "tau": cfg.tau, "alpha_sq": cfg.alpha_sq, "amplifier": amp,
        "input": inp, "carrier_index": int(cfg.carrier_index),
    }


def load_config(path: str | Path) -> OscillatorConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def dump_config(cfg: OscillatorConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
        fh.write("\n")


def config_hash(cfg: OscillatorConfig) -> str:
    """Short stable digest of the canonical JSON form."""
    import hashlib

    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- frequency grids ---------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing angular frequencies.

    With ``absolute=False`` the entries are offsets ``omega`` from the carrier
    ``Omega_0``; otherwise they are absolute ``Omega``.
    """

    values: np.ndarray
    absolute: bool = False

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("frequency grid must be a finite 1-D sequence")
        if v.size > 1 and not np.all(np.diff(v) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        object.__setattr__(self, "values", v)

    @classmethod
    def linspace(cls, lo, hi, n, absolute=False):
        return cls(np.linspace(lo, hi, n), absolute)

    @classmethod
    def logspace(cls, lo, hi, n, absolute=False):
        return cls(np.geomspace(lo, hi, n), absolute)

    def __len__(self):
        return self.values.size

    def offsets(self, carrier: float) -> np.ndarray:
        return self.values - carrier if self.absolute else self.values

    def absolute_values(self, carrier: float) -> np.ndarray:
        return self.values if self.absolute else self.values + carrier

    def pole_hits(self, tau: float, guard: float = 1e-9) -> np.ndarray:
        """Mask of entries whose ``|1 + exp(i Omega tau)|`` falls inside ``guard``.

        Offsets are measured from a carrier, so a pole sits at every multiple
        of ``2 pi / tau``; absolute entries hit the odd multiples of ``pi / tau``.
        """
        theta = self.values * tau
        if not self.absolute:
            theta = theta + math.pi
        return np.abs(2 * np.cos(theta / 2)) < guard
