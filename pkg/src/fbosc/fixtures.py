"""Built-in configurations used by the verification suite and the demos."""

from __future__ import annotations

import math

from .config import (InputStateParams, LinearInsensitive, OscillatorConfig, PhaseSensitive,
                     SaturatingTanh)


def db_to_r(db: float) -> float:
    """Squeeze parameter for ``db`` decibels of squeezing, ``r = ln(10^(db/20))``."""
    return math.log(10 ** (db / 20))


R12 = db_to_r(12.0)
TAU = 1e-8

BUILTIN: dict[str, OscillatorConfig] = {
    "tanh": OscillatorConfig(0.25, TAU, 1e16, SaturatingTanh(4.0, 1.0)),
    "vacuum": OscillatorConfig(0.25, TAU, 1e16, LinearInsensitive(2.0)),
    "squeezed_12db": OscillatorConfig(0.25, TAU, 1e16, LinearInsensitive(2.0),
                                      InputStateParams(r0=R12, rG=R12)),
    "epr_12db": OscillatorConfig(0.25, TAU, 1e16, LinearInsensitive(2.0),
                                 InputStateParams(rE=R12)),
    "phase_sensitive": OscillatorConfig(0.25, TAU, 1e16, PhaseSensitive(1.0, math.log(2))),
    "epr_optimum": OscillatorConfig(0.5, TAU, 1e16, LinearInsensitive(1 / math.sqrt(0.5)),
                                    InputStateParams(rE=math.log(0.5))),
    "lossless": OscillatorConfig(1.0, TAU, 1e16, SaturatingTanh(4.0, 1.0)),
    "high_q": OscillatorConfig(0.99, TAU, 1e16, LinearInsensitive(1 / math.sqrt(0.99))),
}

#: The four variants compared against the time-domain simulator.
MONTE_CARLO = ("vacuum", "squeezed_12db", "epr_12db", "phase_sensitive")
