"""Quantum-noise spectra, linewidths and uncertainty bounds of feedback oscillators."""

from __future__ import annotations

__version__ = "0.1.0"

from .config import (FrequencyGrid, InputStateParams, LinearInsensitive, OscillatorConfig,
                     PhaseSensitive, SaturatingTanh, ValidatedConfig, load_config, r_max,
                     validate_config)
from .gaussian import QUADRATURE_ORDER, InputCovariance, covariance_validity, input_covariance
from .saturation import (SteadyState, evaluate_gain, iterate_loop_map, stability_margin,
                         steady_state_amplitude, zero_point_growth)
from .spectra import (QuadratureSpectra, frequency_noise_spectrum, output_spectra_epr_exact,
                      output_spectra_general, output_spectra_phase_sensitive,
                      output_spectra_sqz_epr_near_carrier, output_spectra_vacuum_closed_form,
                      schawlow_townes, uncertainty_bounds)
from .transfer import (InsensitiveTransfer, QuadTransfer, commutator_residual,
                       decompose_phase_sensitive, transfer_insensitive,
                       transfer_near_resonance, transfer_phase_sensitive)

__all__ = [
    "FrequencyGrid", "InputStateParams", "LinearInsensitive", "OscillatorConfig",
    "PhaseSensitive", "SaturatingTanh", "ValidatedConfig", "load_config", "r_max",
    "validate_config", "QUADRATURE_ORDER", "InputCovariance", "covariance_validity",
    "input_covariance", "SteadyState", "evaluate_gain", "iterate_loop_map",
    "stability_margin", "steady_state_amplitude", "zero_point_growth", "QuadratureSpectra",
    "frequency_noise_spectrum", "output_spectra_epr_exact", "output_spectra_general",
    "output_spectra_phase_sensitive", "output_spectra_sqz_epr_near_carrier",
    "output_spectra_vacuum_closed_form", "schawlow_townes", "uncertainty_bounds",
    "InsensitiveTransfer", "QuadTransfer", "commutator_residual", "decompose_phase_sensitive",
    "transfer_insensitive", "transfer_near_resonance", "transfer_phase_sensitive",
]
