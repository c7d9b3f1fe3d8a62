"""Oscillation build-up from a tiny seed amplitude.

A saturating tanh amplifier with small-signal gain 4 behind an out-coupler
with eta = 0.25 doubles a small amplitude every round trip until saturation
balances the loss.  The trajectory settles on the steady-state root, where
the linearized gain equals the loss.

Run: python3 demos/startup.py
"""

from __future__ import annotations

from fbosc.config import SaturatingTanh
from fbosc.saturation import steady_state_amplitude
from fbosc.timedomain import SimPlan, simulate_classical_startup


def main():
    model, eta, tau = SaturatingTanh(4.0, 1.0), 0.25, 1e-8
    res = simulate_classical_startup(model, eta, tau, SimPlan(tau / 16, 200, seed=0))
    ss = steady_state_amplitude(model, eta)
    for k in range(0, res.trajectory.size, 3):
        print(f"round trip {k:3d}  amplitude {res.trajectory[k]:.6e}")
    print(f"converged after {res.converged_step} round trips at {res.final:.12f}")
    print(f"steady state {ss.alpha_ss:.12f}, contraction {ss.contraction:.4f}, "
          f"early growth {res.growth_factor:.4f} per round trip")


if __name__ == "__main__":
    main()
