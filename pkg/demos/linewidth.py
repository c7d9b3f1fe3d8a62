"""Field linewidth from simulated phase noise.

For a high-Q loop (eta = 0.99) the output flux is chosen so that the
Schawlow-Townes linewidth times the record length is about 30.  The phase
quadrature is averaged over whole delays, turned into the field
exp(i phi), and its averaged periodogram is fitted with a Lorentzian whose
width is compared with the Schawlow-Townes value.  Takes about 20 s.

Run: python3 demos/linewidth.py
"""

from __future__ import annotations

from fbosc.fixtures import BUILTIN
from fbosc.timedomain import measure_linewidth


def main():
    res = measure_linewidth(BUILTIN["high_q"], seed=0)
    print(f"output flux used          {res.alpha_sq:.4g} photons/s")
    print(f"Gamma_ST x record length  {res.gamma_t:.1f}")
    print(f"phase variance per step   {res.phase_step_var:.2e} rad^2")
    print(f"fitted FWHM               {res.fwhm_fit:.5g} rad/s")
    print(f"Schawlow-Townes FWHM      {res.fwhm_st:.5g} rad/s")
    print(f"relative difference       {res.rel_error:+.3f}")


if __name__ == "__main__":
    main()
