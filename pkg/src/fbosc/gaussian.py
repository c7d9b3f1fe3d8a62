"""Gaussian input states of the in-coupled and ancillary modes.

Covariances are vacuum-normalized (vacuum variance 1/2 per quadrature) and
ordered as :data:`QUADRATURE_ORDER`.  The input states are taken to be
frequency independent, so a covariance doubles as the input spectral matrix
at every frequency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import errors as E
from .config import InputStateParams

QUADRATURE_ORDER = ("q0", "p0", "qG", "pG")
Q0, P0, QG, PG = range(4)

#: Smallest admissible eigenvalue of ``v + (i/2) Sigma``.
PHYSICALITY_TOL = 1e-10

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])
#: Two-mode symplectic form in :data:`QUADRATURE_ORDER`.
SYMPLECTIC_FORM = np.block([[_J, np.zeros((2, 2))], [np.zeros((2, 2)), _J]])


@dataclass(frozen=True)
class InputCovariance:
    """Real symmetric 4x4 covariance ``v`` in (q0, p0, qG, pG) order."""

    v: np.ndarray

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        if v.shape != (4, 4):
            raise ValueError(f"covariance must be 4x4, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @classmethod
    def vacuum(cls) -> "InputCovariance":
        return cls(0.5 * np.eye(4))

    # blocks entering the output spectra
    @property
    def q_block(self) -> np.ndarray:
        """2x2 covariance of (q0, qG)."""
        return self.v[np.ix_([Q0, QG], [Q0, QG])]

    @property
    def p_block(self) -> np.ndarray:
        """2x2 covariance of (p0, pG)."""
        return self.v[np.ix_([P0, PG], [P0, PG])]

    @property
    def has_qp_correlations(self) -> bool:
        return bool(np.any(self.v[np.ix_([Q0, QG], [P0, PG])] != 0))


def _I(x, y, z):
    sh2, ch2 = math.sinh(z) ** 2, math.cosh(z) ** 2
    return 0.5 * np.diag([math.exp(x) * sh2 + math.exp(y) * ch2,
                          math.exp(-x) * sh2 + math.exp(-y) * ch2])


def _Z(x, y, z):
    sh = math.sinh(z)
    return 0.25 * np.diag([(math.exp(x) + math.exp(y)) * sh,
                           -(math.exp(-x) + math.exp(-y)) * sh])


def input_covariance(params: InputStateParams) -> InputCovariance:
    """Covariance of single-mode squeezing ``r0``, ``rG`` followed by two-mode
    squeezing ``rE``.

    Block form::

        [[ I(2 rG, 2 r0, rE/2),  Z(2 r0, 2 rG, rE) ],
         [ Z^T,                  I(2 r0, 2 rG, rE/2) ]]

    with ``I(x, y, z) = 1/2 diag(e^x sh^2 z + e^y ch^2 z, e^-x sh^2 z + e^-y ch^2 z)``
    and ``Z(x, y, z) = 1/4 diag((e^x + e^y) sh z, -(e^-x + e^-y) sh z)``.

    An explicit ``params.covariance`` is returned as is.
    """
    if params.covariance is not None:
        return InputCovariance(np.asarray(params.covariance, dtype=float))
    r0, rG, rE = params.r0, params.rG, params.rE
    if not all(math.isfinite(x) for x in (r0, rG, rE)):
        raise E.NonFiniteParameter("squeeze parameters must be finite")
    z = _Z(2 * r0, 2 * rG, rE)
    v = np.block([[_I(2 * rG, 2 * r0, rE / 2), z], [z.T, _I(2 * r0, 2 * rG, rE / 2)]])
    return InputCovariance(v)


@dataclass(frozen=True)
class Validity:
    valid: bool
    min_eigenvalue: float
    borderline: bool = False


def covariance_validity(cov: InputCovariance | np.ndarray,
                        tol: float = PHYSICALITY_TOL) -> Validity:
    """Check the uncertainty principle ``v + (i/2) Sigma >= 0``.

    Returns the smallest eigenvalue of the hermitian matrix.  States whose
    smallest eigenvalue lies in ``[-tol, 0)`` beyond rounding level are valid but flagged
    ``borderline`` (with a warning).

    Raises
    ------
    NotSymmetric
        If ``v`` is not symmetric to within ``1e-14`` (scaled by its largest
        entry when that exceeds one).
    """
    v = cov.v if isinstance(cov, InputCovariance) else np.asarray(cov, dtype=float)
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.max(np.abs(v - v.T)) > 1e-14 * scale:
        raise E.NotSymmetric("covariance matrix is not symmetric")
    lam = float(np.linalg.eigvalsh(v + 0.5j * SYMPLECTIC_FORM)[0])
    valid = lam >= -tol
    # rounding alone leaves eigenvalues of order 1e-16 below zero
    borderline = valid and lam < -1e-13 * scale
    if borderline:
        warnings.warn(f"covariance is borderline physical (min eigenvalue {lam:.3g})",
                      RuntimeWarning, stacklevel=2)
    return Validity(valid, lam, borderline)
