"""
Counting-field tilted 2x2 generator and its dominant eigen-system.

Basis order is (occupied |1>, unoccupied |0>). The counting field lambda
tags exchange with the LEFT reservoir: e^{+lambda} on absorption from the
left bath (beta_left), e^{-lambda} on emission into it (alpha_left).

Gauge: |R0> has components summing to 1 at every lambda, <L0| carries the
biorthogonal normalisation <L0|R0> = 1 and equals (1, 1) at lambda = 0.

Every quantity broadcasts over numpy arrays of lambda, t or temperatures.
"""

import logging
from dataclasses import dataclass

import numpy as np

from apps.pumping.exceptions import DegenerateSpectrumError
from apps.pumping.model import ModelParams
from apps.pumping.model import bath_rates
from apps.pumping.model import rates

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class TiltedGenerator:
    lam: object
    t: object
    alpha_left: object
    beta_left: object
    alpha_right: object
    beta_right: object

    @property
    def exit_occupied(self):
        """a = alpha_left + alpha_right, the decay rate of |1>."""
        return self.alpha_left + self.alpha_right

    @property
    def exit_empty(self):
        """b = beta_left + beta_right, the filling rate of |0>."""
        return self.beta_left + self.beta_right

    @property
    def m00(self):
        return -self.exit_occupied

    @property
    def m01(self):
        return self.beta_left * np.exp(self.lam) + self.beta_right

    @property
    def m10(self):
        return self.alpha_left * np.exp(-np.asarray(self.lam, dtype=float)) + self.alpha_right

    @property
    def m11(self):
        return -self.exit_empty

    @property
    def matrix(self) -> np.ndarray:
        """Entries as an array of shape (..., 2, 2)."""
        m00, m01, m10, m11 = np.broadcast_arrays(self.m00, self.m01, self.m10, self.m11)
        return np.stack([np.stack([m00, m01], axis=-1), np.stack([m10, m11], axis=-1)], axis=-2)


@dataclass(frozen=True)
class EigenSystem:
    zeta0: object
    zeta1: object
    left: np.ndarray
    right: np.ndarray


def build_generator(params: ModelParams, lam, t) -> TiltedGenerator:
    alpha_left, beta_left = rates(params, "left", t)
    alpha_right, beta_right = rates(params, "right", t)
    return TiltedGenerator(lam, t, alpha_left, beta_left, alpha_right, beta_right)


def generator_at(params: ModelParams, lam, T_left, T_right) -> TiltedGenerator:  # noqa: N803
    """Generator at given reservoir temperatures rather than at a drive time."""
    alpha_left, beta_left = bath_rates(params.theta0, params.left, T_left)
    alpha_right, beta_right = bath_rates(params.theta0, params.right, T_right)
    return TiltedGenerator(lam, None, alpha_left, beta_left, alpha_right, beta_right)


def _roots(gen: TiltedGenerator):
    a = gen.exit_occupied
    b = gen.exit_empty
    lam = np.asarray(gen.lam, dtype=float)
    # X = M01*M10 - a*b, written without cancellation at small lambda
    excess = gen.beta_left * gen.alpha_right * np.expm1(lam) + gen.beta_right * gen.alpha_left * np.expm1(-lam)
    discriminant = np.hypot(a - b, 2.0 * np.sqrt(gen.m01 * gen.m10))
    total = a + b
    zeta0 = 2.0 * excess / (total + discriminant)
    zeta1 = -0.5 * (total + discriminant)
    return zeta0, zeta1, discriminant


def dominant_eigenvalue(gen: TiltedGenerator):
    """Larger root of the characteristic polynomial; exactly 0 at lambda = 0."""
    zeta0, _, _ = _roots(gen)
    return float(zeta0) if np.ndim(zeta0) == 0 else zeta0


def eigensystem(gen: TiltedGenerator) -> EigenSystem:
    zeta0, zeta1, gap = _roots(gen)
    if np.any(~(gap >= DEGENERACY_TOL * (np.abs(zeta0) + np.abs(zeta1)))):
        msg = "Tilted generator has (near-)degenerate eigenvalues; inputs are corrupted"
        raise DegenerateSpectrumError(msg)

    shifted = gen.exit_occupied + zeta0
    m01 = gen.m01
    m10 = gen.m10
    norm = m01 + shifted
    right = np.stack(np.broadcast_arrays(m01 / norm, shifted / norm), axis=-1)

    scale = norm / (m10 * m01 + shifted * shifted)
    left = np.stack(np.broadcast_arrays(scale * m10, scale * shifted), axis=-1)
    at_origin = np.asarray(gen.lam, dtype=float) == 0.0
    if np.any(at_origin):
        left = np.where(np.asarray(at_origin)[..., None], 1.0, left)
    return EigenSystem(zeta0, zeta1, left, right)


def steady_state(params: ModelParams, t) -> np.ndarray:
    """Instantaneous stationary populations (P1, P0) at time t."""
    return eigensystem(build_generator(params, 0.0, t)).right
