"""
Physical parameters of a bosonic site between two squeezed thermal reservoirs.

Units: rates and angular frequencies in 1/ps (THz), time in ps, temperatures
in Kelvin, entropies in units of k_B. The site quantum is stored as the
temperature theta0 = hbar*omega0/k_B.

All evaluators accept scalars or numpy arrays for the time/temperature
argument and return the same shape.
"""

import math
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Literal

import numpy as np
from scipy import constants

from apps.pumping.exceptions import DomainError
from apps.pumping.validators import ParameterValidators

Side = Literal["left", "right"]
SIDES: tuple[Side, Side] = ("left", "right")


def theta_from_omega0(omega0_thz: float) -> float:
    """Convert an angular site frequency in THz (rad/ps) to hbar*omega0/k_B in Kelvin."""
    return constants.hbar * omega0_thz * 1e12 / constants.k


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class BathSpec:
    gamma: float
    squeeze_x: float
    T0: float

    def __post_init__(self):
        ParameterValidators.validate_bath(self.gamma, self.squeeze_x, self.T0)

    @property
    def cosh2x(self) -> float:
        return math.cosh(2.0 * self.squeeze_x)


@dataclass(frozen=True)
class DriveProtocol:
    """
    Temperature modulation T_nu(t) = T0_nu + A0*cos(Omega*t + phi_nu).

    Omega = 0 (or A0 = 0) means undriven: the amplitude is then inert and
    both reservoirs sit at their base temperatures.
    """

    A0: float = 0.0
    Omega: float = 0.0
    phi_left: float = 0.0
    phi_right: float = 0.0

    def __post_init__(self):
        ParameterValidators.validate_drive(self.A0, self.Omega, self.phi_left, self.phi_right)

    @classmethod
    def cos_sin(cls, A0: float, Omega: float, phi: float) -> "DriveProtocol":  # noqa: N803
        """Cosine drive on the left, sine drive on the right, common offset phi."""
        return cls(A0=A0, Omega=Omega, phi_left=phi, phi_right=phi - math.pi / 2)

    @classmethod
    def with_relative_phase(
        cls,
        A0: float,  # noqa: N803
        Omega: float,  # noqa: N803
        phi_left: float,
        delta: float,
    ) -> "DriveProtocol":
        """Drive whose right phase lags the left one by delta."""
        return cls(A0=A0, Omega=Omega, phi_left=phi_left, phi_right=phi_left - delta)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.Omega if self.Omega > 0 else math.inf

    @property
    def relative_phase(self) -> float:
        return self.phi_left - self.phi_right

    @property
    def is_driven(self) -> bool:
        return self.A0 > 0 and self.Omega > 0

    @property
    def amplitude(self) -> float:
        """A0 as seen by the reservoirs, zero without a drive frequency."""
        return self.A0 if self.Omega > 0 else 0.0

    def phase(self, side: Side) -> float:
        return self.phi_left if side == "left" else self.phi_right


@dataclass(frozen=True)
class ModelParams:
    theta0: float
    left: BathSpec
    right: BathSpec
    drive: DriveProtocol = field(default_factory=DriveProtocol)

    def __post_init__(self):
        ParameterValidators.validate_model(
            self.theta0,
            self.left.T0,
            self.right.T0,
            self.drive.A0,
            self.left.gamma + self.right.gamma,
        )

    @classmethod
    def from_omega0(
        cls,
        omega0: float,
        left: BathSpec,
        right: BathSpec,
        drive: DriveProtocol | None = None,
    ) -> "ModelParams":
        """Build from the angular site frequency in THz."""
        return cls(theta_from_omega0(omega0), left, right, drive or DriveProtocol())

    def bath(self, side: Side) -> BathSpec:
        return self.left if side == "left" else self.right

    @property
    def period(self) -> float:
        return self.drive.period

    def with_squeezing(self, x_left: float, x_right: float) -> "ModelParams":
        return replace(
            self,
            left=replace(self.left, squeeze_x=x_left),
            right=replace(self.right, squeeze_x=x_right),
        )

    def swapped(self) -> "ModelParams":
        """Exchange the reservoirs together with their drive phases."""
        drive = replace(self.drive, phi_left=self.drive.phi_right, phi_right=self.drive.phi_left)
        return replace(self, left=self.right, right=self.left, drive=drive)

    def reference(self) -> "ModelParams":
        """Unsqueezed, undriven model with the same base temperatures and couplings."""
        return replace(self.with_squeezing(0.0, 0.0), drive=replace(self.drive, A0=0.0))


def temperature(params: ModelParams, side: Side, t):
    """T_nu(t) = T0_nu + A0*cos(Omega*t + phi_nu)."""
    drive = params.drive
    phase = drive.Omega * np.asarray(t, dtype=float) + drive.phase(side)
    return _out(params.bath(side).T0 + drive.amplitude * np.cos(phase))


def temperature_rate(params: ModelParams, side: Side, t):
    """dT_nu/dt of the modulation."""
    drive = params.drive
    phase = drive.Omega * np.asarray(t, dtype=float) + drive.phase(side)
    return _out(-drive.amplitude * drive.Omega * np.sin(phase))


def bose_occupation(theta0: float, T):  # noqa: N803
    """n = 1/(exp(theta0/T) - 1)."""
    T = np.asarray(T, dtype=float)  # noqa: N806
    if np.any(~(T > 0)):
        msg = f"Bose occupation needs T > 0, got min T = {np.min(T)}"
        raise DomainError(msg)
    return _out(1.0 / np.expm1(theta0 / T))


def squeezed_occupation(n, x):
    """N = cosh(2x)(n + 1/2) - 1/2."""
    return _out(np.cosh(2.0 * np.asarray(x, dtype=float)) * (np.asarray(n, dtype=float) + 0.5) - 0.5)


def bath_rates(theta0: float, bath: BathSpec, T):  # noqa: N803
    """(alpha, beta) of one reservoir at temperature T; alpha - beta = gamma."""
    occupation = squeezed_occupation(bose_occupation(theta0, T), bath.squeeze_x)
    beta = bath.gamma * np.asarray(occupation)
    return _out(beta + bath.gamma), _out(beta)


def rates(params: ModelParams, side: Side, t):
    """Emission/absorption rates (alpha, beta) of one reservoir at time t."""
    return bath_rates(params.theta0, params.bath(side), temperature(params, side, t))
