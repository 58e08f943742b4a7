"""
Frozen figure presets.

All presets share one parameter set: omega0 = 7.4*pi THz, gamma_l = gamma_r =
1000/ps, Omega = 100/ps, A0 = 100 K and the cos/sin drive with phi = pi/4
(phi_right = phi - pi/2). They differ in base temperatures, the swept axes
and the requested outputs.
"""

import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from apps.pumping.model import BathSpec
from apps.pumping.model import DriveProtocol
from apps.pumping.model import ModelParams
from apps.pumping.validators import PAIRED_AXES

OMEGA0 = 7.4 * math.pi
GAMMA = 1000.0
OMEGA = 100.0
A0 = 100.0
PHI = math.pi / 4


def _grid(start: float, stop: float, count: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(start, stop, count))


@dataclass(frozen=True)
class FigurePreset:
    name: str
    description: str
    temperatures: tuple[float, float]
    squeezing: tuple[float, float]
    axes: tuple[tuple[str, tuple], ...]
    outputs: tuple[str, ...]

    def params(self) -> ModelParams:
        left_T0, right_T0 = self.temperatures  # noqa: N806
        x_left, x_right = self.squeezing
        return ModelParams.from_omega0(
            OMEGA0,
            BathSpec(GAMMA, x_left, left_T0),
            BathSpec(GAMMA, x_right, right_T0),
            DriveProtocol.cos_sin(A0, OMEGA, PHI),
        )

    def document(self) -> dict:
        """The preset as a run-configuration mapping."""
        left_T0, right_T0 = self.temperatures  # noqa: N806
        x_left, x_right = self.squeezing
        return {
            "model": {
                "omega0": OMEGA0,
                "left": {"gamma": GAMMA, "squeeze_x": x_left, "T0": left_T0},
                "right": {"gamma": GAMMA, "squeeze_x": x_right, "T0": right_T0},
                "drive": {"A0": A0, "Omega": OMEGA, "phi_left": PHI, "phi_right": PHI - math.pi / 2},
            },
            "sweep": [_axis_document(name, values) for name, values in self.axes],
            "outputs": list(self.outputs),
        }


def _axis_document(name: str, values: tuple) -> dict:
    if name in PAIRED_AXES:
        return {"name": name, "pairs": [list(pair) for pair in values]}
    return {"name": name, "values": list(values)}


PRESETS = MappingProxyType(
    {
        "fig1cd": FigurePreset(
            name="fig1cd",
            description="Dynamic and geometric CGFs against lambda for four (x_left, x_right) pairs",
            temperatures=(300.0, 250.0),
            squeezing=(0.0, 0.0),
            axes=(
                ("squeezing", ((0.0, 0.0), (0.7, 0.0), (0.0, 0.7), (math.pi, math.pi))),
                ("lambda", _grid(-3.0, 3.0, 61)),
            ),
            outputs=("cgf",),
        ),
        "fig2": FigurePreset(
            name="fig2",
            description="Dynamic and geometric cumulants over the squeezing plane, equal temperatures",
            temperatures=(300.0, 300.0),
            squeezing=(0.0, 0.0),
            axes=(("x_left", _grid(0.0, 2.0, 5)), ("x_right", _grid(0.0, 2.0, 5))),
            outputs=("dynamic", "geometric"),
        ),
        "fig3": FigurePreset(
            name="fig3",
            description="Dynamic and geometric cumulants over the squeezing plane, unequal temperatures",
            temperatures=(300.0, 250.0),
            squeezing=(0.0, 0.0),
            axes=(("x_left", _grid(0.0, 2.0, 5)), ("x_right", _grid(0.0, 2.0, 5))),
            outputs=("dynamic", "geometric"),
        ),
        "fig4": FigurePreset(
            name="fig4",
            description="TUR correction, minimum entropy and scaled cumulants along x_left at x_right = 0.7",
            temperatures=(300.0, 300.0),
            squeezing=(0.0, 0.7),
            axes=(("x_left", _grid(0.0, 2.0, 21)),),
            outputs=("dynamic", "geometric", "tur"),
        ),
    },
)
