"""
Validators for pumping parameters and numerics settings.

Shared by the frozen parameter dataclasses and the config serializers so an
invariant is phrased once. Every failure raises Django's ValidationError keyed
by the offending field.
"""

import math
from collections.abc import Sequence

from django.core.exceptions import ValidationError

SWEEP_AXES = ("x_left", "x_right", "squeezing", "lambda", "omega", "phi_relative", "A0")
# axes whose values are tuples, one entry per listed column
PAIRED_AXES = {"squeezing": ("x_left", "x_right")}
MAX_SWEEP_AXES = 2


def _finite(value: float) -> bool:
    return isinstance(value, int | float) and math.isfinite(value)


class ParameterValidators:
    """Physical parameter invariants"""

    @staticmethod
    def validate_bath(gamma: float, squeeze_x: float, T0: float) -> None:  # noqa: N803
        """Validate a single reservoir: coupling, squeezing and base temperature"""
        errors = {}
        if not _finite(gamma) or gamma < 0:
            errors["gamma"] = f"Coupling must be a finite rate >= 0, got {gamma}."
        if not _finite(squeeze_x) or squeeze_x < 0:
            errors["squeeze_x"] = f"Squeezing parameter must be >= 0, got {squeeze_x}."
        if not _finite(T0) or T0 <= 0:
            errors["T0"] = f"Base temperature must be > 0 K, got {T0}."
        if errors:
            raise ValidationError(errors)

    @staticmethod
    def validate_drive(A0: float, Omega: float, phi_left: float, phi_right: float) -> None:  # noqa: N803
        """Validate the temperature modulation"""
        errors = {}
        if not _finite(A0) or A0 < 0:
            errors["A0"] = f"Drive amplitude must be >= 0 K, got {A0}."
        if not _finite(Omega) or Omega < 0:
            errors["Omega"] = f"Drive frequency must be >= 0, got {Omega}."
        for name, phase in (("phi_left", phi_left), ("phi_right", phi_right)):
            if not _finite(phase):
                errors[name] = f"Phase must be finite, got {phase}."
        if errors:
            raise ValidationError(errors)

    @staticmethod
    def validate_model(
        theta0: float,
        left_T0: float,  # noqa: N803
        right_T0: float,  # noqa: N803
        A0: float,  # noqa: N803
        coupling: float,
    ) -> None:
        """Validate the site quantum and orbit positivity (T0 - A0 > 0 on both sides)"""
        if not _finite(theta0) or theta0 <= 0:
            raise ValidationError({"theta0": f"Site quantum must be > 0 K, got {theta0}."})
        for side, T0 in (("left", left_T0), ("right", right_T0)):  # noqa: N806
            if T0 - A0 <= 0:
                raise ValidationError(
                    {
                        side: (
                            f"Temperature positivity violated: T0={T0} K with drive amplitude "
                            f"A0={A0} K reaches {T0 - A0} K on the orbit."
                        ),
                    },
                )
        if coupling <= 0:
            raise ValidationError({"gamma": "At least one reservoir must be coupled (gamma_left + gamma_right > 0)."})


class NumericsValidators:
    """Invariants of derivative, quadrature and oracle settings"""

    @staticmethod
    def validate_derivative_scheme(base_step: float, shrink: float, table_size: int, tol: float) -> None:
        errors = {}
        if not _finite(base_step) or not 1e-5 <= base_step <= 1e-2:
            errors["base_step"] = f"Base step must lie in [1e-5, 1e-2], got {base_step}."
        if not _finite(shrink) or shrink <= 1:
            errors["shrink"] = f"Step shrink factor must be > 1 so steps strictly decrease, got {shrink}."
        if table_size < 2:
            errors["table_size"] = f"Extrapolation table needs at least 2 steps, got {table_size}."
        if not _finite(tol) or tol <= 0:
            errors["tol"] = f"Tolerance must be > 0, got {tol}."
        if errors:
            raise ValidationError(errors)

    @staticmethod
    def validate_quadrature(panels: int, nodes: int, tol: float, max_panels: int) -> None:
        errors = {}
        if panels < 8:
            errors["panels"] = f"At least 8 Gauss-Legendre panels are required, got {panels}."
        if nodes < 2:
            errors["nodes"] = f"At least 2 nodes per panel are required, got {nodes}."
        if not _finite(tol) or tol <= 0:
            errors["tol"] = f"Tolerance must be > 0, got {tol}."
        if max_panels < 2 * panels:
            errors["max_panels"] = "Panel cap must allow at least one doubling."
        if errors:
            raise ValidationError(errors)

    @staticmethod
    def validate_oracle(periods: int, trajectories: int, horizon: float) -> None:
        errors = {}
        if periods < 30:
            errors["periods"] = f"Propagation needs at least 30 periods, got {periods}."
        if trajectories < 1:
            errors["trajectories"] = f"At least one trajectory is required, got {trajectories}."
        if not _finite(horizon) or horizon <= 0:
            errors["horizon"] = f"Sampling horizon must be > 0 ps, got {horizon}."
        if errors:
            raise ValidationError(errors)


class SweepValidators:
    """Sweep-grid invariants"""

    @staticmethod
    def validate_axes(names: Sequence[str]) -> None:
        """Validate axis names: known, distinct, at most two"""
        unknown = [name for name in names if name not in SWEEP_AXES]
        if unknown:
            choices = ", ".join(SWEEP_AXES)
            raise ValidationError({"sweep": f"Unknown sweep axis {unknown[0]!r}; choose from {choices}."})
        if len(set(names)) != len(names):
            raise ValidationError({"sweep": "Sweep axes must be distinct."})
        for paired, columns in PAIRED_AXES.items():
            overlap = set(columns) & set(names)
            if paired in names and overlap:
                raise ValidationError({"sweep": f"Axis {paired!r} already sets {sorted(overlap)[0]!r}."})
        if len(names) > MAX_SWEEP_AXES:
            raise ValidationError({"sweep": f"At most {MAX_SWEEP_AXES} sweep axes are supported, got {len(names)}."})

    @staticmethod
    def validate_axis_values(name: str, values: Sequence) -> None:
        if len(values) < 2:  # noqa: PLR2004
            raise ValidationError({name: "Axis count must be >= 2."})
        width = len(PAIRED_AXES.get(name, (name,)))
        entries = [value if width > 1 else (value,) for value in values]
        if any(len(entry) != width for entry in entries):
            raise ValidationError({name: f"Axis values must have {width} components each."})
        if not all(_finite(component) for entry in entries for component in entry):
            raise ValidationError({name: "Axis values must be finite."})
