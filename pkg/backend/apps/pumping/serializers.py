"""
DRF serializers for run configuration documents.

Every level rejects unknown keys. Physical and numerical invariants are
checked through the validator classes shared with the parameter
dataclasses, so a config error reads the same as a constructor error.
"""

import math
from collections.abc import Mapping

from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from apps.pumping.model import theta_from_omega0
from apps.pumping.presets import OMEGA0
from apps.pumping.presets import PRESETS
from apps.pumping.validators import PAIRED_AXES
from apps.pumping.validators import SWEEP_AXES
from apps.pumping.validators import NumericsValidators
from apps.pumping.validators import ParameterValidators
from apps.pumping.validators import SweepValidators

OUTPUT_KINDS = ("cgf", "dynamic", "geometric", "closed_form", "curvature", "tur", "gc", "oracle")
DEFAULT_OUTPUTS = ["dynamic", "geometric", "tur"]
GEOMETRIC_ROUTES = ("surface", "line")
CURVATURE_FORMS = ("eigenvector", "printed", "printed_swapped")
MAX_SEED = 2**64 - 1


class StrictSerializer(serializers.Serializer):
    """
    Serializer that refuses keys it does not declare.

    Nested sections named in optional_sections validate as empty mappings
    when absent, so their field defaults apply.
    """

    optional_sections: tuple[str, ...] = ()

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            data = {**{key: {} for key in self.optional_sections}, **data}
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ["Unknown key."] for key in unknown})
        return super().to_internal_value(data)


# ============================================================================
# Model Serializers
# ============================================================================


class BathSerializer(StrictSerializer):
    gamma = serializers.FloatField()
    squeeze_x = serializers.FloatField(default=0.0)
    T0 = serializers.FloatField()

    def validate(self, attrs):
        ParameterValidators.validate_bath(attrs["gamma"], attrs["squeeze_x"], attrs["T0"])
        return attrs


class DriveSerializer(StrictSerializer):
    """
    Temperature modulation.

    phi_right defaults to phi_left - pi/2 (cosine drive left, sine drive right).
    """

    A0 = serializers.FloatField(default=0.0)
    Omega = serializers.FloatField(default=0.0)
    phi_left = serializers.FloatField(default=0.0)
    phi_right = serializers.FloatField(required=False)

    def validate(self, attrs):
        attrs.setdefault("phi_right", attrs["phi_left"] - math.pi / 2)
        ParameterValidators.validate_drive(attrs["A0"], attrs["Omega"], attrs["phi_left"], attrs["phi_right"])
        return attrs


class ModelSerializer(StrictSerializer):
    """Site frequency in THz (omega0) or site quantum in K (theta0), plus two baths and a drive."""

    omega0 = serializers.FloatField(required=False)
    theta0 = serializers.FloatField(required=False)
    left = BathSerializer()
    right = BathSerializer()
    drive = DriveSerializer(required=False)

    def validate(self, attrs):
        if "omega0" in attrs and "theta0" in attrs:
            raise serializers.ValidationError({"theta0": "Give either omega0 or theta0, not both."})
        if "theta0" not in attrs:
            omega0 = attrs.pop("omega0", OMEGA0)
            if not omega0 > 0:
                raise serializers.ValidationError({"omega0": f"Site frequency must be > 0 THz, got {omega0}."})
            attrs["theta0"] = theta_from_omega0(omega0)
        drive = attrs.setdefault("drive", {"A0": 0.0, "Omega": 0.0, "phi_left": 0.0, "phi_right": 0.0})
        ParameterValidators.validate_model(
            attrs["theta0"],
            attrs["left"]["T0"],
            attrs["right"]["T0"],
            drive["A0"],
            attrs["left"]["gamma"] + attrs["right"]["gamma"],
        )
        return attrs


# ============================================================================
# Sweep Serializers
# ============================================================================


class AxisSerializer(StrictSerializer):
    """
    A named axis given as {min, max, count} or as explicit values.

    The paired "squeezing" axis takes explicit [x_left, x_right] pairs instead.
    """

    name = serializers.ChoiceField(choices=SWEEP_AXES)
    min = serializers.FloatField(required=False)
    max = serializers.FloatField(required=False)
    count = serializers.IntegerField(required=False)
    values = serializers.ListField(child=serializers.FloatField(), required=False)
    pairs = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2),
        required=False,
    )

    def validate(self, attrs):
        if attrs["name"] in PAIRED_AXES or "pairs" in attrs:
            return self._validate_pairs(attrs)
        ranged = {"min", "max", "count"} & set(attrs)
        if "values" in attrs:
            if ranged:
                raise serializers.ValidationError({"values": "Give either values or min/max/count, not both."})
            values = list(attrs["values"])
        elif ranged == {"min", "max", "count"}:
            if attrs["count"] < 2:  # noqa: PLR2004
                raise serializers.ValidationError({"count": "Axis count must be >= 2."})
            values = [float(v) for v in _linspace(attrs["min"], attrs["max"], attrs["count"])]
        else:
            raise serializers.ValidationError({"values": "Axis needs values or all of min, max and count."})
        SweepValidators.validate_axis_values(attrs["name"], values)
        return {"name": attrs["name"], "values": values}

    def _validate_pairs(self, attrs):
        if attrs["name"] not in PAIRED_AXES:
            raise serializers.ValidationError({"pairs": f"Axis {attrs['name']!r} takes values, not pairs."})
        if set(attrs) != {"name", "pairs"}:
            raise serializers.ValidationError({"pairs": f"Axis {attrs['name']!r} is given by pairs only."})
        values = [tuple(pair) for pair in attrs["pairs"]]
        SweepValidators.validate_axis_values(attrs["name"], values)
        return {"name": attrs["name"], "values": values}


def _linspace(start: float, stop: float, count: int) -> list[float]:
    step = (stop - start) / (count - 1)
    return [start + k * step for k in range(count - 1)] + [stop]


# ============================================================================
# Numerics Serializers
# ============================================================================


class QuadratureSerializer(StrictSerializer):
    panels = serializers.IntegerField(default=32)
    nodes = serializers.IntegerField(default=8)
    tol = serializers.FloatField(default=1e-8)
    max_panels = serializers.IntegerField(default=1024)

    def validate(self, attrs):
        NumericsValidators.validate_quadrature(attrs["panels"], attrs["nodes"], attrs["tol"], attrs["max_panels"])
        return attrs


class DerivativeSerializer(StrictSerializer):
    base_step = serializers.FloatField(default=1e-2)
    shrink = serializers.FloatField(default=1.4)
    table_size = serializers.IntegerField(default=10)
    tol = serializers.FloatField(default=1e-6)

    def validate(self, attrs):
        NumericsValidators.validate_derivative_scheme(
            attrs["base_step"],
            attrs["shrink"],
            attrs["table_size"],
            attrs["tol"],
        )
        return attrs


class OracleSerializer(StrictSerializer):
    periods = serializers.IntegerField(default=50)
    steps_per_period = serializers.IntegerField(default=64, min_value=1)
    lambda_step = serializers.FloatField(default=0.02, min_value=1e-4, max_value=0.5)
    trajectories = serializers.IntegerField(default=100_000)
    horizon = serializers.FloatField(default=0.5)

    def validate(self, attrs):
        NumericsValidators.validate_oracle(attrs["periods"], attrs["trajectories"], attrs["horizon"])
        return attrs


class NumericsSerializer(StrictSerializer):
    optional_sections = ("quadrature", "derivative", "oracle")

    quadrature = QuadratureSerializer()
    derivative = DerivativeSerializer()
    oracle = OracleSerializer()
    geometric_route = serializers.ChoiceField(choices=GEOMETRIC_ROUTES, default="surface")
    curvature_form = serializers.ChoiceField(choices=CURVATURE_FORMS, default="eigenvector")
    route_tolerance = serializers.FloatField(default=1e-4, min_value=0.0)


# ============================================================================
# Run Configuration Serializer
# ============================================================================


class RunConfigSerializer(StrictSerializer):
    """
    Top-level run configuration.

    A preset supplies model, sweep and outputs; any of those sections given
    explicitly replaces the preset's section as a whole.
    """

    optional_sections = ("numerics",)

    preset = serializers.ChoiceField(choices=sorted(PRESETS), required=False, allow_null=True)
    model = ModelSerializer()
    sweep = serializers.ListField(child=AxisSerializer(), default=list)
    outputs = serializers.ListField(
        child=serializers.ChoiceField(choices=OUTPUT_KINDS),
        default=lambda: list(DEFAULT_OUTPUTS),
        allow_empty=False,
    )
    numerics = NumericsSerializer()
    seed = serializers.IntegerField(default=0, min_value=0, max_value=MAX_SEED)
    output_path = serializers.CharField(required=False, allow_null=True, allow_blank=False)

    def get_fields(self):
        fields = super().get_fields()
        # "lambda" is a keyword, so the field cannot be declared as an attribute
        fields["lambda"] = serializers.FloatField(default=0.5)
        return fields

    def to_internal_value(self, data):
        if isinstance(data, Mapping) and data.get("preset") in PRESETS:
            data = {**PRESETS[data["preset"]].document(), **data}
        return super().to_internal_value(data)

    def validate_sweep(self, value):
        try:
            SweepValidators.validate_axes([axis["name"] for axis in value])
        except DjangoValidationError as exc:
            raise serializers.ValidationError(exc.message_dict["sweep"]) from exc
        return value

    def validate_outputs(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError("Output kinds must be distinct.")
        return value
