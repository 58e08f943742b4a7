"""
Run configuration: YAML loading, validation and the resolved SweepConfig.

Everything here round-trips through plain dicts so grid points can travel
as JSON task payloads and be regenerated from the run manifest.
"""

import itertools
import logging
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from pathlib import Path

import yaml
from django.core.exceptions import ValidationError as DjangoValidationError
from rest_framework import serializers

from apps.pumping.exceptions import ConfigParseError
from apps.pumping.model import BathSpec
from apps.pumping.model import DriveProtocol
from apps.pumping.model import ModelParams
from apps.pumping.numerics import DerivativeScheme
from apps.pumping.numerics import QuadratureSpec
from apps.pumping.serializers import RunConfigSerializer
from apps.pumping.validators import PAIRED_AXES

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleSettings:
    periods: int = 50
    steps_per_period: int = 64
    lambda_step: float = 0.02
    trajectories: int = 100_000
    horizon: float = 0.5


@dataclass(frozen=True)
class NumericsSettings:
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    derivative: DerivativeScheme = field(default_factory=DerivativeScheme)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    geometric_route: str = "surface"
    curvature_form: str = "eigenvector"
    route_tolerance: float = 1e-4

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NumericsSettings":
        return cls(
            quadrature=QuadratureSpec(**data["quadrature"]),
            derivative=DerivativeScheme(**data["derivative"]),
            oracle=OracleSettings(**data["oracle"]),
            geometric_route=data["geometric_route"],
            curvature_form=data["curvature_form"],
            route_tolerance=data["route_tolerance"],
        )


@dataclass(frozen=True)
class SweepAxis:
    """One sweep axis; a paired axis holds one tuple per value, one entry per column."""

    name: str
    values: tuple

    @property
    def columns(self) -> tuple[str, ...]:
        return PAIRED_AXES.get(self.name, (self.name,))

    def manifest_values(self) -> list:
        return [list(value) if isinstance(value, tuple) else value for value in self.values]

    def coords(self, value) -> dict:
        if len(self.columns) == 1:
            return {self.name: value}
        return dict(zip(self.columns, value, strict=True))


@dataclass(frozen=True)
class GridPoint:
    index: int
    coords: dict
    params: ModelParams
    lam: float


def params_to_dict(params: ModelParams) -> dict:
    return asdict(params)


def params_from_dict(data: dict) -> ModelParams:
    return ModelParams(
        data["theta0"],
        BathSpec(**data["left"]),
        BathSpec(**data["right"]),
        DriveProtocol(**data["drive"]),
    )


def apply_coords(params: ModelParams, coords: dict) -> ModelParams:
    """Model at one grid point; "lambda" is not a model parameter and is skipped."""
    drive = params.drive
    left, right = params.left, params.right
    for name, value in coords.items():
        if name == "x_left":
            left = replace(left, squeeze_x=value)
        elif name == "x_right":
            right = replace(right, squeeze_x=value)
        elif name == "omega":
            drive = replace(drive, Omega=value)
        elif name == "A0":
            drive = replace(drive, A0=value)
        elif name == "phi_relative":
            drive = replace(drive, phi_right=drive.phi_left - value)
    return replace(params, left=left, right=right, drive=drive)


@dataclass(frozen=True)
class SweepConfig:
    model: ModelParams
    axes: tuple[SweepAxis, ...] = ()
    outputs: tuple[str, ...] = ("dynamic", "geometric", "tur")
    lam: float = 0.5
    numerics: NumericsSettings = field(default_factory=NumericsSettings)
    seed: int = 0
    output_path: str | None = None
    preset: str | None = None

    @classmethod
    def from_validated(cls, data: dict) -> "SweepConfig":
        return cls(
            model=params_from_dict(data["model"]),
            axes=tuple(SweepAxis(axis["name"], tuple(axis["values"])) for axis in data["sweep"]),
            outputs=tuple(data["outputs"]),
            lam=data["lambda"],
            numerics=NumericsSettings.from_dict(data["numerics"]),
            seed=data["seed"],
            output_path=data.get("output_path"),
            preset=data.get("preset"),
        )

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(axis.name for axis in self.axes)

    @property
    def axis_columns(self) -> tuple[str, ...]:
        """Coordinate columns written per grid point; paired axes contribute several."""
        return tuple(column for axis in self.axes for column in axis.columns)

    def single_point(self) -> "SweepConfig":
        return replace(self, axes=())

    def grid(self) -> list[GridPoint]:
        """Grid points in row-major order of the axes (last axis fastest)."""
        points = []
        for index, values in enumerate(itertools.product(*(axis.values for axis in self.axes))):
            coords = {}
            for axis, value in zip(self.axes, values, strict=True):
                coords.update(axis.coords(value))
            points.append(GridPoint(index, coords, apply_coords(self.model, coords), coords.get("lambda", self.lam)))
        return points

    def to_manifest(self) -> dict:
        return {
            "preset": self.preset,
            "model": params_to_dict(self.model),
            "axes": [{"name": axis.name, "values": axis.manifest_values()} for axis in self.axes],
            "outputs": list(self.outputs),
            "lambda": self.lam,
            "numerics": self.numerics.to_dict(),
            "seed": self.seed,
        }


def build_config(document: dict) -> SweepConfig:
    """Validate a parsed document; raises rest_framework's ValidationError."""
    serializer = RunConfigSerializer(data=document)
    serializer.is_valid(raise_exception=True)
    config = SweepConfig.from_validated(serializer.validated_data)
    try:
        config.grid()
    except DjangoValidationError as exc:
        # an axis drives some grid point out of the physical domain
        raise serializers.ValidationError({"sweep": exc.messages}) from exc
    return config


def parse_config(text: str) -> SweepConfig:
    try:
        document = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark is not None else None
        raise ConfigParseError(str(exc.problem or exc), line) from exc
    except yaml.YAMLError as exc:
        raise ConfigParseError(str(exc)) from exc
    if document is None:
        document = {}
    if not isinstance(document, dict):
        msg = f"Top level must be a mapping, got {type(document).__name__}"
        raise ConfigParseError(msg, 1)
    return build_config(document)


def load_config(path: str | Path) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        msg = f"Cannot read config {path}: {exc}"
        raise ConfigParseError(msg) from exc
    config = parse_config(text)
    logger.info(f"Loaded config {path} with axes {config.axis_names or '(single point)'}")
    return config
