"""
Geometric (Berry-phase-like) part of the counting statistics.

Three routes to the geometric cumulants j_g^(n):

- line: S_g(lambda) = -(1/t_p) * integral <L0|dR0/dt> dt over one period,
  with dR0/dt from a fixed five-point time stencil ("time") or from the
  temperature connection times the analytic temperature velocity
  ("connection");
- surface: -(1/t_p) * oriented integral of the curvature over the region
  enclosed by the drive orbit, on a polar Gauss rule;
- closed: the printed flux and noise integrands, kept for comparison only.

The drive orbit is the affine image of the unit circle,
T - T0 = A0 * [[1, 0], [cos d, sin d]] u, with d = phi_left - phi_right.
Its signed area is pi*A0^2*sin(d); d = pi/2 is the circle of the cos/sin
protocol, d = 0 encloses nothing.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from apps.pumping.cumulants import DEFAULT_QUADRATURE
from apps.pumping.cumulants import DEFAULT_SCHEME
from apps.pumping.cumulants import averaged_derivative
from apps.pumping.exceptions import DomainError
from apps.pumping.exceptions import RegimeError
from apps.pumping.model import ModelParams
from apps.pumping.model import bose_occupation
from apps.pumping.model import temperature
from apps.pumping.model import temperature_rate
from apps.pumping.numerics import DerivativeScheme
from apps.pumping.numerics import QuadratureSpec
from apps.pumping.numerics import period_average
from apps.pumping.numerics import refine_rule
from apps.pumping.numerics import stencil_derivative
from apps.pumping.numerics import weighted_derivative
from apps.pumping.spectral import build_generator
from apps.pumping.spectral import eigensystem
from apps.pumping.spectral import generator_at

logger = logging.getLogger(__name__)

CurvatureForm = Literal["eigenvector", "printed", "printed_swapped"]
LineRoute = Literal["time", "connection"]

TIME_STEP_FRACTION = 1e-3
TEMPERATURE_STEP = 1e-3
LOW_TEMPERATURE_RATIO = 5.0
SURFACE_TOL = 1e-8
SURFACE_START = (8, 16)
SURFACE_REFINEMENTS = 4
SURFACE_FLOOR = 1e-6


@dataclass(frozen=True)
class LoopSurface:
    center: tuple[float, float]
    radius: float
    relative_phase: float = math.pi / 2

    def __post_init__(self):
        if min(self.center) <= self.radius:
            msg = f"Drive orbit leaves the physical quadrant: center {self.center}, radius {self.radius}"
            raise DomainError(msg)

    @classmethod
    def from_params(cls, params: ModelParams) -> "LoopSurface":
        return cls((params.left.T0, params.right.T0), params.drive.A0, params.drive.relative_phase)

    @cached_property
    def jacobian(self) -> np.ndarray:
        d = self.relative_phase
        return self.radius * np.array([[1.0, 0.0], [math.cos(d), math.sin(d)]])

    @property
    def signed_area(self) -> float:
        return math.pi * float(np.linalg.det(self.jacobian))

    @property
    def orientation(self) -> int:
        return int(np.sign(math.sin(self.relative_phase)))

    @property
    def is_degenerate(self) -> bool:
        return self.radius == 0.0 or abs(math.sin(self.relative_phase)) < 1e-15  # noqa: PLR2004

    def to_temperatures(self, u1, u2):
        jac = self.jacobian
        return (
            self.center[0] + jac[0, 0] * u1 + jac[0, 1] * u2,
            self.center[1] + jac[1, 0] * u1 + jac[1, 1] * u2,
        )


class PrintedAuxiliaries(NamedTuple):
    c_left: object
    c_right: object
    k: object
    f: object


class ClosedFormReport(NamedTuple):
    flux: float
    noise: float
    flux_residual: float
    noise_residual: float


@dataclass(frozen=True)
class LowTemperatureReport:
    lam: float
    x_grid: np.ndarray
    curvature: np.ndarray
    predicted: np.ndarray
    exponent: float
    intercept: float
    residual: float
    trivial: bool = False

    def within(self, tolerance: float) -> bool:
        return self.trivial or abs(self.exponent - 1.0) <= tolerance


def _stacked_eigenvectors(params: ModelParams, lam, T_left, T_right) -> np.ndarray:  # noqa: N803
    system = eigensystem(generator_at(params, lam, T_left, T_right))
    return np.concatenate([system.left, system.right], axis=-1)


def _temperature_derivatives(params: ModelParams, lam, T_left, T_right, side):  # noqa: N803
    """(dL/dT_side, dR/dT_side) from a fixed relative five-point stencil."""
    if side == "left":
        derivative = stencil_derivative(
            lambda T: _stacked_eigenvectors(params, lam, T, T_right),
            np.asarray(T_left, dtype=float),
            TEMPERATURE_STEP * np.asarray(T_left, dtype=float),
        )
    else:
        derivative = stencil_derivative(
            lambda T: _stacked_eigenvectors(params, lam, T_left, T),
            np.asarray(T_right, dtype=float),
            TEMPERATURE_STEP * np.asarray(T_right, dtype=float),
        )
    return derivative[..., :2], derivative[..., 2:]


def connection(params: ModelParams, lam, T_left, T_right):  # noqa: N803
    """Berry connection (<L0|dR0/dT_left>, <L0|dR0/dT_right>)."""
    left_vector = eigensystem(generator_at(params, lam, T_left, T_right)).left
    _, d_right_l = _temperature_derivatives(params, lam, T_left, T_right, "left")
    _, d_right_r = _temperature_derivatives(params, lam, T_left, T_right, "right")
    return np.sum(left_vector * d_right_l, axis=-1), np.sum(left_vector * d_right_r, axis=-1)


def _eigenvector_curvature(params: ModelParams, lam, T_left, T_right):  # noqa: N803
    d_left_l, d_right_l = _temperature_derivatives(params, lam, T_left, T_right, "left")
    d_left_r, d_right_r = _temperature_derivatives(params, lam, T_left, T_right, "right")
    return np.sum(d_left_l * d_right_r, axis=-1) - np.sum(d_left_r * d_right_l, axis=-1)


def printed_auxiliaries(
    params: ModelParams,
    lam,
    T_left,  # noqa: N803
    T_right,  # noqa: N803
    *,
    swapped: bool = False,
) -> PrintedAuxiliaries:
    """C_left, C_right, K and f(lambda) of the printed curvature formula."""
    theta0 = params.theta0
    temps = {"left": np.asarray(T_left, dtype=float), "right": np.asarray(T_right, dtype=float)}
    occupations = {side: bose_occupation(theta0, temps[side]) for side in temps}
    baths = {"left": params.left, "right": params.right}

    def squeezed(side):
        return baths[side].cosh2x * (occupations[side] + 0.5)

    c = {side: theta0 / temps[side] ** 2 * np.exp(theta0 / temps[side]) * (squeezed(side) - 0.5) for side in temps}
    k = sum(baths[side].gamma * 2.0 * squeezed(side) for side in temps)
    prefactor = np.prod([baths[side].gamma * (squeezed(side) - 0.5) for side in temps], axis=0)
    second = temps["right"] if swapped else temps["left"]
    f = prefactor * (np.exp(theta0 / temps["left"]) * np.expm1(lam) + np.exp(theta0 / second) * np.expm1(-lam))
    return PrintedAuxiliaries(c["left"], c["right"], k, f)


def _printed_curvature(params: ModelParams, lam, T_left, T_right, *, swapped: bool):  # noqa: N803
    aux = printed_auxiliaries(params, lam, T_left, T_right, swapped=swapped)
    gamma_l, gamma_r = params.left.gamma, params.right.gamma
    big_gamma = gamma_l * gamma_r * (gamma_l + gamma_r)
    with np.errstate(invalid="ignore"):
        return -2.0 * big_gamma * aux.c_left * aux.c_right * np.sin(lam) / (aux.k + 4.0 * aux.f) ** 1.5


def curvature(params: ModelParams, lam, T_left, T_right, form: CurvatureForm = "eigenvector"):  # noqa: N803
    """
    Curvature F_{T_left T_right}(lambda).

    "eigenvector" is d_l<L0|d_r R0> - d_r<L0|d_l R0> from the eigen-system;
    "printed" and "printed_swapped" evaluate the closed formula as printed and
    with its second exponential taken at T_right.
    """
    if np.any(~(np.asarray(T_left) > 0)) or np.any(~(np.asarray(T_right) > 0)):
        msg = "Curvature needs positive temperatures"
        raise DomainError(msg)
    if form == "eigenvector":
        value = _eigenvector_curvature(params, lam, T_left, T_right)
    else:
        value = _printed_curvature(params, lam, T_left, T_right, swapped=form == "printed_swapped")
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class CurvatureField:
    params: ModelParams
    form: CurvatureForm = "eigenvector"

    def __call__(self, lam, T_left, T_right):  # noqa: N803
        return curvature(self.params, lam, T_left, T_right, self.form)

    def auxiliaries(self, lam, T_left, T_right) -> PrintedAuxiliaries:  # noqa: N803
        return printed_auxiliaries(self.params, lam, T_left, T_right, swapped=self.form == "printed_swapped")


def _line_integrand(params: ModelParams, lam, points, route: LineRoute):
    """-<L0|dR0/dt> at the given times."""
    system = eigensystem(build_generator(params, lam, points))
    if route == "time":
        velocity = stencil_derivative(
            lambda s: eigensystem(build_generator(params, lam, s)).right,
            points,
            np.full_like(points, params.period * TIME_STEP_FRACTION),
        )
        return -np.sum(system.left * velocity, axis=-1)
    temps = temperature(params, "left", points), temperature(params, "right", points)
    a_left, a_right = connection(params, lam, *temps)
    return -(a_left * temperature_rate(params, "left", points) + a_right * temperature_rate(params, "right", points))


def _require_drive(params: ModelParams):
    if not params.drive.Omega > 0:
        msg = "Geometric contributions need a drive period (Omega > 0)"
        raise DomainError(msg)


def geometric_cgf_line(
    params: ModelParams,
    lam: float,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    route: LineRoute = "time",
) -> float:
    """S_g(lambda) in 1/ps from the line integral over one drive period."""
    _require_drive(params)
    return period_average(lambda points: _line_integrand(params, lam, points, route), params.period, quad)


def geometric_cumulant_line(
    params: ModelParams,
    n: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
    route: LineRoute = "time",
) -> float:
    _require_drive(params)
    if LoopSurface.from_params(params).is_degenerate:
        return 0.0
    return averaged_derivative(
        params,
        lambda lam, points: _line_integrand(params, lam, points, route),
        n,
        quad,
        scheme,
    )


def _polar_rule(radial: int, angular: int):
    x, w = leggauss(radial)
    rho = 0.5 * (x + 1.0)
    rho_weights = 0.5 * w * rho
    angles = 2.0 * math.pi * np.arange(angular) / angular
    u1 = (rho[:, None] * np.cos(angles)[None, :]).ravel()
    u2 = (rho[:, None] * np.sin(angles)[None, :]).ravel()
    weights = np.repeat(rho_weights, angular) * (2.0 * math.pi / angular)
    return u1, u2, weights


def _surface_estimate(params, surface, n, scheme, factor, form):
    radial, angular = (factor * count for count in SURFACE_START)
    u1, u2, weights = _polar_rule(radial, angular)
    temps = surface.to_temperatures(u1, u2)
    scale = -np.linalg.det(surface.jacobian) / params.period
    return weighted_derivative(
        lambda lam, nodes: curvature(params, lam, *nodes, form),
        n,
        temps,
        scale * weights,
        scheme,
    )


def geometric_cumulant_surface(
    params: ModelParams,
    n: int,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
    tol: float = SURFACE_TOL,
    form: CurvatureForm = "eigenvector",
) -> float:
    """
    j_g^(n) = -(1/t_p) * d^n/dlambda^n of the oriented curvature flux through the orbit.

    The flux is differentiated as a whole on a fixed polar rule; radial and
    angular node counts double until two rules agree to tol.
    """
    _require_drive(params)
    surface = LoopSurface.from_params(params)
    if surface.is_degenerate:
        return 0.0
    return refine_rule(
        lambda factor: _surface_estimate(params, surface, n, scheme, factor, form),
        SURFACE_REFINEMENTS,
        tol,
        SURFACE_FLOOR * scheme.tol,
        f"Surface integral for j_g^({n})",
    )


def _closed_form_terms(params: ModelParams, points):
    gamma_l, gamma_r = params.left.gamma, params.right.gamma
    x_plus = {}
    for side in ("left", "right"):
        occupation = bose_occupation(params.theta0, temperature(params, side, points))
        x_plus[side] = params.bath(side).cosh2x * (2.0 * occupation + 1.0)
    denominator = gamma_l * x_plus["left"] + gamma_r * x_plus["right"]
    big_gamma = gamma_l * gamma_r * (gamma_l + gamma_r)
    return x_plus, denominator, big_gamma


def geometric_flux_closed(params: ModelParams, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Printed closed-form geometric flux, evaluated by time quadrature."""
    _require_drive(params)
    cosh_product = params.left.cosh2x * params.right.cosh2x

    def integrand(points):
        _, denominator, big_gamma = _closed_form_terms(params, points)
        return 2.0 * big_gamma * cosh_product / denominator**3

    return -period_average(integrand, params.period, quad)


def geometric_noise_closed(params: ModelParams, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Printed closed-form geometric noise, evaluated by time quadrature."""
    _require_drive(params)
    cosh_product = params.left.cosh2x * params.right.cosh2x
    coupling = params.left.gamma + params.right.gamma

    def integrand(points):
        x_plus, denominator, big_gamma = _closed_form_terms(params, points)
        return 12.0 * big_gamma**2 * cosh_product * (x_plus["right"] - x_plus["left"]) / (coupling * denominator**5)

    return -period_average(integrand, params.period, quad)


def closed_form_report(
    params: ModelParams,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
    form: CurvatureForm = "eigenvector",
) -> ClosedFormReport:
    """Printed closed forms next to their residual against the surface route."""
    flux = geometric_flux_closed(params, quad)
    noise = geometric_noise_closed(params, quad)
    return ClosedFormReport(
        flux,
        noise,
        flux - geometric_cumulant_surface(params, 1, scheme, form=form),
        noise - geometric_cumulant_surface(params, 2, scheme, form=form),
    )


def low_temperature_prediction(lam: float, x_left, x_right):
    """sin(lambda) / sqrt(sum cosh^3(2x)) / sqrt(prod (cosh(2x) - 1))."""
    c_left = np.cosh(2.0 * np.asarray(x_left, dtype=float))
    c_right = np.cosh(2.0 * np.asarray(x_right, dtype=float))
    return np.sin(lam) / np.sqrt(c_left**3 + c_right**3) / np.sqrt((c_left - 1.0) * (c_right - 1.0))


def low_temperature_limit_check(params: ModelParams, lam: float, x_grid=None) -> LowTemperatureReport:
    """
    Regress log|F| on the log of the low-temperature prediction across x_left.

    x_right is held at its configured value and must be positive; the
    curvature is taken at the base temperatures.
    """
    hottest = max(params.left.T0, params.right.T0) + params.drive.A0
    if params.theta0 / hottest < LOW_TEMPERATURE_RATIO:
        msg = (
            f"Low-temperature check needs theta0/T >= {LOW_TEMPERATURE_RATIO} on the whole orbit, "
            f"got {params.theta0 / hottest:.3g}"
        )
        raise RegimeError(msg)
    if params.right.squeeze_x <= 0:
        msg = "Low-temperature prediction diverges for x_right = 0"
        raise RegimeError(msg)

    x_grid = np.linspace(2.5, 5.0, 11) if x_grid is None else np.asarray(x_grid, dtype=float)
    x_right = params.right.squeeze_x
    values = np.array(
        [curvature(params.with_squeezing(x, x_right), lam, params.left.T0, params.right.T0) for x in x_grid],
    )
    predicted = low_temperature_prediction(lam, x_grid, x_right)
    if np.sin(lam) == 0.0:
        return LowTemperatureReport(lam, x_grid, values, predicted, math.nan, math.nan, 0.0, trivial=True)

    log_predicted = np.log(np.abs(predicted))
    log_values = np.log(np.abs(values))
    exponent, intercept = np.polyfit(log_predicted, log_values, 1)
    residual = float(np.sqrt(np.mean((log_values - (exponent * log_predicted + intercept)) ** 2)))
    logger.info(f"Low-temperature curvature scaling: exponent {exponent:.4f}, rms residual {residual:.2e}")
    return LowTemperatureReport(lam, x_grid, values, predicted, float(exponent), float(intercept), residual)
