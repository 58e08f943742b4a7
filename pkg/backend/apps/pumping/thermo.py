"""
Thermodynamic affinity, Gallavotti-Cohen residual and uncertainty relations.

Total cumulants are j^(n) = j_d^(n) + j_g^(n). Entropies are in units of k_B.
"""

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Literal

import numpy as np
from scipy import optimize

from apps.pumping.cumulants import DEFAULT_QUADRATURE
from apps.pumping.cumulants import DEFAULT_SCHEME
from apps.pumping.cumulants import dynamic_cgf
from apps.pumping.cumulants import dynamic_cumulant
from apps.pumping.exceptions import DomainError
from apps.pumping.exceptions import UndefinedCorrectionError
from apps.pumping.geometry import geometric_cumulant_line
from apps.pumping.geometry import geometric_cumulant_surface
from apps.pumping.model import ModelParams
from apps.pumping.model import bose_occupation
from apps.pumping.model import rates
from apps.pumping.model import temperature
from apps.pumping.numerics import DerivativeScheme
from apps.pumping.numerics import QuadratureSpec
from apps.pumping.numerics import period_average

logger = logging.getLogger(__name__)

AffinityForm = Literal["rates", "printed"]
GeometricRoute = Literal["surface", "line"]

AFFINITY_ZERO_TOL = 1e-8
# dynamic flux below this fraction of the total coupling leaves g undefined
FLUX_ZERO_TOL = 1e-8
TUR_BOUND = 2.0
TUR_SLACK = 1e-9

AFFINITY_ZERO = "affinity_zero"
G_UNDEFINED = "g_undefined"
STANDARD_TUR_VIOLATED = "standard_tur_violated"


@dataclass(frozen=True)
class CumulantSet:
    dynamic: tuple[float, float]
    geometric: tuple[float, float]

    @property
    def flux(self) -> float:
        return self.dynamic[0] + self.geometric[0]

    @property
    def noise(self) -> float:
        return self.dynamic[1] + self.geometric[1]


@dataclass(frozen=True)
class SymmetryResidual:
    residual: float
    scale: float
    affinity: float

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual


@dataclass(frozen=True)
class TurReport:
    """TUR quantities; inequality fields are None where flags make them meaningless."""

    fano: float | None
    affinity: float
    g_omega: float | None
    sigma_min: float | None
    standard_lhs: float | None
    modified_lhs: float | None
    cumulants: CumulantSet
    flags: frozenset[str] = field(default_factory=frozenset)


def collect_cumulants(
    params: ModelParams,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
    route: GeometricRoute = "surface",
) -> CumulantSet:
    dynamic = (dynamic_cumulant(params, 1, quad, scheme), dynamic_cumulant(params, 2, quad, scheme))
    if not params.drive.Omega > 0:
        return CumulantSet(dynamic, (0.0, 0.0))
    if route == "surface":
        geometric = (geometric_cumulant_surface(params, 1, scheme), geometric_cumulant_surface(params, 2, scheme))
    else:
        geometric = (
            geometric_cumulant_line(params, 1, quad, scheme),
            geometric_cumulant_line(params, 2, quad, scheme),
        )
    return CumulantSet(dynamic, geometric)


def _period_mean(params: ModelParams, integrand, quad: QuadratureSpec) -> float:
    if not params.drive.Omega > 0:
        return float(np.asarray(integrand(np.zeros(1)))[0])
    return period_average(integrand, params.period, quad)


def affinity(params: ModelParams, form: AffinityForm = "rates", quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """
    Log-ratio of forward to backward period-integrated transfer weights.

    "rates": log(int beta_l*alpha_r dt / int alpha_l*beta_r dt), which has the
    sign of the flux and equals theta0*(1/T_r - 1/T_l) without squeezing or drive.
    "printed": log(int X_l^- X_r^+ dt / int X_l^+ X_r^- dt), X^+- = cosh(2x)(2n +- 1).
    """
    if form == "rates":

        def forward(points):
            _, beta_left = rates(params, "left", points)
            alpha_right, _ = rates(params, "right", points)
            return beta_left * alpha_right

        def backward(points):
            alpha_left, _ = rates(params, "left", points)
            _, beta_right = rates(params, "right", points)
            return alpha_left * beta_right
    else:

        def x_factor(side, points, sign):
            occupation = bose_occupation(params.theta0, temperature(params, side, points))
            return params.bath(side).cosh2x * (2.0 * occupation + sign)

        def forward(points):
            return x_factor("left", points, -1.0) * x_factor("right", points, 1.0)

        def backward(points):
            return x_factor("left", points, 1.0) * x_factor("right", points, -1.0)

    numerator = _period_mean(params, forward, quad)
    denominator = _period_mean(params, backward, quad)
    if numerator <= 0 or denominator <= 0:
        msg = f"Affinity integrals must be positive, got {numerator:.6g} and {denominator:.6g}"
        raise DomainError(msg)
    return math.log(numerator / denominator)


def locate_affinity_root(
    params: ModelParams,
    bracket: tuple[float, float] = (0.0, 2.0),
    xtol: float = 1e-12,
    form: AffinityForm = "rates",
) -> float:
    """x_left at which the affinity vanishes, holding x_right fixed."""
    x_right = params.right.squeeze_x
    root = optimize.brentq(
        lambda x: affinity(params.with_squeezing(x, x_right), form),
        bracket[0],
        bracket[1],
        xtol=xtol,
    )
    logger.info(f"Affinity root at x_left = {root:.12f} (x_right = {x_right})")
    return float(root)


def gc_symmetry_residual(
    params: ModelParams,
    lambdas=None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> SymmetryResidual:
    """
    max over lambda of |S_d(lambda) - S_d(-lambda - A)| with the rate affinity.

    The default grid covers [-A - 1, 1].
    """
    force = affinity(params, "rates", quad)
    grid = np.linspace(-force - 1.0, 1.0, 41) if lambdas is None else np.asarray(lambdas, dtype=float)
    direct = np.array([dynamic_cgf(params, lam, quad) for lam in grid])
    mirrored = np.array([dynamic_cgf(params, -lam - force, quad) for lam in grid])
    return SymmetryResidual(float(np.max(np.abs(direct - mirrored))), float(np.max(np.abs(direct))), force)


def geometric_correction(j_d1: float, j_g1: float, floor: float = 0.0) -> float:
    """
    g = 1/(1 + j_g^(1)/j_d^(1))^2, exactly 1 without geometric flux.

    Undefined once |j_d^(1)| drops to floor.
    """
    if j_g1 == 0.0:
        return 1.0
    if not math.isfinite(j_d1) or abs(j_d1) <= floor:
        msg = "g(Omega) is undefined for vanishing dynamic flux"
        raise UndefinedCorrectionError(msg)
    return 1.0 / (1.0 + j_g1 / j_d1) ** 2


def tur_correction(
    params: ModelParams,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
    cumulants: CumulantSet | None = None,
) -> float:
    cumulants = cumulants or collect_cumulants(params, quad, scheme)
    if cumulants.geometric[0] == 0.0:
        return 1.0
    if abs(affinity(params, "rates", quad)) < AFFINITY_ZERO_TOL:
        msg = "g(Omega) is undefined at zero affinity"
        raise UndefinedCorrectionError(msg)
    floor = FLUX_ZERO_TOL * (params.left.gamma + params.right.gamma)
    return geometric_correction(cumulants.dynamic[0], cumulants.geometric[0], floor)


def min_entropy(
    params: ModelParams,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
    cumulants: CumulantSet | None = None,
) -> float:
    """Sigma_min = 2 (j^(1))^2 / j^(2) * g(Omega), in k_B/ps."""
    cumulants = cumulants or collect_cumulants(params, quad, scheme)
    g = tur_correction(params, quad, scheme, cumulants)
    if not cumulants.noise > 0:
        msg = f"Total noise must be positive, got {cumulants.noise:.6g}"
        raise DomainError(msg)
    return TUR_BOUND * cumulants.flux**2 / cumulants.noise * g


def modified_tur_lhs(cumulants: CumulantSet, g: float, sigma: float) -> float:
    """j^(2) * Sigma / ((j^(1))^2 * g) for a caller-supplied entropy production Sigma."""
    return cumulants.noise * sigma / (cumulants.flux**2 * g)


def tur_report(
    params: ModelParams,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
    cumulants: CumulantSet | None = None,
) -> TurReport:
    cumulants = cumulants or collect_cumulants(params, quad, scheme)
    force = affinity(params, "rates", quad)
    fano = cumulants.noise / cumulants.flux if cumulants.flux != 0 else None
    flags: set[str] = set()
    if abs(force) < AFFINITY_ZERO_TOL:
        flags |= {AFFINITY_ZERO, G_UNDEFINED}
        logger.warning(f"Affinity {force:.3e} below {AFFINITY_ZERO_TOL}; TUR inequalities withheld")
        return TurReport(fano, force, None, None, None, None, cumulants, frozenset(flags))

    try:
        g = tur_correction(params, quad, scheme, cumulants)
        sigma = min_entropy(params, quad, scheme, cumulants)
        modified = modified_tur_lhs(cumulants, g, sigma)
    except (UndefinedCorrectionError, ZeroDivisionError):
        flags.add(G_UNDEFINED)
        g = sigma = modified = None

    standard = fano * force if fano is not None else None
    if standard is not None and standard < TUR_BOUND - TUR_SLACK:
        flags.add(STANDARD_TUR_VIOLATED)
    return TurReport(fano, force, g, sigma, standard, modified, cumulants, frozenset(flags))
