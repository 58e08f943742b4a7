"""
Dynamic cumulants: period averages of lambda-derivatives of the dominant
eigenvalue, plus the scaled ratios against the unsqueezed, undriven model.
"""

import logging
from collections.abc import Callable
from typing import Literal

import numpy as np

from apps.pumping.exceptions import ReferenceZeroError
from apps.pumping.model import ModelParams
from apps.pumping.numerics import DerivativeScheme
from apps.pumping.numerics import Estimate
from apps.pumping.numerics import QuadratureSpec
from apps.pumping.numerics import gauss_legendre_panels
from apps.pumping.numerics import period_average
from apps.pumping.numerics import refine_rule
from apps.pumping.numerics import richardson
from apps.pumping.numerics import weighted_derivative
from apps.pumping.spectral import TiltedGenerator
from apps.pumping.spectral import build_generator
from apps.pumping.spectral import dominant_eigenvalue

logger = logging.getLogger(__name__)

Kind = Literal["dynamic", "geometric"]

DEFAULT_QUADRATURE = QuadratureSpec()
DEFAULT_SCHEME = DerivativeScheme()

# reference cumulants below this fraction of the total coupling count as zero
REFERENCE_ZERO_TOL = 1e-12


def lambda_derivative(f: Callable, n: int, scheme: DerivativeScheme = DEFAULT_SCHEME) -> Estimate:
    """n-th derivative of f at lambda = 0 with its extrapolation error."""
    return richardson(f, 0.0, n, scheme)


def averaged_derivative(
    params: ModelParams,
    node_function: Callable[[float, np.ndarray], np.ndarray],
    n: int,
    quad: QuadratureSpec,
    scheme: DerivativeScheme,
) -> float:
    """
    d^n/dlambda^n at 0 of (1/t_p) * integral over a period of node_function(lambda, t).

    Each composite rule is held fixed while lambda varies and the average is
    differentiated as a whole; panels double until two rules agree.
    Without a drive period the integrand is evaluated at t = 0.
    """
    if not params.drive.Omega > 0:
        return float(lambda_derivative(lambda lam: node_function(lam, np.zeros(1)), n, scheme).value[0])

    period = params.period

    def estimate(factor):
        points, weights = gauss_legendre_panels(period, quad.panels * factor, quad.nodes)
        return weighted_derivative(node_function, n, points, weights / period, scheme)

    refinements = (quad.max_panels // quad.panels).bit_length() - 1
    return refine_rule(estimate, refinements, quad.tol, quad.floor * scheme.tol, f"Period average of order {n}")


def _zeta_at_nodes(params: ModelParams) -> Callable[[float, np.ndarray], np.ndarray]:
    def zeta(lam, points):
        return dominant_eigenvalue(build_generator(params, lam, points))

    return zeta


def dynamic_cgf(params: ModelParams, lam: float, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """S_d(lambda): period average of the dominant eigenvalue."""
    if not params.drive.Omega > 0:
        return dominant_eigenvalue(build_generator(params, lam, 0.0))
    return period_average(lambda points: _zeta_at_nodes(params)(lam, points), params.period, quad)


def dynamic_cumulant(
    params: ModelParams,
    n: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
) -> float:
    """j_d^(n) in 1/ps."""
    value = averaged_derivative(params, _zeta_at_nodes(params), n, quad, scheme)
    logger.debug(f"Dynamic cumulant n={n}: {value:.12g}")
    return value


def reference_cumulant(
    params: ModelParams,
    n: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
) -> float:
    """j_o^(n): same base temperatures and couplings, no squeezing, no drive."""
    return dynamic_cumulant(params.reference(), n, quad, scheme)


def scaled_cumulant(
    params: ModelParams,
    kind: Kind,
    n: int,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
    scheme: DerivativeScheme = DEFAULT_SCHEME,
) -> float:
    """C^(n) = j^(n) / j_o^(n) for the dynamic or geometric part."""
    reference = reference_cumulant(params, n, quad, scheme)
    check_reference(params, reference, n)
    if kind == "dynamic":
        value = dynamic_cumulant(params, n, quad, scheme)
    else:
        from apps.pumping.geometry import geometric_cumulant_surface  # noqa: PLC0415

        value = geometric_cumulant_surface(params, n, scheme)
    return value / reference


def check_reference(params: ModelParams, reference: float, n: int) -> None:
    if abs(reference) <= REFERENCE_ZERO_TOL * (params.left.gamma + params.right.gamma):
        msg = f"Reference cumulant j_o^({n}) vanishes; use unequal base temperatures for n=1 scaling"
        raise ReferenceZeroError(msg)


def analytic_static_cumulants(gen: TiltedGenerator) -> tuple[float, float]:
    """
    Hand-differentiated flux and noise of the instantaneous eigenvalue at lambda = 0.

    With s = a + b, P = beta_l*alpha_r and Q = beta_r*alpha_l:
    zeta' = (P - Q)/s and zeta'' = (P + Q)/s - 2(P - Q)^2/s^3.
    """
    total = gen.exit_occupied + gen.exit_empty
    forward = gen.beta_left * gen.alpha_right
    backward = gen.beta_right * gen.alpha_left
    flux = (forward - backward) / total
    noise = (forward + backward) / total - 2.0 * (forward - backward) ** 2 / total**3
    return flux, noise
