"""
Derivative and quadrature machinery shared by the cumulant, geometry and
thermodynamics modules.

- Richardson (Ridders) extrapolation of central differences, for scalar or
  vector valued functions of one variable.
- Composite Gauss-Legendre rules over one drive period with panel doubling.
- A fixed five-point stencil for temperature derivatives, which keeps
  curvature values smooth in lambda.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cache
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from apps.pumping.exceptions import ConvergenceError
from apps.pumping.validators import NumericsValidators

logger = logging.getLogger(__name__)

SAFE = 2.0
DIVERGENCE_FACTOR = 100.0


@dataclass(frozen=True)
class DerivativeScheme:
    """
    Central-difference steps for Richardson extrapolation.

    Steps are base_step / shrink**k for k < table_size, strictly decreasing.
    tol is relative; extrapolation fails when the tableau error exceeds
    100*tol times the magnitude of the estimate, floored by atol and by the
    variation of the function over the largest step.
    """

    base_step: float = 1e-2
    shrink: float = 1.4
    table_size: int = 10
    tol: float = 1e-6
    atol: float = 1e-12

    def __post_init__(self):
        NumericsValidators.validate_derivative_scheme(self.base_step, self.shrink, self.table_size, self.tol)

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(self.base_step / self.shrink**k for k in range(self.table_size))


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre over [0, t_p] refined by doubling the panel count."""

    panels: int = 32
    nodes: int = 8
    tol: float = 1e-8
    max_panels: int = 1024
    floor: float = 1e-6

    def __post_init__(self):
        NumericsValidators.validate_quadrature(self.panels, self.nodes, self.tol, self.max_panels)


class Estimate(NamedTuple):
    value: object
    error: float


def _norm(value) -> float:
    return float(np.max(np.abs(value)))


def richardson(func: Callable, x0: float, order: int, scheme: DerivativeScheme, scale: float = 1.0) -> Estimate:
    """
    Ridders' extrapolation of central differences at x0.

    Works for vector valued func; errors use the max norm. Steps are
    multiplied by ``scale``. The failure threshold is floored by the
    variation of func over the largest step, so vanishing derivatives
    converge to rounding level instead of failing.
    """
    if order not in (1, 2):
        msg = f"Only first and second derivatives are supported, got order {order}"
        raise ValueError(msg)
    f0 = func(x0)
    variation = 0.0

    def estimate(h):
        nonlocal variation
        ahead, behind = func(x0 + h), func(x0 - h)
        variation = max(variation, _norm(ahead - f0), _norm(behind - f0))
        if order == 1:
            return (ahead - behind) / (2.0 * h)
        return (ahead - 2.0 * f0 + behind) / (h * h)

    steps = [h * scale for h in scheme.steps]
    factor = scheme.shrink**2
    table = [[estimate(steps[0])]]
    best = table[0][0]
    error = np.inf
    for i in range(1, len(steps)):
        row = [estimate(steps[i])]
        fac = factor
        for j in range(1, i + 1):
            row.append((row[j - 1] * fac - table[i - 1][j - 1]) / (fac - 1.0))
            fac *= factor
            errt = max(_norm(row[j] - row[j - 1]), _norm(row[j] - table[i - 1][j - 1]))
            if errt <= error:
                error = errt
                best = row[j]
        table.append(row)
        if _norm(row[i] - table[i - 1][i - 1]) >= SAFE * error:
            break

    logger.debug(f"Richardson order {order} at {x0}: {len(table)} rows, error {error:.3e}")
    floor = variation / steps[0] ** order
    threshold = DIVERGENCE_FACTOR * scheme.tol * max(_norm(best), scheme.atol, floor)
    if not np.isfinite(error) or error > threshold:
        msg = f"Richardson extrapolation did not converge (error {error:.3e} > {threshold:.3e})"
        raise ConvergenceError(msg)
    return Estimate(best, float(error))


@cache
def _reference_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(nodes)


def gauss_legendre_panels(length: float, panels: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule on [0, length]: flat arrays of nodes and weights."""
    x, w = _reference_rule(nodes)
    width = length / panels
    starts = np.arange(panels) * width
    points = (starts[:, None] + 0.5 * width * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * width * w, panels)
    return points, weights


def period_average(integrand: Callable[[np.ndarray], np.ndarray], period: float, quad: QuadratureSpec) -> float:
    """
    (1/period) * integral over one period of a vectorised integrand.

    The panel count doubles until two successive rules agree to quad.tol,
    relative to the average or, for averages that cancel, to quad.floor times
    the average magnitude of the integrand.
    """
    panels = quad.panels
    points, weights = gauss_legendre_panels(period, panels, quad.nodes)
    previous = float(np.dot(weights, integrand(points))) / period
    while panels < quad.max_panels:
        panels *= 2
        points, weights = gauss_legendre_panels(period, panels, quad.nodes)
        values = integrand(points)
        current = float(np.dot(weights, values)) / period
        magnitude = float(np.dot(weights, np.abs(values))) / period
        change = abs(current - previous)
        logger.debug(f"Quadrature with {panels} panels: change {change:.3e}")
        if change <= quad.tol * max(abs(current), quad.floor * magnitude):
            return current
        previous = current
    msg = f"Period average not converged with {panels} panels"
    raise ConvergenceError(msg)


def weighted_derivative(
    node_function: Callable[[float, np.ndarray], np.ndarray],
    n: int,
    points,
    weights: np.ndarray,
    scheme: DerivativeScheme,
) -> tuple[Estimate, float]:
    """
    n-th lambda derivative at 0 of sum(weights * node_function(lambda, points)).

    The rule stays fixed while lambda varies, so the weighted sum is a smooth
    scalar function of lambda and the extrapolation never sees node-wise
    noise. The second value is the weighted magnitude of the node-wise
    difference quotient at the base step, the scale for sums that cancel.
    """
    estimate = richardson(lambda lam: float(np.dot(weights, node_function(lam, points))), 0.0, n, scheme)
    h = scheme.base_step
    ahead, behind = node_function(h, points), node_function(-h, points)
    if n == 1:
        quotient = (ahead - behind) / (2.0 * h)
    else:
        quotient = (ahead - 2.0 * node_function(0.0, points) + behind) / (h * h)
    return estimate, float(np.dot(np.abs(weights), np.abs(quotient)))


def refine_rule(
    estimate: Callable[[int], tuple[Estimate, float]],
    refinements: int,
    tol: float,
    floor: float,
    label: str,
) -> float:
    """
    Evaluate estimate(factor) for factor = 1, 2, 4, ... until two rules agree.

    Agreement is relative to tol, to the sum of the two extrapolation errors
    or to floor times the magnitude reported with the finer rule, whichever
    is loosest.
    """
    factor = 1
    previous, _ = estimate(factor)
    for _ in range(refinements):
        factor *= 2
        current, magnitude = estimate(factor)
        change = abs(float(current.value) - float(previous.value))
        threshold = max(tol * abs(float(current.value)), SAFE * (current.error + previous.error), floor * magnitude)
        logger.debug(f"{label} at refinement x{factor}: {float(current.value):.12g}, change {change:.3e}")
        if change <= threshold:
            return float(current.value)
        previous = current
    msg = f"{label} not converged after {refinements} refinements"
    raise ConvergenceError(msg)


def stencil_derivative(func: Callable, x, h):
    """
    Fourth-order five-point first derivative with a fixed step.

    x and h share a shape; func may append trailing axes to it.
    """
    h = np.asarray(h, dtype=float)
    numerator = -func(x + 2.0 * h) + 8.0 * func(x + h) - 8.0 * func(x - h) + func(x - 2.0 * h)
    denominator = 12.0 * h.reshape(h.shape + (1,) * (np.ndim(numerator) - h.ndim))
    return numerator / denominator
