"""
Independent references for the adiabatic cumulants.

- Direct propagation of the tilted master equation over many periods; the
  long-time growth rate of the log-norm is the exact cumulant generating
  function, which finite differences in lambda turn into cumulants.
- Monte Carlo sampling of quantum-jump trajectories of the net number of
  quanta absorbed from the left reservoir, using thinning against a
  constant rate envelope.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from apps.pumping.exceptions import ConvergenceError
from apps.pumping.exceptions import DomainError
from apps.pumping.exceptions import StencilMismatchError
from apps.pumping.model import BathSpec
from apps.pumping.model import ModelParams
from apps.pumping.model import bath_rates
from apps.pumping.model import rates
from apps.pumping.spectral import build_generator
from apps.pumping.spectral import steady_state

logger = logging.getLogger(__name__)

DEFAULT_PERIODS = 50
DEFAULT_STEPS_PER_PERIOD = 64
DEFAULT_LAMBDA_STEP = 0.02
DISCARD_FRACTION = 0.2
SAMPLER_BLOCK = 4096


@dataclass(frozen=True)
class PropagationRun:
    """Log-norm trace of one propagation, sampled at period boundaries."""

    lam: float
    period: float
    steps_per_period: int
    times: np.ndarray
    log_norms: np.ndarray
    final_state: np.ndarray

    @property
    def periods(self) -> int:
        return len(self.times) - 1

    def growth_rate(self, discard: float = DISCARD_FRACTION) -> float:
        """Finite-time CGF estimate from the periods after the discarded transient."""
        start = math.ceil(discard * self.periods)
        if start >= self.periods:
            msg = f"Nothing left after discarding {start} of {self.periods} periods"
            raise DomainError(msg)
        elapsed = self.times[-1] - self.times[start]
        return float((self.log_norms[-1] - self.log_norms[start]) / elapsed)


@dataclass(frozen=True)
class TrajectoryBatch:
    seed: int
    horizon: float
    counts: np.ndarray

    @property
    def size(self) -> int:
        return len(self.counts)

    @property
    def mean_rate(self) -> float:
        return float(np.mean(self.counts)) / self.horizon

    @property
    def variance_rate(self) -> float:
        return float(np.var(self.counts, ddof=1)) / self.horizon

    @property
    def mean_error(self) -> float:
        return float(np.std(self.counts, ddof=1)) / math.sqrt(self.size) / self.horizon

    @property
    def variance_error(self) -> float:
        """Standard error of the sample variance from the fourth central moment."""
        centred = self.counts - np.mean(self.counts)
        second = float(np.mean(centred**2))
        fourth = float(np.mean(centred**4))
        n = self.size
        return math.sqrt(max(fourth - second**2 * (n - 3) / (n - 1), 0.0) / n) / self.horizon


def propagate(
    params: ModelParams,
    lam: float,
    periods: int = DEFAULT_PERIODS,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    initial_state: np.ndarray | None = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> PropagationRun:
    """
    Integrate d|p>/dt = M(lambda, t)|p> period by period with DOP853.

    The state is renormalised to unit sum at every period boundary and the
    logarithms of the removed norms are accumulated. Starts from the
    instantaneous stationary state at t = 0 unless told otherwise.
    """
    if not params.drive.Omega > 0:
        msg = "Propagation needs a driven model with Omega > 0"
        raise DomainError(msg)
    if periods < 1:
        msg = f"At least one period is required, got {periods}"
        raise DomainError(msg)

    period = params.period
    state = np.asarray(steady_state(params, 0.0) if initial_state is None else initial_state, dtype=float)

    def rhs(t, y):
        return build_generator(params, lam, t).matrix @ y

    times = np.arange(periods + 1) * period
    log_norms = np.zeros(periods + 1)
    for k in range(periods):
        solution = solve_ivp(
            rhs,
            (times[k], times[k + 1]),
            state,
            method="DOP853",
            rtol=rtol,
            atol=atol,
            max_step=period / steps_per_period,
        )
        if not solution.success:
            msg = f"Propagation failed in period {k} at lambda={lam}: {solution.message}"
            raise ConvergenceError(msg)
        end = solution.y[:, -1]
        norm = float(end.sum())
        if not norm > 0:
            msg = f"Propagated norm collapsed to {norm:.3e} in period {k}"
            raise ConvergenceError(msg)
        log_norms[k + 1] = log_norms[k] + math.log(norm)
        state = end / norm

    logger.debug(f"Propagated lambda={lam} over {periods} periods, log-norm {log_norms[-1]:.12g}")
    return PropagationRun(float(lam), period, steps_per_period, times, log_norms, state)


def propagate_stencil(
    params: ModelParams,
    points: int = 5,
    step: float = DEFAULT_LAMBDA_STEP,
    periods: int = DEFAULT_PERIODS,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
) -> list[PropagationRun]:
    """Runs at the lambda stencil centred on zero, ordered by lambda."""
    half = points // 2
    return [propagate(params, k * step, periods, steps_per_period) for k in range(-half, half + 1)]


def _check_stencil(runs: Sequence[PropagationRun]) -> float:
    if len(runs) not in (3, 5):
        msg = f"Stencil needs 3 or 5 runs, got {len(runs)}"
        raise StencilMismatchError(msg)
    first = runs[0]
    for run in runs[1:]:
        if run.periods != first.periods or run.steps_per_period != first.steps_per_period:
            msg = "Runs differ in period count or step resolution"
            raise StencilMismatchError(msg)
        if not math.isclose(run.period, first.period, rel_tol=1e-12):
            msg = "Runs were propagated with different drive periods"
            raise StencilMismatchError(msg)

    lams = np.array([run.lam for run in runs])
    half = len(runs) // 2
    step = lams[half + 1] - lams[half]
    expected = (np.arange(len(runs)) - half) * step
    if not step > 0 or not np.allclose(lams, expected, rtol=0.0, atol=1e-12 * max(step, 1.0)):
        msg = f"Lambda values {lams.tolist()} are not an equispaced stencil centred on zero"
        raise StencilMismatchError(msg)
    return float(step)


def finite_time_cumulant(runs: Sequence[PropagationRun], n: int, discard: float = DISCARD_FRACTION) -> float:
    """First or second cumulant from a 3- or 5-point lambda stencil of runs."""
    step = _check_stencil(runs)
    c = [run.growth_rate(discard) for run in runs]
    if len(c) == 5:  # noqa: PLR2004
        if n == 1:
            return (-c[4] + 8.0 * c[3] - 8.0 * c[1] + c[0]) / (12.0 * step)
        if n == 2:  # noqa: PLR2004
            return (-c[4] + 16.0 * c[3] - 30.0 * c[2] + 16.0 * c[1] - c[0]) / (12.0 * step**2)
    else:
        if n == 1:
            return (c[2] - c[0]) / (2.0 * step)
        if n == 2:  # noqa: PLR2004
            return (c[2] - 2.0 * c[1] + c[0]) / step**2
    msg = f"Only the first two cumulants are supported, got n={n}"
    raise DomainError(msg)


def _rate_envelope(params: ModelParams) -> float:
    """Upper bound on the total jump rate: all alpha at the hottest temperatures."""
    ceiling = 0.0
    for bath in (params.left, params.right):
        hottest = BathSpec(bath.gamma, bath.squeeze_x, bath.T0 + params.drive.A0)
        alpha, _ = bath_rates(params.theta0, hottest, hottest.T0)
        ceiling += alpha
    return float(ceiling)


def _simulate_block(params, size, horizon, envelope, p_occupied, rng) -> np.ndarray:
    occupied = rng.random(size) < p_occupied
    clock = np.zeros(size)
    counts = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    while active.size:
        clock[active] += rng.exponential(1.0 / envelope, active.size)
        active = active[clock[active] < horizon]
        if not active.size:
            break
        times = clock[active]
        alpha_left, beta_left = rates(params, "left", times)
        alpha_right, beta_right = rates(params, "right", times)
        state = occupied[active]
        left_rate = np.where(state, alpha_left, beta_left)
        right_rate = np.where(state, alpha_right, beta_right)

        # one uniform picks the left channel, the right channel or a rejection
        pick = rng.random(active.size) * envelope
        left_jump = pick < left_rate
        jumped = pick < left_rate + right_rate
        counts[active[left_jump]] += np.where(state[left_jump], -1, 1)
        occupied[active[jumped]] = ~state[jumped]
    return counts


def sample_trajectories(
    params: ModelParams,
    trajectories: int,
    horizon: float,
    seed: int,
    block_size: int = SAMPLER_BLOCK,
) -> TrajectoryBatch:
    """
    Net left-bath counts q over [0, horizon] ps for independent trajectories.

    Absorption from the left bath counts +1, emission into it -1. Each block
    of trajectories draws from its own stream seeded by (seed, block index),
    so results depend on the seed alone.
    """
    if trajectories < 1 or not horizon > 0:
        msg = f"Need trajectories >= 1 and horizon > 0, got {trajectories} and {horizon}"
        raise DomainError(msg)

    envelope = _rate_envelope(params)
    p_occupied = float(steady_state(params, 0.0)[0])
    blocks = []
    for index, start in enumerate(range(0, trajectories, block_size)):
        size = min(block_size, trajectories - start)
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        blocks.append(_simulate_block(params, size, horizon, envelope, p_occupied, rng))

    counts = np.concatenate(blocks)
    logger.info(f"Sampled {trajectories} trajectories over {horizon} ps (seed {seed})")
    return TrajectoryBatch(seed, float(horizon), counts)
