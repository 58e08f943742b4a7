"""
Batch services behind the pumping command.

- Per-point evaluation of the requested output kinds, with numerical
  pathologies turned into per-kind flags instead of failures.
- Grid dispatch (Celery group, process pool or serial), always returned in
  grid order.
- CSV and manifest writers with deterministic bytes.
- The verification suite run by ``pumping verify``.
"""

import csv
import inspect
import itertools
import json
import logging
import math
import tempfile
from collections import defaultdict
from collections.abc import Callable
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from pathlib import Path

import numpy as np
from celery import group
from django.conf import settings

from apps.pumping import __version__
from apps.pumping.config import NumericsSettings
from apps.pumping.config import SweepConfig
from apps.pumping.config import build_config
from apps.pumping.config import params_from_dict
from apps.pumping.config import params_to_dict
from apps.pumping.cumulants import check_reference
from apps.pumping.cumulants import dynamic_cgf
from apps.pumping.cumulants import dynamic_cumulant
from apps.pumping.cumulants import reference_cumulant
from apps.pumping.exceptions import ConvergenceError
from apps.pumping.exceptions import CrossCheckFailure
from apps.pumping.exceptions import DegenerateSpectrumError
from apps.pumping.exceptions import DomainError
from apps.pumping.exceptions import PumpingError
from apps.pumping.exceptions import ReferenceZeroError
from apps.pumping.exceptions import StencilMismatchError
from apps.pumping.exceptions import UndefinedCorrectionError
from apps.pumping.geometry import curvature
from apps.pumping.geometry import geometric_cgf_line
from apps.pumping.geometry import geometric_cumulant_line
from apps.pumping.geometry import geometric_cumulant_surface
from apps.pumping.geometry import geometric_flux_closed
from apps.pumping.geometry import geometric_noise_closed
from apps.pumping.geometry import low_temperature_limit_check
from apps.pumping.model import BathSpec
from apps.pumping.model import DriveProtocol
from apps.pumping.model import ModelParams
from apps.pumping.oracle import finite_time_cumulant
from apps.pumping.oracle import propagate_stencil
from apps.pumping.oracle import sample_trajectories
from apps.pumping.presets import OMEGA0
from apps.pumping.presets import PRESETS
from apps.pumping.spectral import dominant_eigenvalue
from apps.pumping.spectral import generator_at
from apps.pumping.thermo import CumulantSet
from apps.pumping.thermo import affinity
from apps.pumping.thermo import gc_symmetry_residual
from apps.pumping.thermo import locate_affinity_root
from apps.pumping.thermo import tur_report

logger = logging.getLogger(__name__)

CSV_COLUMNS = {
    "cgf": ("S_d", "S_g"),
    "dynamic": ("j_d1", "j_d2", "C_d1", "C_d2"),
    "geometric": ("j_g1", "j_g2", "j_g1_line", "j_g2_line", "C_g1", "C_g2"),
    "closed_form": ("j_g1_closed", "j_g2_closed", "flux_residual", "noise_residual"),
    "curvature": ("F_eigenvector", "F_printed", "F_printed_swapped"),
    "tur": ("affinity", "affinity_printed", "fano", "g_omega", "sigma_min", "standard_lhs", "modified_lhs"),
    "gc": ("affinity", "residual", "scale", "relative"),
    "oracle": (
        "j1_propagator",
        "j2_propagator",
        "j1_adiabatic",
        "j2_adiabatic",
        "mean_rate",
        "mean_error",
        "variance_rate",
        "variance_error",
    ),
}

EXCEPTION_FLAGS = (
    (ReferenceZeroError, "reference_zero"),
    (UndefinedCorrectionError, "g_undefined"),
    (ConvergenceError, "not_converged"),
    (DegenerateSpectrumError, "degenerate_spectrum"),
    (StencilMismatchError, "stencil_mismatch"),
    (DomainError, "domain_error"),
)
ROUTE_DISAGREEMENT = "route_disagreement"
ROUTE_UNCHECKED = "route_unchecked"
# geometric cumulants below this fraction of the total coupling are compared absolutely
ROUTE_FLOOR = 1e-8
MANIFEST_NAME = "manifest.json"
ROUTE_GRID = (0.0, 0.35, 0.7)
DECAY_GRID = (0.0, 1.0, 2.0, 3.0)
GC_GRID = (0.0, 1.0, 1.5, 2.0, 2.5, 3.0)
ORACLE_TRAJECTORIES = 100_000
ORACLE_PERIODS = 8


def _flag_for(exc: PumpingError) -> str:
    for exc_type, token in EXCEPTION_FLAGS:
        if isinstance(exc, exc_type):
            return token
    return "error"


def point_seed(seed: int, index: int) -> int:
    """Sampler seed of one grid point, derived from the run seed alone."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


# ============================================================================
# Point Evaluation
# ============================================================================


class PointEvaluator:
    """
    Evaluates output kinds for one grid point.

    Cumulants are computed once and shared between kinds. Each quantity is
    guarded separately: a failure leaves that value empty and adds a flag to
    the kind it belongs to.
    """

    def __init__(self, params: ModelParams, lam: float, numerics: NumericsSettings, seed: int):
        self.params = params
        self.lam = lam
        self.numerics = numerics
        self.seed = seed
        self.flags: dict[str, set[str]] = defaultdict(set)
        self.failures: list[str] = []
        self._cache: dict = {}

    @property
    def driven(self) -> bool:
        return self.params.drive.Omega > 0

    def guarded(self, kind: str, func: Callable):
        try:
            value = func()
        except PumpingError as exc:
            token = _flag_for(exc)
            self.flags[kind].add(token)
            logger.warning(f"{kind} flagged {token}: {exc}")
            return None
        return None if value is None else float(value)

    def cached(self, key, func: Callable):
        if key not in self._cache:
            self._cache[key] = func()
        return self._cache[key]

    def dynamic(self, n: int) -> float:
        quad, scheme = self.numerics.quadrature, self.numerics.derivative
        return self.cached(("dynamic", n), lambda: dynamic_cumulant(self.params, n, quad, scheme))

    def geometric(self, n: int, route: str) -> float:
        if not self.driven:
            return 0.0
        quad, scheme = self.numerics.quadrature, self.numerics.derivative
        if route == "surface":
            form = self.numerics.curvature_form
            compute = lambda: geometric_cumulant_surface(self.params, n, scheme, form=form)  # noqa: E731
        else:
            compute = lambda: geometric_cumulant_line(self.params, n, quad, scheme)  # noqa: E731
        return self.cached(("geometric", n, route), compute)

    def scaled(self, value: float, n: int) -> float:
        quad, scheme = self.numerics.quadrature, self.numerics.derivative
        reference = self.cached(("reference", n), lambda: reference_cumulant(self.params, n, quad, scheme))
        check_reference(self.params, reference, n)
        return value / reference

    def cumulant_set(self) -> CumulantSet:
        route = self.numerics.geometric_route
        return CumulantSet(
            (self.dynamic(1), self.dynamic(2)),
            (self.geometric(1, route), self.geometric(2, route)),
        )

    # ------------------------------------------------------------------
    # Output kinds
    # ------------------------------------------------------------------

    def cgf(self) -> dict:
        quad = self.numerics.quadrature

        def geometric_cgf():
            return geometric_cgf_line(self.params, self.lam, quad) if self.driven else 0.0

        return {
            "S_d": self.guarded("cgf", lambda: dynamic_cgf(self.params, self.lam, quad)),
            "S_g": self.guarded("cgf", geometric_cgf),
        }

    def dynamic_kind(self) -> dict:
        values = {}
        for n in (1, 2):
            values[f"j_d{n}"] = self.guarded("dynamic", lambda n=n: self.dynamic(n))
            values[f"C_d{n}"] = self.guarded("dynamic", lambda n=n: self.scaled(self.dynamic(n), n))
        return values

    def geometric_kind(self) -> dict:
        route = self.numerics.geometric_route
        values = {}
        for n in (1, 2):
            values[f"j_g{n}"] = self.guarded("geometric", lambda n=n: self.geometric(n, route))
            values[f"j_g{n}_line"] = self.guarded("geometric", lambda n=n: self.geometric(n, "line"))
            values[f"C_g{n}"] = self.guarded("geometric", lambda n=n: self.scaled(self.geometric(n, route), n))
            surface = self.guarded("geometric", lambda n=n: self.geometric(n, "surface"))
            self._check_routes(n, surface, values[f"j_g{n}_line"])
        return values

    def _check_routes(self, n: int, surface: float | None, line: float | None) -> None:
        if surface is None or line is None:
            self.flags["geometric"].add(ROUTE_UNCHECKED)
            return
        floor = ROUTE_FLOOR * (self.params.left.gamma + self.params.right.gamma)
        disagreement = abs(surface - line) / max(abs(surface), abs(line), floor)
        if disagreement > self.numerics.route_tolerance:
            self.flags["geometric"].add(ROUTE_DISAGREEMENT)
            message = f"j_g^({n}) surface {surface:.12g} vs line {line:.12g} (relative {disagreement:.3e})"
            self.failures.append(message)
            logger.warning(f"Route disagreement: {message}")

    def closed_form(self) -> dict:
        quad = self.numerics.quadrature
        flux = self.guarded("closed_form", lambda: geometric_flux_closed(self.params, quad))
        noise = self.guarded("closed_form", lambda: geometric_noise_closed(self.params, quad))
        surface = [self.guarded("closed_form", lambda n=n: self.geometric(n, "surface")) for n in (1, 2)]
        return {
            "j_g1_closed": flux,
            "j_g2_closed": noise,
            "flux_residual": None if flux is None or surface[0] is None else flux - surface[0],
            "noise_residual": None if noise is None or surface[1] is None else noise - surface[1],
        }

    def curvature_kind(self) -> dict:
        left_T0, right_T0 = self.params.left.T0, self.params.right.T0  # noqa: N806

        def at_base(form):
            return curvature(self.params, self.lam, left_T0, right_T0, form)

        return {
            f"F_{form}": self.guarded("curvature", lambda form=form: at_base(form))
            for form in ("eigenvector", "printed", "printed_swapped")
        }

    def tur(self) -> dict:
        quad, scheme = self.numerics.quadrature, self.numerics.derivative
        values = dict.fromkeys(CSV_COLUMNS["tur"])
        values["affinity_printed"] = self.guarded("tur", lambda: affinity(self.params, "printed", quad))
        values["affinity"] = self.guarded("tur", lambda: affinity(self.params, "rates", quad))
        try:
            cumulants = self.cumulant_set()
            if cumulants.flux != 0:
                values["fano"] = cumulants.noise / cumulants.flux
            report = tur_report(self.params, quad, scheme, cumulants)
        except PumpingError as exc:
            self.flags["tur"].add(_flag_for(exc))
            logger.warning(f"tur flagged: {exc}")
            return values
        self.flags["tur"] |= report.flags
        values.update(
            affinity=report.affinity,
            fano=report.fano,
            g_omega=report.g_omega,
            sigma_min=report.sigma_min,
            standard_lhs=report.standard_lhs,
            modified_lhs=report.modified_lhs,
        )
        return {key: None if value is None else float(value) for key, value in values.items()}

    def gc(self) -> dict:
        quad = self.numerics.quadrature
        try:
            result = gc_symmetry_residual(self.params, None, quad)
        except PumpingError as exc:
            self.flags["gc"].add(_flag_for(exc))
            return dict.fromkeys(CSV_COLUMNS["gc"])
        return {
            "affinity": result.affinity,
            "residual": result.residual,
            "scale": result.scale,
            "relative": result.relative,
        }

    def oracle(self) -> dict:
        oracle_settings = self.numerics.oracle
        values = dict.fromkeys(CSV_COLUMNS["oracle"])
        if self.driven:
            try:
                runs = propagate_stencil(
                    self.params,
                    5,
                    oracle_settings.lambda_step,
                    oracle_settings.periods,
                    oracle_settings.steps_per_period,
                )
                values["j1_propagator"] = finite_time_cumulant(runs, 1)
                values["j2_propagator"] = finite_time_cumulant(runs, 2)
            except PumpingError as exc:
                self.flags["oracle"].add(_flag_for(exc))
        else:
            self.flags["oracle"].add("not_driven")
        for n in (1, 2):
            values[f"j{n}_adiabatic"] = self.guarded(
                "oracle",
                lambda n=n: self.dynamic(n) + self.geometric(n, self.numerics.geometric_route),
            )
        batch = sample_trajectories(self.params, oracle_settings.trajectories, oracle_settings.horizon, self.seed)
        values.update(
            mean_rate=batch.mean_rate,
            mean_error=batch.mean_error,
            variance_rate=batch.variance_rate,
            variance_error=batch.variance_error,
        )
        return values

    def evaluate(self, outputs) -> dict:
        handlers = {
            "cgf": self.cgf,
            "dynamic": self.dynamic_kind,
            "geometric": self.geometric_kind,
            "closed_form": self.closed_form,
            "curvature": self.curvature_kind,
            "tur": self.tur,
            "gc": self.gc,
            "oracle": self.oracle,
        }
        return {kind: handlers[kind]() for kind in outputs}


def build_payload(config: SweepConfig, point) -> dict:
    """JSON-serialisable description of one grid point."""
    return {
        "index": point.index,
        "coords": point.coords,
        "model": params_to_dict(point.params),
        "lambda": point.lam,
        "outputs": list(config.outputs),
        "numerics": config.numerics.to_dict(),
        "seed": point_seed(config.seed, point.index),
    }


def evaluate_payload(payload: dict) -> dict:
    params = params_from_dict(payload["model"])
    numerics = NumericsSettings.from_dict(payload["numerics"])
    evaluator = PointEvaluator(params, payload["lambda"], numerics, payload["seed"])
    values = evaluator.evaluate(payload["outputs"])
    logger.info(f"Point {payload['index']} {payload['coords']} done")
    return {
        "index": payload["index"],
        "coords": payload["coords"],
        "values": values,
        "flags": {kind: sorted(tokens) for kind, tokens in evaluator.flags.items() if tokens},
        "failures": evaluator.failures,
    }


# ============================================================================
# Dispatch
# ============================================================================


def evaluate_grid(config: SweepConfig, threads: int = 1) -> list[dict]:
    """
    Evaluate every grid point, ordered by grid index.

    PUMPING_DISPATCH = "celery" sends a Celery group; otherwise points run in
    a process pool when threads > 1 and serially when not.
    """
    payloads = [build_payload(config, point) for point in config.grid()]
    mode = settings.PUMPING_DISPATCH
    logger.info(f"Evaluating {len(payloads)} points ({mode} dispatch, {threads} workers)")
    if mode == "celery":
        from apps.pumping.tasks import evaluate_point  # noqa: PLC0415

        results = group(evaluate_point.s(payload) for payload in payloads).apply_async().get()
    elif threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate_payload, payloads))
    else:
        results = [evaluate_payload(payload) for payload in payloads]
    return sorted(results, key=lambda result: result["index"])


# ============================================================================
# Writers
# ============================================================================


def format_value(value) -> str:
    return "" if value is None else format(float(value), ".17g")


def write_csv(path: Path, kind: str, axis_names, results: list[dict]) -> None:
    """Axes first, quantities next, flags last; flagged values are empty."""
    columns = [*axis_names, *CSV_COLUMNS[kind], "flags"]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for result in results:
            row = {name: format_value(result["coords"][name]) for name in axis_names}
            row.update({column: format_value(result["values"][kind].get(column)) for column in CSV_COLUMNS[kind]})
            row["flags"] = ";".join(result["flags"].get(kind, []))
            writer.writerow(row)


def write_manifest(path: Path, config: SweepConfig, results: list[dict], files: list[str]) -> None:
    manifest = {
        **config.to_manifest(),
        "version": __version__,
        "files": files,
        "points": [{"index": r["index"], "coords": r["coords"], "flags": r["flags"]} for r in results],
        "cross_check_failures": [f"point {r['index']}: {message}" for r in results for message in r["failures"]],
    }
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class RunResult:
    out_dir: Path
    files: tuple[Path, ...]
    failures: tuple[str, ...]
    results: list = field(default_factory=list, compare=False)

    @property
    def ok(self) -> bool:
        return not self.failures


def run_sweep(config: SweepConfig, out_dir: Path, threads: int = 1) -> RunResult:
    """
    Evaluate the grid and write one CSV per output kind plus the manifest.

    Raises CrossCheckFailure, carrying the RunResult, when any unflagged
    cross-check failed; the files are complete in that case too.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = evaluate_grid(config, threads)

    files = []
    for kind in config.outputs:
        path = out_dir / f"{kind}.csv"
        write_csv(path, kind, config.axis_columns, results)
        files.append(path)
    manifest_path = out_dir / MANIFEST_NAME
    write_manifest(manifest_path, config, results, [path.name for path in files])

    failures = tuple(f"point {r['index']}: {message}" for r in results for message in r["failures"])
    logger.info(f"Wrote {len(files)} tables for {len(results)} points to {out_dir}")
    result = RunResult(out_dir, (*files, manifest_path), failures, results)
    if not result.ok:
        raise CrossCheckFailure(result)
    return result


# ============================================================================
# Verification Suite
# ============================================================================


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _route_gap(params: ModelParams, a: float, b: float) -> float:
    floor = ROUTE_FLOOR * (params.left.gamma + params.right.gamma)
    return abs(a - b) / max(abs(a), abs(b), floor)


def _exchange_gaps(base: ModelParams) -> dict[str, float]:
    forward, backward = base.with_squeezing(0.7, 0.0), base.with_squeezing(0.0, 0.7)
    return {
        "j_d1 antisymmetric": _relative_gap(dynamic_cumulant(forward, 1), -dynamic_cumulant(backward, 1)),
        "j_d2 symmetric": _relative_gap(dynamic_cumulant(forward, 2), dynamic_cumulant(backward, 2)),
        "j_g1 symmetric": _relative_gap(
            geometric_cumulant_surface(forward, 1),
            geometric_cumulant_surface(backward, 1),
        ),
        "j_g2 antisymmetric": _relative_gap(
            geometric_cumulant_surface(forward, 2),
            -geometric_cumulant_surface(backward, 2),
        ),
    }


def check_zero_eigenvalue(seed: int = 0, draws: int = 10_000) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws // 1000):
        params = ModelParams.from_omega0(
            OMEGA0,
            BathSpec(float(rng.uniform(0.0, 2000.0)), float(rng.uniform(0.0, 3.0)), 300.0),
            BathSpec(float(rng.uniform(1.0, 2000.0)), float(rng.uniform(0.0, 3.0)), 300.0),
        )
        gen = generator_at(params, 0.0, rng.uniform(20.0, 600.0, 1000), rng.uniform(20.0, 600.0, 1000))
        scale = gen.exit_occupied + gen.exit_empty
        worst = max(worst, float(np.max(np.abs(dominant_eigenvalue(gen)) / scale)))
    return CheckResult("zero_eigenvalue", worst <= 1e-12, f"max |zeta0|/rates = {worst:.3e}")


def check_static_gc() -> CheckResult:
    params = PRESETS["fig3"].params().reference()
    result = gc_symmetry_residual(params)
    return CheckResult("static_gc", result.relative <= 1e-10, f"relative residual {result.relative:.3e}")


def check_exchange_symmetry() -> CheckResult:
    gaps = _exchange_gaps(PRESETS["fig2"].params())
    worst = max(gaps, key=gaps.get)
    return CheckResult("exchange_symmetry", gaps[worst] <= 1e-6, f"worst {worst}: {gaps[worst]:.3e}")


def check_exchange_asymmetry() -> CheckResult:
    """Unequal temperatures break all four exchange symmetries."""
    gaps = _exchange_gaps(PRESETS["fig3"].params())
    closest = min(gaps, key=gaps.get)
    return CheckResult("exchange_asymmetry", gaps[closest] > 1e-6, f"closest {closest}: {gaps[closest]:.3e}")


def check_route_agreement() -> CheckResult:
    """Surface and line routes over the {0, 0.35, 0.7} squeezing grid at 300/250 K."""
    base = PRESETS["fig1cd"].params()
    worst, where = 0.0, None
    for x_left, x_right in itertools.product(ROUTE_GRID, repeat=2):
        params = base.with_squeezing(x_left, x_right)
        for n in (1, 2):
            gap = _route_gap(params, geometric_cumulant_surface(params, n), geometric_cumulant_line(params, n))
            if gap >= worst:
                worst, where = gap, f"j_g^({n}) at ({x_left}, {x_right})"
    return CheckResult("route_agreement", worst <= 1e-4, f"worst {where}: {worst:.3e}")


def check_oracle_agreement(seed: int = 0) -> CheckResult:
    """Propagated cumulants against the adiabatic ones, sampled mean against the propagated flux."""
    params = PRESETS["fig1cd"].params().with_squeezing(0.7, 0.0)
    runs = propagate_stencil(params)
    gaps = []
    for n in (1, 2):
        adiabatic = dynamic_cumulant(params, n) + geometric_cumulant_surface(params, n)
        gaps.append(_relative_gap(finite_time_cumulant(runs, n), adiabatic))
    batch = sample_trajectories(params, ORACLE_TRAJECTORIES, ORACLE_PERIODS * params.period, seed)
    deviation = abs(batch.mean_rate - finite_time_cumulant(runs, 1)) / batch.mean_error
    return CheckResult(
        "oracle_agreement",
        max(gaps) <= 1e-2 and deviation <= 3.0,
        f"propagator gaps {gaps[0]:.3e}, {gaps[1]:.3e}; sampler off by {deviation:.2f} standard errors",
    )


def check_geometricity_decay() -> CheckResult:
    """Scaled geometric cumulants shrink monotonically along x_left = x_right."""
    base = PRESETS["fig1cd"].params()
    details, passed = [], True
    for n in (1, 2):
        reference = reference_cumulant(base, n)
        scaled = [abs(geometric_cumulant_surface(base.with_squeezing(x, x), n) / reference) for x in DECAY_GRID]
        ratio = scaled[-1] / scaled[0]
        passed &= ratio < 5e-2 and all(a > b for a, b in itertools.pairwise(scaled))
        details.append(f"|C_g^({n})| ratio {ratio:.3e}")
    return CheckResult("geometricity_decay", passed, ", ".join(details))


def check_gc_recovery() -> CheckResult:
    """The driven GC residual falls monotonically with squeezing."""
    base = PRESETS["fig1cd"].params()
    residuals = [gc_symmetry_residual(base.with_squeezing(x, x)).relative for x in GC_GRID]
    monotone = all(a > b for a, b in itertools.pairwise(residuals))
    ratio = residuals[-1] / residuals[0]
    return CheckResult("gc_recovery", monotone and ratio <= 0.1, f"x = 3 over x = 0: {ratio:.3e}")


def check_modified_tur() -> CheckResult:
    """Modified TUR on every fig4 point not flagged at zero affinity."""
    config = build_config({"preset": "fig4"})
    lowest, skipped = math.inf, 0
    for point in config.grid():
        report = tur_report(point.params)
        if report.modified_lhs is None:
            skipped += 1
            continue
        lowest = min(lowest, report.modified_lhs)
    return CheckResult("modified_tur", lowest >= 2.0 - 1e-9, f"min lhs {lowest:.9f}, {skipped} flagged")


def check_reproducible_preset() -> CheckResult:
    """Two runs of the fig2 preset write byte-identical files."""
    config = build_config({"preset": "fig2"})
    contents = []
    with tempfile.TemporaryDirectory() as scratch:
        for run in ("first", "second"):
            try:
                result = run_sweep(config, Path(scratch) / run)
            except CrossCheckFailure as exc:
                result = exc.result
            contents.append({path.name: path.read_bytes() for path in result.files})
    differing = sorted(name for name in contents[0] if contents[0][name] != contents[1].get(name))
    return CheckResult("reproducible_preset", not differing, f"differing files: {differing or 'none'}")


def check_degenerate_drive() -> CheckResult:
    base = PRESETS["fig3"].params().with_squeezing(0.7, 0.35)
    drive = base.drive
    params = replace(base, drive=DriveProtocol(drive.A0, drive.Omega, drive.phi_left, drive.phi_left))
    scale = abs(dynamic_cumulant(params, 1))
    largest = max(abs(geometric_cumulant_surface(params, n)) for n in (1, 2))
    return CheckResult("degenerate_drive", largest <= 1e-10 * scale, f"max |j_g| = {largest:.3e}")


def check_standard_tur() -> CheckResult:
    base = PRESETS["fig3"].params().reference()
    lowest = math.inf
    for left_T0, right_T0 in ((300.0, 250.0), (300.0, 200.0), (250.0, 300.0), (400.0, 150.0)):  # noqa: N806
        params = replace(base, left=replace(base.left, T0=left_T0), right=replace(base.right, T0=right_T0))
        lowest = min(lowest, tur_report(params).standard_lhs)
    return CheckResult("standard_tur", lowest >= 2.0 - 1e-9, f"min F*A = {lowest:.6f}")


def check_affinity_root() -> CheckResult:
    params = PRESETS["fig4"].params()
    root = locate_affinity_root(params)
    return CheckResult("affinity_root", abs(root - params.right.squeeze_x) <= 1e-6, f"root at x_left = {root:.9f}")


def check_diagonal_zero() -> CheckResult:
    base = PRESETS["fig2"].params()
    reference = abs(geometric_cumulant_surface(base.with_squeezing(0.7, 0.0), 2))
    diagonal = base.with_squeezing(0.7, 0.7)
    noise = abs(geometric_cumulant_surface(diagonal, 2))
    flux = abs(geometric_cumulant_surface(diagonal, 1))
    return CheckResult(
        "diagonal_zero",
        noise <= 1e-6 * reference and flux > 0,
        f"|j_g2| = {noise:.3e} against {reference:.3e}, |j_g1| = {flux:.3e}",
    )


def check_low_temperature() -> CheckResult:
    params = ModelParams.from_omega0(
        OMEGA0,
        BathSpec(1000.0, 0.0, 25.0),
        BathSpec(1000.0, 0.8, 25.0),
        DriveProtocol.cos_sin(2.0, 100.0, math.pi / 4),
    )
    report = low_temperature_limit_check(params, 0.5)
    return CheckResult("low_temperature", report.within(0.1), f"fitted exponent {report.exponent:.4f}")


def check_static_sampler(seed: int = 0) -> CheckResult:
    params = PRESETS["fig3"].params().reference()
    batch = sample_trajectories(params, 20_000, 0.5, seed)
    expected = dynamic_cumulant(params, 1)
    deviation = abs(batch.mean_rate - expected) / batch.mean_error
    return CheckResult("static_sampler", deviation <= 3.0, f"mean off by {deviation:.2f} standard errors")


VERIFICATION_CHECKS = (
    check_zero_eigenvalue,
    check_static_gc,
    check_exchange_symmetry,
    check_exchange_asymmetry,
    check_route_agreement,
    check_oracle_agreement,
    check_degenerate_drive,
    check_standard_tur,
    check_affinity_root,
    check_diagonal_zero,
    check_geometricity_decay,
    check_gc_recovery,
    check_modified_tur,
    check_low_temperature,
    check_static_sampler,
    check_reproducible_preset,
)


def check_name(check: Callable) -> str:
    return check.__name__.removeprefix("check_")


def run_verification(seed: int = 0, names: Iterable[str] | None = None) -> list[CheckResult]:
    """Run the registered checks, or only those named; errors count as failures."""
    wanted = None if names is None else set(names)
    selected = [check for check in VERIFICATION_CHECKS if wanted is None or check_name(check) in wanted]
    results = []
    for check in selected:
        kwargs = {"seed": seed} if "seed" in inspect.signature(check).parameters else {}
        try:
            result = check(**kwargs)
        except PumpingError as exc:
            result = CheckResult(check_name(check), False, f"{type(exc).__name__}: {exc}")
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f"Check {result.name}: {'pass' if result.passed else 'FAIL'} ({result.detail})")
        results.append(result)
    return results


def write_verification(path: Path, results: list[CheckResult]) -> None:
    payload = {
        "version": __version__,
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
    }
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
