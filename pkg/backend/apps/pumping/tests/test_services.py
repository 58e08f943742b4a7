import json
from dataclasses import replace

import numpy as np
import pytest

from apps.pumping import __version__
from apps.pumping.config import NumericsSettings
from apps.pumping.config import OracleSettings
from apps.pumping.config import build_config
from apps.pumping.exceptions import ConvergenceError
from apps.pumping.exceptions import CrossCheckFailure
from apps.pumping.model import DriveProtocol
from apps.pumping.presets import PRESETS
from apps.pumping.services import MANIFEST_NAME
from apps.pumping.services import ROUTE_DISAGREEMENT
from apps.pumping.services import ROUTE_UNCHECKED
from apps.pumping.services import CheckResult
from apps.pumping.services import PointEvaluator
from apps.pumping.services import build_payload
from apps.pumping.services import check_affinity_root
from apps.pumping.services import check_degenerate_drive
from apps.pumping.services import check_exchange_asymmetry
from apps.pumping.services import check_low_temperature
from apps.pumping.services import check_standard_tur
from apps.pumping.services import check_static_gc
from apps.pumping.services import check_zero_eigenvalue
from apps.pumping.services import evaluate_grid
from apps.pumping.services import evaluate_payload
from apps.pumping.services import format_value
from apps.pumping.services import point_seed
from apps.pumping.services import run_sweep
from apps.pumping.services import run_verification
from apps.pumping.services import write_csv
from apps.pumping.services import write_verification


def _static_document(**overrides):
    document = {
        "model": {
            "theta0": 177.6,
            "left": {"gamma": 1000.0, "T0": 300.0},
            "right": {"gamma": 1000.0, "T0": 300.0},
        },
        "sweep": [{"name": "x_left", "values": [0.0, 0.7]}, {"name": "x_right", "values": [0.0, 0.7]}],
        "outputs": ["dynamic", "geometric"],
    }
    document.update(overrides)
    return document


@pytest.fixture
def static_config():
    return build_config(_static_document())


def _read_rows(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","), strict=True)) for line in lines[1:]]


class TestPointSeed:
    """Test per-point sampler seeds."""

    def test_deterministic(self):
        """Test the seed depends on run seed and index alone."""
        assert point_seed(7, 3) == point_seed(7, 3)

    def test_distinct(self):
        """Test neighbouring points and runs get different streams."""
        seeds = {point_seed(7, index) for index in range(100)} | {point_seed(8, 0)}
        assert len(seeds) == 101

    def test_unsigned_64_bit(self):
        """Test seeds fit an unsigned 64-bit integer."""
        assert 0 <= point_seed(2**64 - 1, 5) < 2**64


class TestPointEvaluator:
    """Test per-point evaluation and flagging."""

    def test_static_point_has_no_geometric_part(self, static):
        """Test an undriven point reports exactly zero geometric cumulants."""
        params = replace(static, drive=DriveProtocol())
        values = PointEvaluator(params, 0.5, NumericsSettings(), 0).geometric_kind()
        assert values["j_g1"] == 0.0
        assert values["j_g2_line"] == 0.0
        assert values["C_g1"] == 0.0

    def test_reference_zero_is_flagged(self, static):
        """Test C_d1 is left empty at equal base temperatures."""
        params = replace(static, right=replace(static.right, T0=300.0), drive=DriveProtocol())
        evaluator = PointEvaluator(params, 0.5, NumericsSettings(), 0)
        values = evaluator.dynamic_kind()
        assert values["C_d1"] is None
        assert values["C_d2"] == pytest.approx(1.0)
        assert evaluator.flags["dynamic"] == {"reference_zero"}

    def test_route_disagreement(self, driven):
        """Test disagreeing routes are flagged and recorded as failures."""
        evaluator = PointEvaluator(driven, 0.5, NumericsSettings(), 0)
        evaluator._check_routes(1, 1.0, 1.1)  # noqa: SLF001
        assert ROUTE_DISAGREEMENT in evaluator.flags["geometric"]
        assert len(evaluator.failures) == 1

    def test_routes_within_tolerance(self, driven):
        """Test agreeing routes pass silently."""
        evaluator = PointEvaluator(driven, 0.5, NumericsSettings(), 0)
        evaluator._check_routes(2, 1.0, 1.0 + 1e-9)  # noqa: SLF001
        assert not evaluator.failures

    def test_curvature_form_reaches_surface_route(self, driven, monkeypatch):
        """Test the configured curvature form is used by the surface route."""
        seen = []

        def surface(params, n, scheme=None, form="eigenvector"):
            seen.append(form)
            return 1.0

        monkeypatch.setattr("apps.pumping.services.geometric_cumulant_surface", surface)
        evaluator = PointEvaluator(driven, 0.5, NumericsSettings(curvature_form="printed"), 0)
        evaluator.geometric(1, "surface")
        evaluator.closed_form()
        assert seen == ["printed", "printed"]

    def test_failed_line_route_blanks_only_its_columns(self, driven, monkeypatch):
        """Test a second-order line failure keeps the other geometric values and marks the check skipped."""

        def line(params, n, quad=None, scheme=None):
            if n == 2:  # noqa: PLR2004
                msg = "Period average of order 2 not converged after 5 refinements"
                raise ConvergenceError(msg)
            return 3.0

        monkeypatch.setattr("apps.pumping.services.geometric_cumulant_line", line)
        monkeypatch.setattr("apps.pumping.services.geometric_cumulant_surface", lambda params, n, scheme, form: 3.0)
        evaluator = PointEvaluator(driven, 0.5, NumericsSettings(), 0)
        values = evaluator.geometric_kind()
        assert values["j_g1_line"] == 3.0
        assert values["j_g2_line"] is None
        assert values["j_g2"] == 3.0
        assert evaluator.flags["geometric"] == {"not_converged", ROUTE_UNCHECKED}
        assert not evaluator.failures

    def test_tur_keeps_affinity_when_cumulants_fail(self, monkeypatch):
        """Test a failed geometric cumulant leaves the affinity columns filled."""

        def fail(self, n, route):
            msg = "Surface integral for j_g^(2) not converged after 4 refinements"
            raise ConvergenceError(msg)

        monkeypatch.setattr(PointEvaluator, "geometric", fail)
        params = PRESETS["fig4"].params().with_squeezing(1.5, 0.7)
        evaluator = PointEvaluator(params, 0.5, NumericsSettings(), 0)
        values = evaluator.tur()
        assert values["affinity"] is not None
        assert values["g_omega"] is None
        assert values["fano"] is None
        assert "not_converged" in evaluator.flags["tur"]

    def test_curvature_kind(self, driven):
        """Test the three curvature forms at the base temperatures."""
        values = PointEvaluator(driven, 0.5, NumericsSettings(), 0).curvature_kind()
        assert set(values) == {"F_eigenvector", "F_printed", "F_printed_swapped"}
        assert np.isfinite(values["F_eigenvector"])

    def test_static_oracle(self, static):
        """Test an undriven point skips propagation but still samples."""
        params = replace(static, drive=DriveProtocol())
        numerics = NumericsSettings(oracle=OracleSettings(trajectories=200, horizon=0.05))
        evaluator = PointEvaluator(params, 0.5, numerics, 11)
        values = evaluator.oracle()
        assert evaluator.flags["oracle"] == {"not_driven"}
        assert values["j1_propagator"] is None
        assert values["j1_adiabatic"] == pytest.approx(evaluator.dynamic(1))
        assert np.isfinite(values["mean_rate"])

    def test_cgf(self, driven):
        """Test both CGF parts vanish at lambda = 0."""
        values = PointEvaluator(driven, 0.0, NumericsSettings(), 0).cgf()
        assert values["S_d"] == 0.0
        assert values["S_g"] == pytest.approx(0.0, abs=1e-8)

    def test_payload_round_trip(self, static_config):
        """Test a payload evaluates to a JSON-serialisable result."""
        point = static_config.grid()[1]
        result = evaluate_payload(build_payload(static_config, point))
        assert result["index"] == 1
        assert result["coords"] == {"x_left": 0.0, "x_right": 0.7}
        assert set(result["values"]) == {"dynamic", "geometric"}
        json.dumps(result)


class TestWriters:
    """Test deterministic CSV output."""

    def test_format_value(self):
        """Test round-trip precision and empty flagged values."""
        assert format_value(None) == ""
        assert format_value(0.1) == "0.10000000000000001"
        assert float(format_value(1 / 3)) == 1 / 3

    def test_csv_layout(self, tmp_path):
        """Test axes first, quantities next and flags last."""
        results = [
            {
                "index": 0,
                "coords": {"x_left": 0.5},
                "values": {"gc": {"affinity": 0.25, "residual": None, "scale": 1.0, "relative": None}},
                "flags": {"gc": ["domain_error", "not_converged"]},
            },
        ]
        path = tmp_path / "gc.csv"
        write_csv(path, "gc", ("x_left",), results)
        assert path.read_text(encoding="utf-8") == (
            "x_left,affinity,residual,scale,relative,flags\n0.5,0.25,,1,,domain_error;not_converged\n"
        )


class TestRunSweep:
    """Test grid runs end to end on static models."""

    def test_writes_tables_and_manifest(self, static_config, tmp_path):
        """Test one CSV per output kind plus the manifest."""
        result = run_sweep(static_config, tmp_path)
        assert result.ok
        assert {path.name for path in result.files} == {"dynamic.csv", "geometric.csv", MANIFEST_NAME}
        manifest = json.loads((tmp_path / MANIFEST_NAME).read_text(encoding="utf-8"))
        assert manifest["version"] == __version__
        assert manifest["files"] == ["dynamic.csv", "geometric.csv"]
        assert len(manifest["points"]) == 4
        assert manifest["cross_check_failures"] == []

    def test_exchange_antisymmetry_in_table(self, static_config, tmp_path):
        """Test j_d1 flips sign and j_d2 is unchanged under exchanging the squeezings."""
        run_sweep(static_config, tmp_path)
        rows = {(row["x_left"], row["x_right"]): row for row in _read_rows(tmp_path / "dynamic.csv")}
        forward, backward = rows[("0", "0.69999999999999996")], rows[("0.69999999999999996", "0")]
        assert float(forward["j_d1"]) == pytest.approx(-float(backward["j_d1"]), rel=1e-9)
        assert float(forward["j_d2"]) == pytest.approx(float(backward["j_d2"]), rel=1e-9)
        assert forward["C_d1"] == ""
        assert forward["flags"] == "reference_zero"

    def test_byte_identical_reruns(self, static_config, tmp_path):
        """Test repeated runs reproduce every output byte for byte."""
        first = run_sweep(static_config, tmp_path / "first")
        second = run_sweep(static_config, tmp_path / "second")
        for a, b in zip(first.files, second.files, strict=True):
            assert a.read_bytes() == b.read_bytes()

    def test_cross_check_failure_raised_after_writing(self, static_config, tmp_path, monkeypatch):
        """Test failed cross-checks raise with the finished run once every file is on disk."""
        results = evaluate_grid(static_config)
        results[2]["failures"] = ["j_g^(1) surface 1 vs line 2 (relative 5.000e-01)"]
        monkeypatch.setattr("apps.pumping.services.evaluate_grid", lambda config, threads=1: results)
        with pytest.raises(CrossCheckFailure) as exc:
            run_sweep(static_config, tmp_path)
        assert exc.value.result.failures == ("point 2: j_g^(1) surface 1 vs line 2 (relative 5.000e-01)",)
        assert all(path.exists() for path in exc.value.result.files)
        manifest = json.loads((tmp_path / MANIFEST_NAME).read_text(encoding="utf-8"))
        assert manifest["cross_check_failures"] == list(exc.value.result.failures)

    def test_squeezing_pairs_write_both_columns(self, tmp_path):
        """Test a paired squeezing axis writes x_left and x_right columns."""
        config = build_config(_static_document(sweep=[{"name": "squeezing", "pairs": [[0.0, 0.7], [0.7, 0.0]]}]))
        run_sweep(config, tmp_path)
        rows = _read_rows(tmp_path / "dynamic.csv")
        assert [(row["x_left"], row["x_right"]) for row in rows] == [
            ("0", "0.69999999999999996"),
            ("0.69999999999999996", "0"),
        ]
        assert float(rows[0]["j_d1"]) == pytest.approx(-float(rows[1]["j_d1"]), rel=1e-9)

    def test_process_pool_matches_serial(self, static_config):
        """Test local parallel dispatch returns the serial results in grid order."""
        assert evaluate_grid(static_config, threads=2) == evaluate_grid(static_config, threads=1)

    def test_celery_dispatch_matches_local(self, static_config, settings):
        """Test the Celery group returns the local results in grid order."""
        local = evaluate_grid(static_config)
        settings.PUMPING_DISPATCH = "celery"
        assert evaluate_grid(static_config) == local


class TestVerification:
    """Test the verification suite."""

    def test_zero_eigenvalue(self):
        """Test zeta0(0) = 0 on random draws."""
        assert check_zero_eigenvalue(seed=5, draws=2000).passed

    def test_static_gc(self):
        """Test the static fluctuation symmetry."""
        assert check_static_gc().passed

    def test_standard_tur(self):
        """Test F*A >= 2 on static nonequilibrium points."""
        assert check_standard_tur().passed

    def test_affinity_root(self):
        """Test the A = 0 crossing sits at x_left = x_right."""
        assert check_affinity_root().passed

    def test_degenerate_drive(self):
        """Test in-phase driving has no geometric cumulants."""
        assert check_degenerate_drive().passed

    def test_exchange_asymmetry(self):
        """Test unequal temperatures break every exchange symmetry."""
        result = check_exchange_asymmetry()
        assert result.passed, result.detail

    def test_fast_checks(self):
        """Test the checks that need neither propagation nor full preset sweeps."""
        names = ["exchange_symmetry", "route_agreement", "diagonal_zero", "affinity_root", "static_gc"]
        results = run_verification(seed=0, names=names)
        assert [result.name for result in results] == [
            "static_gc",
            "exchange_symmetry",
            "route_agreement",
            "affinity_root",
            "diagonal_zero",
        ]
        assert [result.detail for result in results if not result.passed] == []

    @pytest.mark.slow
    def test_low_temperature(self):
        """Test the low-temperature curvature scaling."""
        result = check_low_temperature()
        assert result.passed, result.detail

    @pytest.mark.slow
    def test_full_suite(self):
        """Test every verification check passes."""
        failed = [result for result in run_verification(seed=0) if not result.passed]
        assert failed == []

    def test_report_file(self, tmp_path):
        """Test the verification report is written as sorted JSON."""
        path = tmp_path / "verify.json"
        write_verification(path, [CheckResult("static_gc", True, "ok")])
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["checks"] == [{"detail": "ok", "name": "static_gc", "passed": True}]
