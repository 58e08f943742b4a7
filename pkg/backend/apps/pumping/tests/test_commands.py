import json

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from apps.pumping.management.commands.pumping import EXIT_CROSS_CHECK
from apps.pumping.management.commands.pumping import EXIT_INVALID

STATIC_CONFIG = """
model:
  theta0: 177.6
  left: {gamma: 1000, T0: 300}
  right: {gamma: 1000, T0: 250}
sweep:
  - {name: x_left, values: [0.0, 0.5]}
outputs: [dynamic, tur]
"""

DRIVEN_CONFIG = """
model:
  left: {gamma: 1000, T0: 300}
  right: {gamma: 1000, T0: 250}
  drive: {A0: 100, Omega: 100, phi_left: 0.7853981633974483}
outputs: [geometric]
numerics: {route_tolerance: 0.0}
"""


@pytest.fixture
def config_file(tmp_path):
    def write(text):
        path = tmp_path / "run.yaml"
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


class TestPumpingCommand:
    """Test the pumping management command."""

    def test_sweep(self, config_file, tmp_path):
        """Test a sweep writes its tables."""
        out = tmp_path / "out"
        call_command("pumping", "sweep", "--config", config_file(STATIC_CONFIG), "--out", str(out))
        assert (out / "dynamic.csv").exists()
        assert (out / "tur.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert len(manifest["points"]) == 2

    def test_point_ignores_sweep(self, config_file, tmp_path):
        """Test the point action evaluates the base model only."""
        out = tmp_path / "out"
        call_command("pumping", "point", "--config", config_file(STATIC_CONFIG), "--out", str(out))
        lines = (out / "dynamic.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("j_d1,")

    def test_seed_override(self, config_file, tmp_path):
        """Test --seed replaces the configured seed."""
        out = tmp_path / "out"
        call_command("pumping", "point", "--config", config_file(STATIC_CONFIG), "--out", str(out), "--seed", "17")
        assert json.loads((out / "manifest.json").read_text(encoding="utf-8"))["seed"] == 17

    def test_invalid_config_exit_code(self, config_file, tmp_path):
        """Test a rejected configuration exits with status 2."""
        bad = STATIC_CONFIG.replace("T0: 250", "T0: -5")
        with pytest.raises(CommandError) as exc:
            call_command("pumping", "sweep", "--config", config_file(bad), "--out", str(tmp_path))
        assert exc.value.returncode == EXIT_INVALID

    def test_unparsable_config_exit_code(self, config_file, tmp_path):
        """Test malformed YAML exits with status 2."""
        with pytest.raises(CommandError) as exc:
            call_command("pumping", "sweep", "--config", config_file("model: [\n"), "--out", str(tmp_path))
        assert exc.value.returncode == EXIT_INVALID
        assert "line" in str(exc.value)

    def test_missing_config(self):
        """Test the sweep action needs --config."""
        with pytest.raises(CommandError) as exc:
            call_command("pumping", "sweep")
        assert exc.value.returncode == EXIT_INVALID

    def test_unknown_preset(self):
        """Test an unknown preset name exits with status 2."""
        with pytest.raises(CommandError) as exc:
            call_command("pumping", "preset", "fig9")
        assert exc.value.returncode == EXIT_INVALID

    def test_invalid_threads(self, config_file):
        """Test worker counts below one are refused."""
        with pytest.raises(CommandError) as exc:
            call_command("pumping", "sweep", "--config", config_file(STATIC_CONFIG), "--threads", "0")
        assert exc.value.returncode == EXIT_INVALID

    def test_cross_check_failure_exit_code(self, config_file, tmp_path):
        """Test a route disagreement beyond tolerance exits with status 3 after writing outputs."""
        out = tmp_path / "out"
        with pytest.raises(CommandError) as exc:
            call_command("pumping", "point", "--config", config_file(DRIVEN_CONFIG), "--out", str(out))
        assert exc.value.returncode == EXIT_CROSS_CHECK
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["cross_check_failures"]
        assert "route_disagreement" in (out / "geometric.csv").read_text(encoding="utf-8")

    def test_default_output_directory(self, config_file, settings, tmp_path):
        """Test runs land under PUMPING_OUTPUT_DIR when --out is omitted."""
        settings.PUMPING_OUTPUT_DIR = str(tmp_path)
        call_command("pumping", "point", "--config", config_file(STATIC_CONFIG))
        assert (tmp_path / "point" / "dynamic.csv").exists()

    @pytest.mark.slow
    def test_preset_reruns_are_identical(self, tmp_path):
        """Test two preset runs produce byte-identical files."""
        for name in ("first", "second"):
            call_command("pumping", "preset", "fig2", "--out", str(tmp_path / name))
        for path in sorted((tmp_path / "first").iterdir()):
            assert path.read_bytes() == (tmp_path / "second" / path.name).read_bytes()
