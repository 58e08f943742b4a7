"""
Management command for batch pumping-statistics runs.

    manage.py pumping point --config run.yaml
    manage.py pumping sweep --config run.yaml --out runs/fig2 --threads 4
    manage.py pumping preset fig4 --seed 7
    manage.py pumping verify

Exit status 2 means the configuration was rejected, 3 means a cross-check
failed.
"""

from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand
from django.core.management.base import CommandError
from rest_framework.exceptions import ValidationError

from apps.pumping.config import build_config
from apps.pumping.config import load_config
from apps.pumping.exceptions import ConfigParseError
from apps.pumping.exceptions import CrossCheckFailure
from apps.pumping.presets import PRESETS
from apps.pumping.services import run_sweep
from apps.pumping.services import run_verification
from apps.pumping.services import write_verification

EXIT_INVALID = 2
EXIT_CROSS_CHECK = 3


def _describe(detail, prefix="") -> list[str]:
    """Flatten nested serializer errors into "path: message" lines."""
    if isinstance(detail, dict):
        return [line for key, value in detail.items() for line in _describe(value, f"{prefix}{key}.")]
    if isinstance(detail, list):
        return [line for value in detail for line in _describe(value, prefix)]
    return [f"{prefix.rstrip('.') or 'config'}: {detail}"]


class Command(BaseCommand):
    help = "Compute squeezed-bath pumping statistics for a point, a sweep, a figure preset or the verify suite"

    def add_arguments(self, parser):
        parser.add_argument("action", choices=["point", "sweep", "preset", "verify"])
        parser.add_argument("name", nargs="?", help="Preset name for the preset action")
        parser.add_argument("--config", dest="config_path", help="YAML run configuration")
        parser.add_argument("--out", dest="out_dir", help="Output directory")
        parser.add_argument("--threads", type=int, default=None, help="Local worker processes")
        parser.add_argument("--seed", type=int, default=None, help="Run seed (unsigned 64-bit)")

    def handle(self, *args, **options):
        action = options["action"]
        threads = settings.PUMPING_DEFAULT_WORKERS if options["threads"] is None else options["threads"]
        if threads < 1:
            raise CommandError("--threads must be >= 1", returncode=EXIT_INVALID)
        seed = options["seed"]
        if seed is not None and not 0 <= seed < 2**64:
            raise CommandError("--seed must be an unsigned 64-bit integer", returncode=EXIT_INVALID)

        if action == "verify":
            self._verify(options["out_dir"], seed or 0)
            return

        config = self._load(action, options["name"], options["config_path"], seed)
        default_dir = Path(settings.PUMPING_OUTPUT_DIR) / (config.preset or action)
        out_dir = Path(options["out_dir"] or config.output_path or default_dir)
        self.stdout.write(f"Running {len(config.grid())} point(s) into {out_dir}...")
        try:
            result = run_sweep(config, out_dir, threads)
        except CrossCheckFailure as exc:
            self._report_files(exc.result)
            for failure in exc.result.failures:
                self.stderr.write(failure)
            raise CommandError(str(exc), returncode=EXIT_CROSS_CHECK) from exc
        self._report_files(result)
        self.stdout.write(self.style.SUCCESS(f"Run complete: {len(result.results)} point(s)"))

    def _report_files(self, result):
        for path in result.files:
            self.stdout.write(f"  wrote {path}")

    def _load(self, action, name, config_path, seed):
        try:
            if action == "preset":
                if name not in PRESETS:
                    raise CommandError(
                        f"Unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}",
                        returncode=EXIT_INVALID,
                    )
                document = {"preset": name}
                if seed is not None:
                    document["seed"] = seed
                return build_config(document)
            if not config_path:
                raise CommandError(f"The {action} action needs --config", returncode=EXIT_INVALID)
            config = load_config(config_path)
        except ConfigParseError as exc:
            raise CommandError(str(exc), returncode=EXIT_INVALID) from exc
        except ValidationError as exc:
            for line in _describe(exc.detail):
                self.stderr.write(line)
            raise CommandError("Invalid configuration", returncode=EXIT_INVALID) from exc

        if seed is not None:
            config = replace(config, seed=seed)
        return config.single_point() if action == "point" else config

    def _verify(self, out_dir, seed):
        results = run_verification(seed)
        for result in results:
            style = self.style.SUCCESS if result.passed else self.style.ERROR
            self.stdout.write(style(f"{'PASS' if result.passed else 'FAIL'} {result.name}: {result.detail}"))
        directory = Path(out_dir or settings.PUMPING_OUTPUT_DIR)
        directory.mkdir(parents=True, exist_ok=True)
        write_verification(directory / "verify.json", results)
        failed = [result.name for result in results if not result.passed]
        if failed:
            raise CommandError(f"Verification failed: {', '.join(failed)}", returncode=EXIT_CROSS_CHECK)
        self.stdout.write(self.style.SUCCESS(f"All {len(results)} checks passed"))
