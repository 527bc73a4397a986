"""
manage.py run <subcommand> [--config PATH] [--out DIR] [--seed N] [--refine K] [--tol-scale X]

Exit codes: 0 when every check passes, 2 when a check fails, 1 for usage or
config errors.
"""
import logging
import sys
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.serializers import read_config
from cli.suites import SUITES, run_suite
from kg_workbench.exceptions import AssertionFailure, ConfigError, WorkbenchError
from report.artifacts import summary_text, write_artifacts

logger = logging.getLogger(__name__)

USAGE_ERROR = 1


class Command(BaseCommand):
    help = "Run one experiment suite and write its results directory"

    def create_parser(self, prog_name, subcommand, **kwargs):
        """Argument errors exit with the usage code instead of argparse's 2."""
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def usage_error(message):
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                parser.exit(USAGE_ERROR, f"{parser.prog}: error: {message}\n")
            raise CommandError(f"usage error: {message}", returncode=USAGE_ERROR)

        parser.error = usage_error
        return parser

    def add_arguments(self, parser):
        parser.add_argument("subcommand", choices=sorted(SUITES))
        parser.add_argument("--config", dest="config_path", default=None, help="INI experiment config")
        parser.add_argument("--out", dest="out", default=None, help="results directory")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--refine", type=int, default=None, help="refinement levels for convergence studies")
        parser.add_argument("--tol-scale", dest="tol_scale", type=float, default=None)

    def handle(self, *args, **options):
        name = options["subcommand"]
        try:
            config = read_config(options["config_path"]).with_overrides(
                seed=options["seed"], refine=options["refine"], tol_scale=options["tol_scale"],
            )
            result = run_suite(name, config)
        except ConfigError as e:
            logger.error(f"[Run] {name}: config error: {e}")
            raise CommandError(f"config error: {e}", returncode=USAGE_ERROR)
        except WorkbenchError as e:
            logger.error(f"[Run] {name}: {type(e).__name__}: {e}")
            raise CommandError(f"{type(e).__name__}: {e}", returncode=USAGE_ERROR)

        out = Path(options["out"]) if options["out"] else Path(settings.OUTPUT_DIR) / name
        run_options = {
            key: options[key] for key in ("seed", "refine", "tol_scale") if options[key] is not None
        }
        write_artifacts(result, out, config.echo(), run_options)
        self.stdout.write(summary_text(result), ending="")
        self.stdout.write(f"results in {out}")
        try:
            result.raise_for_failures()
        except AssertionFailure as e:
            raise CommandError(str(e), returncode=2)
