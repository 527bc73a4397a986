import logging
import os
from pathlib import Path
from typing import Optional

import django
from prefect import flow, task, get_run_logger
from prefect.cache_policies import NO_CACHE
from prefect.context import get_run_context
from prefect.exceptions import MissingContextError

# Setup Django configuration
# This must be done before importing the workbench apps
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "kg_workbench.settings")
django.setup()

from django.conf import settings

from cli.serializers import ExperimentConfig, read_config
from cli.suites import run_suite
from report.artifacts import SuiteResult, write_artifacts

logger = logging.getLogger(__name__)


# ============================================
# HELPERS
# ============================================

def get_flow_run_id() -> Optional[str]:
    """Get current Prefect flow run ID if available."""
    try:
        ctx = get_run_context()
        if ctx and ctx.flow_run:
            return str(ctx.flow_run.id)
    except Exception:
        pass
    return None


def run_logger():
    """Prefect run logger inside a run, the module logger when called directly."""
    try:
        return get_run_logger()
    except MissingContextError:
        return logger


# ============================================
# TASKS
# ============================================

@task(cache_policy=NO_CACHE)
def load_experiment_config(config_path: str = None, seed: int = None, refine: int = None,
                           tol_scale: float = None) -> ExperimentConfig:
    log = run_logger()
    config = read_config(config_path).with_overrides(seed=seed, refine=refine, tol_scale=tol_scale)
    log.info(f"Loaded config {config_path or '(defaults)'}, seed {config.seed}")
    return config


@task(cache_policy=NO_CACHE)
def run_experiment_suite(subcommand: str, config: ExperimentConfig) -> SuiteResult:
    log = run_logger()
    result = run_suite(subcommand, config)
    log.info(f"Suite '{subcommand}': {len(result.checks)} checks, {len(result.failures)} failed")
    return result


# writes files; never served from cache
@task(retries=1, cache_policy=NO_CACHE)
def write_run_artifacts(result: SuiteResult, out_dir: str, config_echo: str, options: dict) -> str:
    log = run_logger()
    out = write_artifacts(result, out_dir, config_echo, options)
    log.info(f"Wrote results for '{result.name}' to {out}")
    return str(out)


# ============================================
# FLOW
# ============================================

@flow(name="Experiment Suite")
def experiment_flow(
    subcommand: str,
    config_path: str = None,
    out_dir: str = None,
    seed: int = None,
    refine: int = None,
    tol_scale: float = None,
):
    """
    Run one experiment suite and write its results directory.

    Same steps as ``manage.py run``: load config, run suite, write artifacts.
    Failed checks fail the flow run after the artifacts are written.
    """
    log = run_logger()
    log.info(f"Starting experiment flow '{subcommand}' (flow run {get_flow_run_id()})")

    options = {key: value for key, value in (("seed", seed), ("refine", refine), ("tol_scale", tol_scale))
               if value is not None}
    config = load_experiment_config(config_path, seed, refine, tol_scale)
    result = run_experiment_suite(subcommand, config)
    out = write_run_artifacts(result, out_dir or str(Path(settings.OUTPUT_DIR) / subcommand), config.echo(), options)

    if not result.passed:
        log.error(f"Experiment flow '{subcommand}' failed: {[c.name for c in result.failures]}")
        result.raise_for_failures()

    log.info(f"Experiment flow '{subcommand}' completed: all {len(result.checks)} checks passed")
    return {
        "success": True,
        "subcommand": subcommand,
        "checks": len(result.checks),
        "out_dir": out,
        "message": f"{subcommand}: PASS",
    }
