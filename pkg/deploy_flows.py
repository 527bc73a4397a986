#!/usr/bin/env python
"""
Serve the experiment flow from a Prefect server.

Every suite is a parameter of one flow, so a single manual deployment covers
all subcommands. Trigger it from the Prefect UI or with
``prefect deployment run "Experiment Suite/experiment-suite-manual" -p subcommand=qei``.
"""
import os

# Setup Django before importing flows
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "kg_workbench.settings")

import django
django.setup()

from prefect import serve

from orchestration.flows import experiment_flow


def deploy_all_flows():
    """Deploy the experiment flow to the Prefect server."""

    print("Deploying Prefect flows...")

    # Experiments are long numerical runs, so there is no schedule
    experiment_deployment = experiment_flow.to_deployment(
        name="experiment-suite-manual",
        description="Runs one workbench suite and writes its results directory.",
        parameters={"subcommand": "green"},
        tags=["experiments", "manual"],
    )

    print("Deployments created:")
    print("   - Experiment Suite (manual trigger only)")

    print("\nStarting Prefect worker to serve deployments...")
    print("   Press Ctrl+C to stop the worker\n")

    serve(experiment_deployment)


if __name__ == "__main__":
    deploy_all_flows()
