"""Experiment scenarios, report emission, and the command-line interface."""

from .reports import SCHEMA_VERSION, TrialReport, render_text, write_report
from .scenarios import (
    ExperimentConfig,
    badamplify_counterexample,
    reduction_pipeline_demo,
    run_scenario,
    scenario_names,
)

__all__ = [
    "SCHEMA_VERSION",
    "TrialReport",
    "render_text",
    "write_report",
    "ExperimentConfig",
    "badamplify_counterexample",
    "reduction_pipeline_demo",
    "run_scenario",
    "scenario_names",
]
