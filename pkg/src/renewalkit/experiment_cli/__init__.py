"""Experiment runner: validated specs, scenario execution, manifests and replay."""
from .artifacts import ArtifactSink, csv_bytes, json_bytes, sha256_file
from .main import build_parser, main
from .runner import EXIT_BUDGET, EXIT_OK, EXIT_SPEC, EXIT_VERDICT, ReplayReport, RunOutcome, replay, run_spec
from .scenarios import SCENARIOS, ScenarioResult, is_stochastic
from .spec import Budget, ExperimentSpec, load_schema, load_spec, parse_spec, spec_digest

__all__ = [
    "ArtifactSink",
    "Budget",
    "EXIT_BUDGET",
    "EXIT_OK",
    "EXIT_SPEC",
    "EXIT_VERDICT",
    "ExperimentSpec",
    "ReplayReport",
    "RunOutcome",
    "SCENARIOS",
    "ScenarioResult",
    "build_parser",
    "csv_bytes",
    "is_stochastic",
    "json_bytes",
    "load_schema",
    "load_spec",
    "main",
    "parse_spec",
    "replay",
    "run_spec",
    "sha256_file",
    "spec_digest",
]
