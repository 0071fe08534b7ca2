"""Benchmark scenarios, closed-form oracles and the command line driver."""

from . import consistency  # noqa: F401  registers the consistency runner
from .report import BenchReport, Comparison
from .runners import RUNNERS, run_scenario
from .scenario import Scenario, ScenarioError, load, parse, serialize

__all__ = ["BenchReport", "Comparison", "RUNNERS", "Scenario", "ScenarioError", "load", "parse", "run_scenario",
           "serialize"]
