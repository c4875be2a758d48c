"""Simulation-study harness."""

from .simulate import SimReport, SimStudySpec, default_parallelism, run_study

__all__ = ["SimReport", "SimStudySpec", "default_parallelism", "run_study"]
