"""Coactive learning with locally optimal solvers and a simulated local-improvement expert."""

from colearn.core import (
    ALL_VARIANTS,
    UpdateRule,
    Variant,
    coactive_update,
    compute_delta,
    learning_rate,
    predict_utility,
)
from colearn.domains import DomainConfig, Instance
from colearn.harness import ExperimentConfig, RunLog, run_experiment

__version__ = "0.1.0"
