"""Batch experiment runner: configuration parsing, dispatch and CSV output."""
from .config import ExperimentConfig, parse_config
from .main import main
from .runner import ResultTable, emit_table, read_table, run_experiment

__all__ = ["ExperimentConfig", "ResultTable", "emit_table", "main", "parse_config", "read_table", "run_experiment"]
