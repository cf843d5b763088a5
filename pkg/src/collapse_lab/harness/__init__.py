"""Command line, configs, sweeps and figure data."""
from .config import ExperimentPlan, PlanIOError, RunConfig, load_config, make_plan, \
    parse_config_text
from .figure import CompareReport, analytic_ratio, emit_figure_data, figure_data
from .pipeline import EXIT_BREACH, EXIT_PASS, EXIT_USAGE, Check, run_plan
from .sweep import run_sweep, sweep_specs

__all__ = ["ExperimentPlan", "PlanIOError", "RunConfig", "load_config", "make_plan",
           "parse_config_text", "CompareReport", "analytic_ratio", "emit_figure_data",
           "figure_data", "EXIT_BREACH", "EXIT_PASS", "EXIT_USAGE", "Check", "run_plan",
           "run_sweep", "sweep_specs"]
