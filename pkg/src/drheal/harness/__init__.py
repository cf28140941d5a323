"""Experiment orchestration, metrics, statistical tests, and reporting."""

from .experiment import (
    CellSummary,
    ComparisonSummary,
    ExperimentPlan,
    MetricComparison,
    PairOutcome,
    QuadrantCounts,
    default_healing_config,
    quadrant_classify,
    run_cell,
    run_experiment,
    summarize_cell,
)
from .metrics import adaptability_ratio, decrease_ratio, increase_ratio
from .reporting import (
    read_quadrants_csv,
    read_runs_csv,
    read_summary_csv,
    render_tables,
    report_to_csv_row,
    write_curve_csv,
    write_quadrants_csv,
    write_runs_csv,
    write_summary_csv,
)
from .stats import (
    A12Result,
    RankSumResult,
    a12_magnitude,
    vargha_delaney_a12,
    wilcoxon_rank_sum,
)

__all__ = [
    "A12Result",
    "CellSummary",
    "ComparisonSummary",
    "ExperimentPlan",
    "MetricComparison",
    "PairOutcome",
    "QuadrantCounts",
    "RankSumResult",
    "a12_magnitude",
    "adaptability_ratio",
    "decrease_ratio",
    "default_healing_config",
    "increase_ratio",
    "quadrant_classify",
    "read_quadrants_csv",
    "read_runs_csv",
    "read_summary_csv",
    "render_tables",
    "report_to_csv_row",
    "run_cell",
    "run_experiment",
    "summarize_cell",
    "vargha_delaney_a12",
    "write_curve_csv",
    "write_quadrants_csv",
    "write_runs_csv",
    "write_summary_csv",
]
