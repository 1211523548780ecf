from .heatmap import render_heatmap
from .pipeline import ExperimentPlan, run_ablation, run_arm, run_pipeline, run_sweep
from .report import fmt_mean_std, render_report

__all__ = [
    "ExperimentPlan",
    "run_pipeline",
    "run_ablation",
    "run_sweep",
    "run_arm",
    "render_report",
    "fmt_mean_std",
    "render_heatmap",
]
