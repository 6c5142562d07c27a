"""Automated generation and validation of latency digital twins for a
configurable two-path network.

Pipeline: simulate a sweep grid of bandwidth/queue configurations, sample a
training subset, search a regression model zoo under a time budget, bundle
the winners into a per-path latency twin, then validate its accuracy and
speed against the ground-truth simulator.
"""

__version__ = "0.1.0"

from .simulator import (FlowSpec, NetworkConfig, PathConfig, TransferResult,
                        simulate, simulate_path)
from .data import (Dataset, Sample, SweepSpec, full_grid, generate_dataset,
                   interval_sample, read_csv, split, write_csv)
from .denoise import (FilterSpec, NoiseSpec, add_gaussian_noise, denoise_dataset,
                      savitzky_golay, sg_coefficients)
from .metrics import Metrics, compute_metrics
from .models import ModelSpec, TrainedRegressor, fit
from .automl import (Leaderboard, Twin, build_twin, evaluate, greedy_ensemble,
                     load_twin, save_twin, search)
from .runtime import Prediction, predict, predict_batch
from .bench import BenchReport, project_pipeline, run_quality_study, time_speedup

__all__ = [
    "FlowSpec", "NetworkConfig", "PathConfig", "TransferResult",
    "simulate", "simulate_path",
    "Dataset", "Sample", "SweepSpec", "full_grid", "generate_dataset",
    "interval_sample", "read_csv", "split", "write_csv",
    "FilterSpec", "NoiseSpec", "add_gaussian_noise", "denoise_dataset",
    "savitzky_golay", "sg_coefficients",
    "Metrics", "compute_metrics",
    "ModelSpec", "TrainedRegressor", "fit",
    "Leaderboard", "Twin", "build_twin", "evaluate", "greedy_ensemble",
    "load_twin", "save_twin", "search",
    "Prediction", "predict", "predict_batch",
    "BenchReport", "project_pipeline", "run_quality_study", "time_speedup",
    "__version__",
]
