"""Fuzzy rule-based binary classification with iterative fuzzy-rough feature selection."""
from ._accel import BACKEND
from .dataset import FoldPlan, FuzzyDecisionTable, load_table, normalize_minmax, stratified_folds
from .pipeline import Ablation, PipelineConfig, train_pipeline

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Ablation",
    "FoldPlan",
    "FuzzyDecisionTable",
    "PipelineConfig",
    "load_table",
    "normalize_minmax",
    "stratified_folds",
    "train_pipeline",
]
