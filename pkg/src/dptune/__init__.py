"""Hyperparameter tuning for software defect predictors."""

__version__ = "0.1.0"
