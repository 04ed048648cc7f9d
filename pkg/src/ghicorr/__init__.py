"""Correction toolkit for NWP-derived irradiance point forecasts.

Ingests hourly met-station truth plus per-channel NWP output series, builds
leakage-safe design matrices, trains from-scratch regressors (k-NN, random
forest, gradient boosting), and evaluates everything under a shared
NRMSE / cross-validation protocol. A synthetic scenario generator stands in
for proprietary data so the pipeline is testable end to end.
"""

__version__ = "0.1.0"

from . import data, features, model_selection, regressors, synth  # noqa: E402,F401
