"""From-scratch regressors behind a common fit/predict estimator API."""

from .base import BaseRegressor
from .boosting import GradientBoostingRegressor, boosting_loss_trace
from .forest import RandomForestRegressor
from .knn import KNNRegressor, knn_brute_force_oracle
from .serialize import (
    FAMILIES,
    load_model,
    make_regressor,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .tree import RegressionTree, grow_tree

__all__ = [
    "BaseRegressor",
    "FAMILIES",
    "GradientBoostingRegressor",
    "KNNRegressor",
    "RandomForestRegressor",
    "RegressionTree",
    "boosting_loss_trace",
    "grow_tree",
    "knn_brute_force_oracle",
    "load_model",
    "make_regressor",
    "model_from_dict",
    "model_to_dict",
    "save_model",
]
